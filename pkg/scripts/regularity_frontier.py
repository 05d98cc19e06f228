"""Sweep the Bergman and Dirichlet parameters and report where the ratio
condition and regularity switch from pass to fail.

    python3 scripts/regularity_frontier.py --N 7 --out frontier.json
"""

import argparse
import json

import numpy as np

from fockmodel.weights import bergman_weights, dirichlet_weights, regularity_check, sign_pattern_check, subcn_check


def sweep(kind, grid, n, N):
    build = bergman_weights if kind == "bergman" else dirichlet_weights
    rows = []
    for s in grid:
        wf = build(n, float(s), N)
        sp = sign_pattern_check(wf)
        rows.append({"s": round(float(s), 6), "subcn": subcn_check(wf).passed,
                     "regular": regularity_check(wf).passed, "N0": sp.n0})
    return rows


def frontier(rows, key):
    flips = [(a["s"], b["s"]) for a, b in zip(rows, rows[1:]) if a[key] != b[key]]
    return flips


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--N", type=int, default=7)
    p.add_argument("--out")
    args = p.parse_args()
    grids = {"bergman": np.linspace(0.1, 3.0, 30), "dirichlet": np.linspace(-2.0, 2.0, 41)}
    report = {}
    for kind, grid in grids.items():
        rows = sweep(kind, grid, args.n, args.N)
        report[kind] = {"rows": rows, "subcn_flips": frontier(rows, "subcn"),
                        "regular_flips": frontier(rows, "regular")}
        print(f"{kind}: subcn flips between {report[kind]['subcn_flips']}, "
              f"regularity flips between {report[kind]['regular_flips']}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)


if __name__ == "__main__":
    main()
