"""Hide a Cuntz block inside a truncated model tuple by a random unitary
change of basis and recover both parts.

    python3 scripts/wold_demo.py --n 2 --N 3 --cuntz-dim 4 --seed 0
"""

import argparse
import json

import numpy as np
from scipy.stats import unitary_group

from fockmodel.fock import OperatorTuple, build_W, direct_sum
from fockmodel.weights import bergman_weights
from fockmodel.wold import k0_orthogonal_expansion, wold_decompose


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--cuntz-dim", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    wf = bergman_weights(args.n, 1.0, args.N)
    C = OperatorTuple.from_list([unitary_group.rvs(args.cuntz_dim, random_state=args.seed + i) / np.sqrt(args.n)
                                 for i in range(args.n)])
    V = direct_sum(build_W(wf), C)
    Q = unitary_group.rvs(V.dim, random_state=args.seed + 100)
    V = OperatorTuple.from_list([Q @ A @ Q.conj().T for A in V.mats])

    dec = wold_decompose(wf, V)
    exp = k0_orthogonal_expansion(wf, V)
    print(json.dumps(dec.to_json(), indent=2))
    print(f"K0 = span of {len(exp.words)} subspaces V_alpha D, "
          f"orthogonality {exp.orthogonality:.1e}, span residual {exp.span_residual:.1e}")


if __name__ == "__main__":
    main()
