"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails (the report
lists witnesses), 2 for unusable input or a series that does not settle.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .domain import (
    berezin_kernel,
    classify,
    coinvariant_compression,
    intertwining_residual,
    model_transfer_check,
    spectral_norm,
)
from .errors import ConvergenceError, GateError, NotMultiAnalyticError, NotPureError
from .fock import OperatorTuple, TruncatedFock, build_W, direct_sum, model_completeness, model_defect
from .hardy import (
    analytic_matrix,
    cesaro_calculus,
    cesaro_sum,
    fourier_coefficients,
    functional_calculus,
)
from .multiplier import MultiplierSymbol, right_multiplier_matrix, symbol_from_commutant, unitarity_residual
from .series import FreeSeries, multiply
from .weights import (
    WeightFamily,
    admissibility_report,
    bergman_weights,
    dirichlet_weights,
    psi_weights,
)
from .wold import wold_decompose
from .words import words_up_to

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    weights_path: str | None = None
    bergman: float | None = None
    dirichlet: float | None = None
    psi: str | None = None
    tuple_path: str | None = None
    n: int = 2
    N: int = 5
    degree_cap: int | None = None
    tol: float = 1e-10
    radial: tuple[float, ...] = (0.5, 0.7, 0.9, 0.99)
    format: str = "text"
    seed: int = 0
    out: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1:
            raise InputError("N must be at least 1")
        if self.n < 1:
            raise InputError("n must be at least 1")
        if not self.tol > 0:
            raise InputError("tolerances must be positive")
        if self.format not in ("text", "json"):
            raise InputError(f"unknown format {self.format!r}")


# -- inputs -------------------------------------------------------------------


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _parse_psi(text: str, n: int, N: int) -> WeightFamily:
    """``d1,...,dn:s`` gives linear ``phi = sum d_i Z_i``; a ``.json`` path holds ``{"phi", "s"}``."""
    if text.endswith(".json"):
        data = _read_json(text)
        return psi_weights(FreeSeries.from_json(data["phi"]), float(data["s"]), N)
    try:
        coeffs, s = text.split(":")
        d = [float(x) for x in coeffs.split(",")]
    except ValueError as exc:
        raise InputError(f"--psi expects 'd1,...,dn:s', got {text!r}") from exc
    if len(d) != n:
        raise InputError(f"--psi needs {n} linear coefficients")
    phi = FreeSeries.from_terms(n, 1, {(i + 1,): c for i, c in enumerate(d)})
    return psi_weights(phi, float(s), N)


def load_weights(cfg: RunConfig) -> WeightFamily:
    chosen = [x is not None for x in (cfg.weights_path, cfg.bergman, cfg.dirichlet, cfg.psi)]
    if sum(chosen) > 1:
        raise InputError("give at most one of --weights/--bergman/--dirichlet/--psi")
    try:
        if cfg.weights_path:
            wf = WeightFamily.from_json(_read_json(cfg.weights_path))
            if wf.degree < cfg.N and wf.kind != "table":
                wf = wf.at_degree(cfg.N)
            return wf
        if cfg.dirichlet is not None:
            return dirichlet_weights(cfg.n, cfg.dirichlet, cfg.N)
        if cfg.psi is not None:
            return _parse_psi(cfg.psi, cfg.n, cfg.N)
        return bergman_weights(cfg.n, 1.0 if cfg.bergman is None else cfg.bergman, cfg.N)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed weight input: {exc}") from exc


def load_tuple(cfg: RunConfig, wf: WeightFamily) -> OperatorTuple:
    """The tuple from ``--tuple``, otherwise the truncated model tuple."""
    if cfg.tuple_path is None:
        return build_W(wf)
    try:
        T = OperatorTuple.from_json(_read_json(cfg.tuple_path))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed tuple input: {exc}") from exc
    if T.n != wf.n:
        raise InputError(f"tuple has {T.n} operators, weights have {wf.n} generators")
    return T


# -- checks -------------------------------------------------------------------


def _check(name: str, value: float, tol: float) -> dict:
    return {"name": name, "value": value, "tolerance": tol, "passed": bool(value <= tol)}


def _random_series(rng: np.random.Generator, n: int, degree: int, pad: int) -> FreeSeries:
    blocks = [rng.normal(size=n**k) + 1j * rng.normal(size=n**k) for k in range(degree + 1)]
    return FreeSeries.from_blocks(n, blocks).pad(pad)


def _random_pure(rng: np.random.Generator, W: OperatorTuple, k: int = 3) -> OperatorTuple:
    T, _ = coinvariant_compression(W, rng.normal(size=(W.dim, k)) + 1j * rng.normal(size=(W.dim, k)))
    return T


def cmd_weights(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    s1, s2 = wf.inverse_residuals()
    checks = [_check("inverse_sum1", s1, cfg.tol), _check("inverse_sum2", s2, cfg.tol)]
    report = {"weights": wf.to_json(), "b": wf.b.to_json(), "a": wf.a.to_json(),
              "checks": checks}
    return report, _code(checks)


def cmd_admissible(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    rep = admissibility_report(wf).to_json()
    s1, s2 = wf.inverse_residuals()
    checks = [_check("inverse_sum1", s1, cfg.tol), _check("inverse_sum2", s2, cfg.tol)]
    return {"kind": wf.kind, "params": wf.params, "admissibility": rep, "checks": checks}, _code(checks)


def cmd_classify(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    T = load_tuple(cfg, wf)
    c = classify(wf, T, cfg.degree_cap, radial_grid=cfg.radial, cuntz_tol=cfg.tol, domain_tol=cfg.tol)
    if not c.converged:
        raise ConvergenceError("defect-type series did not settle; verdict inconclusive")
    return {"classification": c.to_json()}, EXIT_OK


def _berezin_checks(wf: WeightFamily, T: OperatorTuple, cfg: RunConfig) -> list[dict]:
    bk = berezin_kernel(wf, T, None, cfg.degree_cap)
    iso = spectral_norm(bk.K.conj().T @ bk.K - np.eye(T.dim))
    pairs = [(a, b) for a in words_up_to(wf.n, 2) for b in words_up_to(wf.n, 2)]
    return [
        _check("isometry", iso, cfg.tol),
        _check("intertwining", intertwining_residual(wf, T, bk), cfg.tol),
        _check("model_transfer", model_transfer_check(wf, T, pairs, None, cfg.degree_cap), cfg.tol),
    ]


def cmd_berezin(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    T = load_tuple(cfg, wf)
    try:
        checks = _berezin_checks(wf, T, cfg)
    except NotPureError as exc:
        return {"checks": [], "error": str(exc)}, EXIT_FAIL
    return {"checks": checks}, _code(checks)


def _hardy_checks(wf: WeightFamily, T: OperatorTuple, cfg: RunConfig, rng: np.random.Generator) -> list[dict]:
    N, n = wf.degree, wf.n
    fock = TruncatedFock(n, N)
    p = _random_series(rng, n, min(3, N), N)
    A = analytic_matrix(wf, p)
    rt = fourier_coefficients(A, wf).max_abs_diff(p)
    X = rng.normal(size=(2 * fock.dim,) * 2) + 1j * rng.normal(size=(2 * fock.dim,) * 2)
    fejer = max(spectral_norm(cesaro_sum(X, k, n, 2)) - spectral_norm(X) for k in range(2 * N + 1))
    q1, q2 = (_random_series(rng, n, min(2, N // 2), N) for _ in range(2))
    hom = spectral_norm(functional_calculus(wf, T, multiply(q1, q2))
                        - functional_calculus(wf, T, q1) @ functional_calculus(wf, T, q2))
    lim = cesaro_calculus(wf, T, q1, N + 1).limit
    ces = spectral_norm(lim - functional_calculus(wf, T, q1))
    return [
        _check("fourier_round_trip", rt, cfg.tol),
        _check("fejer_bound_excess", max(fejer, 0.0), cfg.tol),
        _check("calculus_homomorphism", hom, max(cfg.tol, 1e-9)),
        _check("cesaro_limit", ces, max(cfg.tol, 1e-9)),
    ]


def cmd_hardy(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    T = load_tuple(cfg, wf) if cfg.tuple_path else _random_pure(np.random.default_rng(cfg.seed), build_W(wf))
    try:
        checks = _hardy_checks(wf, T, cfg, np.random.default_rng(cfg.seed))
    except NotPureError as exc:
        return {"checks": [], "error": str(exc)}, EXIT_FAIL
    return {"checks": checks}, _code(checks)


def _multiplier_checks(wf: WeightFamily, cfg: RunConfig, rng: np.random.Generator) -> list[dict]:
    N, n, e = wf.degree, wf.n, 2
    dim = TruncatedFock(n, N).dim
    coeffs = rng.normal(size=(dim, e, e)) + 1j * rng.normal(size=(dim, e, e))
    coeffs[TruncatedFock(n, min(3, N)).dim:] = 0
    phi = MultiplierSymbol(n, N, coeffs)
    X = right_multiplier_matrix(phi, wf, wf)
    rec, res = symbol_from_commutant(X, wf, wf, e, e, tol=cfg.tol * 10)
    Q = np.kron(np.diag((TruncatedFock(n, N).degrees() == 1).astype(float)), np.eye(e))
    try:
        symbol_from_commutant(Q, wf, wf, e, e, tol=cfg.tol)
        rejected = 1.0
    except NotMultiAnalyticError:
        rejected = 0.0
    return [
        _check("symbol_round_trip", rec.max_abs_diff(phi), cfg.tol),
        _check("reconstruction", res, cfg.tol),
        _check("non_commutant_accepted", rejected, 0.5),
        _check("u_g_unitarity", unitarity_residual(wf), cfg.tol),
    ]


def cmd_multiplier(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    checks = _multiplier_checks(wf, cfg, np.random.default_rng(cfg.seed))
    return {"checks": checks}, _code(checks)


def cmd_wold(cfg: RunConfig) -> tuple[dict, int]:
    wf = load_weights(cfg)
    V = load_tuple(cfg, wf)
    tol = max(cfg.tol, 1e-8)
    try:
        dec = wold_decompose(wf, V, None, cfg.degree_cap, tol)
    except GateError as exc:
        return {"verdict": "not representation-type", "error": str(exc)}, EXIT_FAIL
    return {"verdict": "decomposed", "wold": dec.to_json()}, EXIT_OK if dec.passed else EXIT_FAIL


def _mixed_example(n: int, N: int, rng: np.random.Generator) -> tuple[WeightFamily, OperatorTuple]:
    from scipy.stats import unitary_group

    wf = bergman_weights(n, 1.0, N)
    seeds = rng.integers(0, 2**31, size=n)
    C = OperatorTuple.from_list([unitary_group.rvs(4, random_state=int(s)) / np.sqrt(n) for s in seeds])
    return wf, direct_sum(build_W(wf), C)


def cmd_selftest(cfg: RunConfig) -> tuple[dict, int]:
    rng = np.random.default_rng(cfg.seed)
    n, N = cfg.n, cfg.N
    sections: dict[str, list[dict]] = {}
    families = {
        "bergman_0.5": bergman_weights(n, 0.5, N),
        "bergman_2.5": bergman_weights(n, 2.5, N),
        "dirichlet_-1": dirichlet_weights(n, -1.0, N),
    }
    for name, wf in families.items():
        s1, s2 = wf.inverse_residuals()
        P = np.zeros((wf.b_flat.size,) * 2)
        P[0, 0] = 1.0
        sections[f"weights/{name}"] = [
            _check("inverse_sum1", s1, cfg.tol),
            _check("inverse_sum2", s2, cfg.tol),
            _check("model_defect", float(np.abs(model_defect(wf) - P).max()), cfg.tol),
            _check("model_completeness", float(np.abs(model_completeness(wf) - np.eye(P.shape[0])).max()), cfg.tol),
        ]
    wf = families["bergman_2.5"]
    W = build_W(wf)
    sections["berezin/model"] = _berezin_checks(wf, W, cfg)
    sections["hardy"] = _hardy_checks(wf, _random_pure(rng, W), cfg, rng)
    sections["multiplier"] = _multiplier_checks(wf, cfg, rng)
    wf_ball, V = _mixed_example(n, min(N, 3), rng)
    dec = wold_decompose(wf_ball, V, tol=1e-8)
    sections["wold"] = [_check(k, v, 1e-8) for k, v in dec.residuals.items()]
    sections["wold"].append(_check("dims_mismatch", float(dec.dims != (V.dim - 4, 4)), 0.5))
    checks = [c for cs in sections.values() for c in cs]
    return {"sections": sections, "passed": all(c["passed"] for c in checks)}, _code(checks)


COMMANDS: dict[str, Callable[[RunConfig], tuple[dict, int]]] = {
    "weights": cmd_weights,
    "admissible": cmd_admissible,
    "classify": cmd_classify,
    "berezin": cmd_berezin,
    "hardy": cmd_hardy,
    "multiplier": cmd_multiplier,
    "wold": cmd_wold,
    "selftest": cmd_selftest,
}


def _code(checks: list[dict]) -> int:
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAIL


# -- output -------------------------------------------------------------------


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    lines = [f"{report['command']}: exit {report['exit_code']}"]
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    checks = report.get("checks") or []
    for name, cs in (report.get("sections") or {}).items():
        checks = checks + [dict(c, name=f"{name}:{c['name']}") for c in cs]
    for c in checks:
        mark = "pass" if c["passed"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})")
    if "classification" in report:
        cl = report["classification"]
        lines.append(f"  verdict: {cl['verdict']}")
        lines.append(f"  pure residual {cl['pure_residual']:.3e}, defect norm {cl['cuntz_residual']:.3e}")
    if "wold" in report:
        w = report["wold"]
        lines.append(f"  dims K0={w['dims']['k0']} K1={w['dims']['k1']} D={w['dims']['wandering']}")
        for k, v in w["residuals"].items():
            lines.append(f"  {k}: {v:.3e} (tol {w['tolerance']:.1e})")
    if "admissibility" in report:
        a = report["admissibility"]
        lines.append(f"  regularity: {'pass' if a['regularity']['passed'] else 'fail'}")
        lines.append(f"  subcn: {'pass' if a['subcn']['passed'] else 'fail'} witness={a['subcn']['witness']}")
        lines.append(f"  sign pattern: N0={a['sign_pattern']['N0']} {a['sign_pattern']['sign']}")
        lines.append(f"  tail sups: {[round(t['sup'], 6) for t in a['tail_sup_table']]}")
    if "weights" in report:
        lines.append(f"  kind {report['weights']['kind']}, degree {report['weights']['degree']}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple[int, dict]:
    try:
        body, code = COMMANDS[cfg.command](cfg)
    except (InputError, ValueError, OverflowError, ArithmeticError, ConvergenceError) as exc:
        body, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_INPUT
    header = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": cfg.command,
        "config": {k: v for k, v in asdict(cfg).items() if k not in ("command", "out", "format", "extra")},
        "exit_code": code,
    }
    return code, {**header, **body}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("weights")
    src.add_argument("--weights", dest="weights_path", help="weight family JSON")
    src.add_argument("--bergman", type=float, help="Bergman parameter s")
    src.add_argument("--dirichlet", type=float, help="Dirichlet parameter s")
    src.add_argument("--psi", help="'d1,...,dn:s' for phi = sum d_i Z_i, or a JSON file")
    common.add_argument("--tuple", dest="tuple_path", help="operator tuple JSON (default: truncated model)")
    common.add_argument("--n", type=int, default=2)
    common.add_argument("--N", type=int, default=5)
    common.add_argument("--cap", dest="degree_cap", type=int, default=None, help="series degree cap")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--radial", default="0.5,0.7,0.9,0.99", help="comma separated radii")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    p = argparse.ArgumentParser(prog="fockmodel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        radial = tuple(float(r) for r in args.radial.split(",") if r.strip())
        cfg = RunConfig(
            command=args.command, weights_path=args.weights_path, bergman=args.bergman,
            dirichlet=args.dirichlet, psi=args.psi, tuple_path=args.tuple_path, n=args.n, N=args.N,
            degree_cap=args.degree_cap, tol=args.tol, radial=radial, format=args.format,
            seed=args.seed, out=args.out,
        )
    except (InputError, ValueError) as exc:
        print(f"fockmodel: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, report = run(cfg)
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
