"""Defect operators, classification and Berezin kernels for finite tuples.

Series of the form ``sum_alpha c_alpha T_alpha Y T_alpha^*`` are summed
degree by degree.  When the coefficients depend on word length only, the
degree-``k`` term is ``c_k Phi^k(Y)`` with ``Phi(Y) = sum_i T_i Y T_i^*``,
which avoids enumerating words; otherwise the word products are stacked
per degree.  Both paths sum in the same fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConvergenceError, NotInDomainError, NotPureError
from .fock import OperatorTuple, TruncatedFock, build_W
from .weights import WeightFamily
from .words import Word

RADIAL_DEGREE_CAP = 500
VANISH_TOL = 1e-15
MAX_STACK_ENTRIES = 6 * 10**7
DEFAULT_RADIAL_GRID = (0.5, 0.7, 0.9, 0.99)


def spectral_norm(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def word_product_stacks(T: OperatorTuple, kmax: int) -> Iterator[np.ndarray]:
    """Yield, for ``k = 0..kmax``, the stack of ``T_alpha`` over ``|alpha| = k`` in lex order."""
    S = np.eye(T.dim, dtype=complex)[None]
    yield S
    for _ in range(kmax):
        if S.shape[0] * T.n * T.dim**2 > MAX_STACK_ENTRIES:
            raise MemoryError("word product stack exceeds the configured cap")
        S = np.einsum("rab,ibc->riac", S, T.mats).reshape(-1, T.dim, T.dim)
        yield S


@dataclass
class SeriesSum:
    matrix: np.ndarray
    degrees_used: int
    increments: list[float]
    converged: bool
    exact: bool  # the terms vanished identically beyond degrees_used
    tolerance: float


def _is_converged(increments: list[float], total: np.ndarray, tol: float) -> bool:
    if len(increments) < 3:
        return False
    bound = tol * (1.0 + spectral_norm(total))
    return all(x <= bound for x in increments[-3:])


def weighted_series(
    wf: WeightFamily,
    T: OperatorTuple,
    coeff: str,
    Y: np.ndarray | None = None,
    degree_cap: int | None = None,
    tol: float = 1e-12,
    start: int = 0,
) -> SeriesSum:
    """``sum_{|alpha| >= start} c_alpha T_alpha Y T_alpha^*`` with ``c`` one of ``a``, ``b``, ``|a|``."""
    Y = np.eye(T.dim, dtype=complex) if Y is None else np.asarray(Y, dtype=complex)
    if T.n != wf.n:
        raise ValueError(f"tuple has {T.n} operators, weights have {wf.n} generators")
    radial_cap = RADIAL_DEGREE_CAP if degree_cap is None else degree_cap
    prof = wf.radial_profile(radial_cap)
    total = np.zeros((T.dim, T.dim), dtype=complex)
    increments: list[float] = []
    yscale = max(1.0, spectral_norm(Y))

    if prof is not None:
        b, a = prof
        c = {"a": a, "b": b, "|a|": np.abs(a)}[coeff]
        X = Y.copy()
        for k in range(radial_cap + 1):
            if k > 0:
                X = np.einsum("iab,bc,idc->ad", T.mats, X, T.mats.conj())
            if spectral_norm(X) <= VANISH_TOL * yscale:
                return SeriesSum(hermitian_part(total), k, increments, True, True, tol)
            if k < start:
                continue
            term = c[k] * X
            total = total + term
            increments.append(spectral_norm(term))
            if _is_converged(increments, total, tol):
                return SeriesSum(hermitian_part(total), k, increments, True, False, tol)
        return SeriesSum(hermitian_part(total), radial_cap, increments, False, False, tol)

    cap = wf.degree if degree_cap is None else degree_cap
    if cap > wf.degree:
        raise ValueError(f"degree cap {cap} exceeds the weight truncation {wf.degree}")
    blocks = {"a": wf.aa, "b": wf.bb, "|a|": [np.abs(x) for x in wf.aa]}[coeff]
    for k, S in enumerate(word_product_stacks(T, cap)):
        if np.max(np.abs(S)) <= VANISH_TOL:
            return SeriesSum(hermitian_part(total), k, increments, True, True, tol)
        if k < start:
            continue
        SY = np.einsum("rab,bc->rac", S, Y)
        term = np.einsum("r,rab,rcb->ac", blocks[k], SY, S.conj())
        total = total + term
        increments.append(spectral_norm(term))
        if _is_converged(increments, total, tol):
            return SeriesSum(hermitian_part(total), k, increments, True, False, tol)
    return SeriesSum(hermitian_part(total), cap, increments, False, False, tol)


@dataclass
class DefectResult:
    matrix: np.ndarray
    degrees_used: int
    increments: list[float]
    converged: bool
    exact: bool
    tolerance: float

    @property
    def norm(self) -> float:
        return spectral_norm(self.matrix)

    @property
    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


def defect(wf: WeightFamily, T: OperatorTuple, degree_cap: int | None = None, tol: float = 1e-12) -> DefectResult:
    """``Delta = sum_alpha a_alpha T_alpha T_alpha^*`` summed by degree."""
    s = weighted_series(wf, T, "a", None, degree_cap, tol)
    return DefectResult(s.matrix, s.degrees_used, s.increments, s.converged, s.exact, tol)


def pure_sum(wf: WeightFamily, T: OperatorTuple, Delta: np.ndarray,
             degree_cap: int | None = None, tol: float = 1e-12) -> SeriesSum:
    """``sum_alpha b_alpha T_alpha Delta T_alpha^*``."""
    return weighted_series(wf, T, "b", Delta, degree_cap, tol)


@dataclass
class Classification:
    in_domain: bool | None
    pure: bool | None
    cuntz: bool | None
    pure_residual: float
    cuntz_residual: float
    min_defect_eig: float
    max_pure_sum_eig: float
    converged: bool
    radial: list[dict] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if not self.converged:
            return "inconclusive"
        if not self.in_domain:
            return "not in domain"
        if self.pure:
            return "pure"
        if self.cuntz:
            return "Cuntz"
        return "in domain"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "in_domain": self.in_domain,
            "pure": self.pure,
            "cuntz": self.cuntz,
            "pure_residual": self.pure_residual,
            "cuntz_residual": self.cuntz_residual,
            "min_defect_eig": self.min_defect_eig,
            "max_pure_sum_eig": self.max_pure_sum_eig,
            "radial": self.radial,
            "converged": self.converged,
            "tolerances": self.tolerances,
        }


def _membership(wf, T, degree_cap, tol, domain_tol, cuntz_tol):
    """Defect, pure sum and the domain flag (``None`` when a needed series does not settle).

    A defect below ``cuntz_tol`` is taken to be zero, so the pure sum is zero
    as well; summing ``b``-weighted terms of a roundoff-sized defect would
    otherwise diverge for weights that grow along words.
    """
    D = defect(wf, T, degree_cap, tol)
    if not D.converged:
        return D, None, None
    if D.min_eig < -domain_tol:
        return D, None, False
    if D.norm <= cuntz_tol:
        return D, np.zeros_like(D.matrix), True
    P = pure_sum(wf, T, D.matrix, degree_cap, tol)
    if not P.converged:
        return D, None, None
    ok = float(np.linalg.eigvalsh(P.matrix).max()) <= 1 + domain_tol
    return D, P.matrix, ok


def classify(
    wf: WeightFamily,
    T: OperatorTuple,
    degree_cap: int | None = None,
    tol: float = 1e-12,
    radial_grid: Sequence[float] = DEFAULT_RADIAL_GRID,
    pure_tol: float = 1e-8,
    cuntz_tol: float = 1e-10,
    domain_tol: float = 1e-10,
) -> Classification:
    """Domain membership, purity and the Cuntz property of ``T``.

    A series that does not settle yields an ``inconclusive`` verdict rather
    than a failure.  Radial membership is probed on ``radial_grid`` only.
    """
    D, P, ok = _membership(wf, T, degree_cap, tol, domain_tol, cuntz_tol)
    tols = {"series": tol, "pure": pure_tol, "cuntz": cuntz_tol, "domain": domain_tol}
    radial = []
    for r in radial_grid:
        _, _, rok = _membership(wf, T.scaled(r), degree_cap, tol, domain_tol, cuntz_tol)
        radial.append({"r": float(r), "in_domain": rok})
    if ok is None:
        return Classification(None, None, None, np.nan, D.norm, D.min_eig if D.converged else np.nan,
                              np.nan, False, radial, tols)
    if P is None:  # defect is not positive
        return Classification(False, False, False, np.nan, D.norm, D.min_eig, np.nan, True, radial, tols)
    pres = spectral_norm(P - np.eye(T.dim))
    cres = D.norm
    return Classification(
        in_domain=ok,
        pure=bool(ok and pres <= pure_tol),
        cuntz=bool(ok and cres <= cuntz_tol),
        pure_residual=pres,
        cuntz_residual=cres,
        min_defect_eig=D.min_eig,
        max_pure_sum_eig=float(np.linalg.eigvalsh(P).max()),
        converged=True,
        radial=radial,
        tolerances=tols,
    )


@dataclass
class Lemm2Result:
    passed: bool
    bound: float  # largest eigenvalue of sum_{|alpha|>=1} |a_alpha| T_alpha T_alpha^*
    c: float
    pure_confirmed: bool | None


def lemm2_certificate(wf: WeightFamily, T: OperatorTuple, c: float,
                      degree_cap: int | None = None, tol: float = 1e-12) -> Lemm2Result:
    """Sufficient test for purity: ``sum |a_alpha| T_alpha T_alpha^* <= c I`` with ``c < 1``."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    S = weighted_series(wf, T, "|a|", None, degree_cap, tol, start=1)
    if not S.converged:
        raise ConvergenceError("absolute defect series did not settle")
    bound = float(np.linalg.eigvalsh(S.matrix).max()) if S.matrix.size else 0.0
    passed = bound <= c
    confirmed = None
    if passed:
        confirmed = bool(classify(wf, T, degree_cap, tol, radial_grid=()).pure)
    return Lemm2Result(passed, bound, c, confirmed)


@dataclass
class BallEstimate:
    epsilon: float
    t: float
    M: float
    omega: float
    inverse_radius_estimate: float
    degrees: int
    status: str = "estimate from truncated data"


def pure_ball_radius(wf: WeightFamily, c: float = 0.5, t_min: float = 1e-6,
                     decay: float = 1e-3) -> BallEstimate:
    """Radius of a ball of tuples that are certified pure by :func:`lemm2_certificate`.

    Picks ``t`` below the estimated radius of convergence of ``g^{-1}``,
    sums ``M = sum_k sum_{|alpha|=k} |a_alpha| t^k`` over the truncation and
    returns ``sqrt(omega t)`` with ``omega M <= c/2``.
    """
    prof = wf.radial_profile(60) if wf.kind in ("bergman", "dirichlet") else None
    if prof is not None:
        absk = np.abs(prof[1]) * wf.n ** np.arange(len(prof[1]))
        l2k = np.sqrt(np.abs(prof[1]) ** 2 * wf.n ** np.arange(len(prof[1])))
    else:
        absk = np.array([np.sum(np.abs(x)) for x in wf.aa])
        l2k = np.array([np.sqrt(np.sum(np.abs(x) ** 2)) for x in wf.aa])
    K = len(absk) - 1
    if K < 1:
        raise ValueError("need inverse coefficients beyond degree 0")
    roots = np.array([l2k[k] ** (1.0 / k) for k in range(1, K + 1)])
    tail = roots[len(roots) // 2:]
    inv_rho = float(tail.max()) if tail.size else 0.0
    t = 1.0 if inv_rho == 0 else min(1.0, 0.5 / (inv_rho * np.sqrt(wf.n)))
    while t >= t_min:
        terms = absk[1:] * t ** np.arange(1, K + 1)
        M = float(terms.sum())
        last = terms[-3:]
        if M > 0 and np.all(last <= decay * M) and np.all(np.diff(last) <= 0):
            omega = min(0.5, c / (2 * M))
            return BallEstimate(float(np.sqrt(omega * t)), float(t), M, omega, inv_rho, K)
        if M == 0:
            raise ValueError("g^{-1} is constant; every small tuple is pure")
        t /= 2
    raise ConvergenceError("no t in the probe range makes the absolute inverse series settle")


# -- Berezin kernel -------------------------------------------------------


@dataclass
class BerezinKernel:
    """``K h = sum_{|alpha| <= N} sqrt(b_alpha) e_alpha (x) Delta^{1/2} T_alpha^* h``.

    Rows are ordered word-major: row ``alpha * r + j`` pairs ``e_alpha`` with
    the ``j``-th defect-space basis vector.
    """

    K: np.ndarray
    n: int
    N: int
    defect_basis: np.ndarray  # d x r, orthonormal eigenvectors of Delta
    defect_sqrt: np.ndarray  # Delta^{1/2}, d x d
    defect: DefectResult
    eigen_threshold: float

    @property
    def rank(self) -> int:
        return self.defect_basis.shape[1]

    @property
    def fock(self) -> TruncatedFock:
        return TruncatedFock(self.n, self.N)


DEFECT_FLOOR = 1e-13  # eigenvalues of Delta below this are roundoff


def _psd_factor(Delta: np.ndarray, tol: float, rel: float = 1e-10, floor: float = DEFECT_FLOOR):
    w, V = np.linalg.eigh(Delta)
    if w.size and w.min() < -tol:
        raise NotInDomainError(f"defect has eigenvalue {w.min():.3e} below -{tol:.1e}")
    w = np.clip(w, 0.0, None)
    top = w.max() if w.size else 0.0
    thr = max(rel * top, floor)
    keep = w > thr
    sqrt = (V * np.sqrt(w)) @ V.conj().T
    return V[:, keep], np.sqrt(w[keep]), sqrt, thr


def berezin_kernel(wf: WeightFamily, T: OperatorTuple, N: int | None = None,
                   degree_cap: int | None = None, tol: float = 1e-12,
                   domain_tol: float = 1e-10) -> BerezinKernel:
    N = wf.degree if N is None else N
    if N > wf.degree:
        wf = wf.at_degree(N)
    D = defect(wf, T, degree_cap, tol)
    if not D.converged:
        raise ConvergenceError("defect series did not settle")
    basis, roots, sqrt, thr = _psd_factor(D.matrix, domain_tol)
    r = basis.shape[1]
    left = roots[:, None] * basis.conj().T  # r x d, coordinates of Delta^{1/2} in the defect basis
    rows = []
    for k, S in enumerate(word_product_stacks(T, N)):
        Sh = np.conj(np.transpose(S, (0, 2, 1)))
        blk = np.sqrt(wf.bb[k])[:, None, None] * np.einsum("ab,rbc->rac", left, Sh)
        rows.append(blk.reshape(-1, T.dim))
    K = np.concatenate(rows, axis=0) if r else np.zeros((0, T.dim), dtype=complex)
    return BerezinKernel(K, wf.n, N, basis, sqrt, D, thr)


def _aux_kron(A: np.ndarray, r: int) -> np.ndarray:
    return np.kron(A, np.eye(r))


def intertwining_residual(wf: WeightFamily, T: OperatorTuple, bk: BerezinKernel) -> float:
    """``max_i |K T_i^* - (W_i^* (x) I) K|`` over rows of degree below ``N``."""
    r = bk.rank
    if r == 0:
        return 0.0
    W = build_W(wf.at_degree(bk.N) if wf.degree < bk.N else wf, bk.N)
    mask = TruncatedFock(wf.n, bk.N).interior(r)
    worst = 0.0
    for i in range(wf.n):
        lhs = bk.K @ T.mats[i].conj().T
        rhs = _aux_kron(W.mats[i].conj().T, r) @ bk.K
        worst = max(worst, spectral_norm((lhs - rhs)[mask]))
    return worst


def _require_pure(wf, T, degree_cap, tol, pure_tol) -> Classification:
    cls = classify(wf, T, degree_cap, tol, radial_grid=(), pure_tol=pure_tol)
    if not cls.converged:
        raise ConvergenceError("defect series did not settle")
    if not cls.pure:
        raise NotPureError(f"tuple is not pure (residual {cls.pure_residual:.3e})")
    return cls


def model_transfer_check(wf: WeightFamily, T: OperatorTuple, pairs: Sequence[tuple[Word, Word]],
                         N: int | None = None, degree_cap: int | None = None,
                         tol: float = 1e-12, pure_tol: float = 1e-8) -> float:
    """``max |T_alpha T_beta^* - K^*(W_alpha W_beta^* (x) I) K|`` over the given pairs."""
    _require_pure(wf, T, degree_cap, tol, pure_tol)
    bk = berezin_kernel(wf, T, N, degree_cap, tol)
    W = build_W(wf.at_degree(bk.N) if wf.degree < bk.N else wf, bk.N)
    r = bk.rank
    worst = 0.0
    for alpha, beta in pairs:
        lhs = T.word(alpha) @ T.word(beta).conj().T
        mid = _aux_kron(W.word(alpha) @ W.word(beta).conj().T, r)
        rhs = bk.K.conj().T @ mid @ bk.K
        worst = max(worst, spectral_norm(lhs - rhs))
    return worst


@dataclass
class VonNeumannResult:
    norms: list[tuple[float, float]]  # (|p(T, T^*)|, |p(W, W^*)|)
    slack: float

    @property
    def violations(self) -> int:
        return sum(1 for lhs, rhs in self.norms if lhs > rhs + self.slack)


CoefficientSet = Sequence[tuple[Word, Word, complex]]


def evaluate_hereditary(T: OperatorTuple, coeffs: CoefficientSet) -> np.ndarray:
    """``sum d_{alpha,beta} T_alpha T_beta^*``."""
    out = np.zeros((T.dim, T.dim), dtype=complex)
    for alpha, beta, d in coeffs:
        out += d * (T.word(alpha) @ T.word(beta).conj().T)
    return out


def von_neumann_check(wf: WeightFamily, T: OperatorTuple, coefficient_sets: Sequence[CoefficientSet],
                      N: int | None = None, degree_cap: int | None = None, tol: float = 1e-12,
                      pure_tol: float = 1e-8, slack: float = 1e-8) -> VonNeumannResult:
    _require_pure(wf, T, degree_cap, tol, pure_tol)
    N = wf.degree if N is None else N
    W = build_W(wf.at_degree(N) if wf.degree < N else wf, N)
    norms = []
    for cs in coefficient_sets:
        norms.append((spectral_norm(evaluate_hereditary(T, cs)), spectral_norm(evaluate_hereditary(W, cs))))
    return VonNeumannResult(norms, slack)


# -- test-tuple constructions --------------------------------------------


def coinvariant_span(W: OperatorTuple, vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing ``vectors`` and invariant under all ``W_i^*``."""
    adj = W.adjoints()
    basis = _orth(np.asarray(vectors, dtype=complex), tol)
    while True:
        grown = np.concatenate([basis] + [A @ basis for A in adj], axis=1)
        nb = _orth(grown, tol)
        if nb.shape[1] == basis.shape[1]:
            return nb
        basis = nb


def _orth(M: np.ndarray, tol: float) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol * max(1.0, s[0] if s.size else 0.0)]


def coinvariant_compression(W: OperatorTuple, vectors: np.ndarray) -> tuple[OperatorTuple, np.ndarray]:
    """Compression of ``W`` to the co-invariant subspace generated by ``vectors``."""
    B = coinvariant_span(W, vectors)
    return W.compress(B), B
