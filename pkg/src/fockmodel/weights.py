"""Weight families ``{b_alpha}`` and certification probes.

Every sup/limsup condition on a weight family quantifies over infinitely
many words.  The probes below evaluate them on the stored truncation only,
and every report says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from . import series as ser
from .series import FreeSeries
from .words import Word

PROBE_STATUS = "probe only, not a proof"

SIGN_TOL = 1e-12
REL_TOL = 1e-10


@dataclass
class WeightFamily:
    """Strictly positive weights ``b`` with ``b_{g_0} = 1``.

    ``kind`` records how the family was built; parametric kinds can be
    re-materialised at any degree and expose exact length profiles.
    """

    b: FreeSeries
    kind: str = "table"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.b.max_abs_imag() > 1e-14:
            raise ValueError("weights must be real")
        if abs(self.b.constant - 1.0) > 1e-14:
            raise ValueError("b at the empty word must equal 1")
        for blk in self.b.blocks:
            if not np.all(np.isfinite(blk.real)):
                raise OverflowError("weights overflow double precision at this degree")
            if np.any(blk.real <= 0):
                raise ValueError("weights must be strictly positive")
        self.b = FreeSeries(self.b.n, self.b.degree, tuple(blk.real.astype(complex) for blk in self.b.blocks))

    @property
    def n(self) -> int:
        return self.b.n

    @property
    def degree(self) -> int:
        return self.b.degree

    @cached_property
    def bb(self) -> list[np.ndarray]:
        """Real weight blocks per degree."""
        return [blk.real.copy() for blk in self.b.blocks]

    @cached_property
    def a(self) -> FreeSeries:
        """Inverse coefficients, i.e. the coefficients of ``g^{-1}``."""
        return ser.invert(self.b)

    @cached_property
    def aa(self) -> list[np.ndarray]:
        return [blk.real.copy() for blk in self.a.blocks]

    @property
    def b_flat(self) -> np.ndarray:
        return np.concatenate(self.bb)

    def weight(self, w: Word) -> float:
        return self.b[w].real

    def inverse_coefficient(self, w: Word) -> float:
        return self.a[w].real

    def at_degree(self, N: int) -> WeightFamily:
        if N <= self.degree:
            return WeightFamily(self.b.truncate(N), self.kind, dict(self.params))
        if self.kind == "bergman":
            return bergman_weights(self.n, self.params["s"], N)
        if self.kind == "dirichlet":
            return dirichlet_weights(self.n, self.params["s"], N)
        if self.kind == "psi":
            return psi_weights(self.params["phi"], self.params["s"], N)
        raise ValueError(f"a tabulated family of degree {self.degree} cannot be extended to {N}")

    def radial_profile(self, kmax: int) -> tuple[np.ndarray, np.ndarray] | None:
        """Length profiles ``(b_k, a_k)`` for ``k <= kmax`` if the weights depend on length only."""
        if self.kind == "bergman":
            # closed form avoids the cancellation in the convolution recursion at high degree
            s = self.params["s"]
            b = np.array([ser.real_binomial(s + k - 1, k) for k in range(kmax + 1)])
            a = np.array([(-1) ** k * ser.real_binomial(s, k) for k in range(kmax + 1)])
            if not np.all(np.isfinite(b)):
                raise OverflowError("length profile overflows double precision")
            return b, a
        if self.kind == "dirichlet":
            s = self.params["s"]
            b = np.array([(k + 1.0) ** s for k in range(kmax + 1)])
        else:
            if kmax > self.degree or not self.is_radial():
                return None
            b = np.array([blk[0] for blk in self.bb[: kmax + 1]])
        if not np.all(np.isfinite(b)):
            raise OverflowError("length profile overflows double precision")
        return b, ser.radial_inverse(b)

    def is_radial(self) -> bool:
        return all(np.all(blk == blk[0]) for blk in self.bb)

    # residuals of the two convolution identities
    def inverse_residuals(self) -> tuple[float, float]:
        left = ser.multiply(self.a, self.b) - FreeSeries.one(self.n, self.degree)
        right = ser.multiply(self.b, self.a) - FreeSeries.one(self.n, self.degree)
        scale = max(float(np.max(np.abs(blk))) for blk in self.bb)
        return (
            max(float(np.max(np.abs(blk))) for blk in left.blocks) / scale,
            max(float(np.max(np.abs(blk))) for blk in right.blocks) / scale,
        )

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "n": self.n, "degree": self.degree}
        if "s" in self.params:
            out["s"] = self.params["s"]
        if "phi" in self.params:
            out["phi"] = self.params["phi"].to_json()
        if self.kind == "table":
            out["b"] = self.b.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> WeightFamily:
        kind = data["kind"]
        n, N = int(data["n"]), int(data["degree"])
        if kind == "bergman":
            return bergman_weights(n, float(data["s"]), N)
        if kind == "dirichlet":
            return dirichlet_weights(n, float(data["s"]), N)
        if kind == "psi":
            return psi_weights(FreeSeries.from_json(data["phi"]), float(data["s"]), N)
        if kind == "table":
            b = FreeSeries.from_json(data["b"])
            if b.degree < N:
                raise ValueError("table weights shorter than the declared degree")
            return cls(b.truncate(N), "table")
        raise ValueError(f"unknown weight kind {kind!r}")


def bergman_weights(n: int, s: float, N: int) -> WeightFamily:
    """``b_alpha = binom(s + |alpha| - 1, |alpha|)``."""
    if s <= 0:
        raise ValueError("the Bergman scale needs s > 0")
    prof = [ser.real_binomial(s + k - 1, k) for k in range(N + 1)]
    return WeightFamily(FreeSeries.from_radial(n, prof), "bergman", {"s": float(s)})


def dirichlet_weights(n: int, s: float, N: int) -> WeightFamily:
    """``b_alpha = (|alpha| + 1)^s``."""
    prof = [(k + 1.0) ** s for k in range(N + 1)]
    return WeightFamily(FreeSeries.from_radial(n, prof), "dirichlet", {"s": float(s)})


def table_weights(b: FreeSeries) -> WeightFamily:
    return WeightFamily(b, "table")


def psi_weights(phi: FreeSeries, s: float, N: int) -> WeightFamily:
    """Weights of ``(1 - phi)^(-s)`` for ``phi`` with nonnegative coefficients.

    The ratio bounds ``b_alpha / b_{g_i alpha} <= 1/d_{g_i}`` (and the right
    analogue) are re-checked on the truncation; a violation raises.
    """
    if s < 1:
        raise ValueError("psi weights need s >= 1")
    if phi.max_abs_imag() > 0:
        raise ValueError("phi must have real coefficients")
    if abs(phi.constant) > 0:
        raise ValueError("phi must have zero constant term")
    if any(np.any(blk.real < 0) for blk in phi.blocks):
        raise ValueError("phi must have nonnegative coefficients")
    d1 = phi.blocks[1].real if phi.degree >= 1 else np.zeros(phi.n)
    if np.any(d1 <= 0):
        raise ValueError("phi needs a strictly positive coefficient on every generator")
    if phi.degree < N:
        phi_N = FreeSeries.from_blocks(phi.n, list(phi.blocks) + [np.zeros(phi.n**k) for k in range(phi.degree + 1, N + 1)])
    else:
        phi_N = phi.truncate(N)
    b = ser.neg_power_one_minus(phi_N, s)
    wf = WeightFamily(b, "psi", {"s": float(s), "phi": phi})
    excess = psi_ratio_excess(wf, d1)
    if excess > 1e-12:
        raise ArithmeticError(f"ratio bound violated by {excess:.3e}")
    return wf


def psi_ratio_excess(wf: WeightFamily, d1: np.ndarray) -> float:
    """Largest ``b_alpha/b_{g_i alpha} - 1/d_{g_i}`` (left and right) on the truncation."""
    left, right = _ratio_tables(wf)
    worst = -np.inf
    for i in range(wf.n):
        bound = 1.0 / d1[i]
        for k in range(len(left)):
            worst = max(worst, float(np.max(left[k][i])) - bound, float(np.max(right[k][i])) - bound)
    return worst


# -- probes ---------------------------------------------------------------


def _ratio_tables(wf: WeightFamily):
    """Per degree ``k < N``: arrays ``[i, alpha]`` of ``b_alpha/b_{g_i alpha}`` and ``b_alpha/b_{alpha g_i}``."""
    n, bb = wf.n, wf.bb
    left, right = [], []
    for k in range(wf.degree):
        nxt = bb[k + 1]
        left.append(bb[k][None, :] / nxt.reshape(n, n**k))
        right.append(bb[k][None, :] / nxt.reshape(n**k, n).T)
    return left, right


def ratio_sups(wf: WeightFamily) -> tuple[np.ndarray, np.ndarray]:
    """Probed ``sup b_alpha/b_{g_i alpha}`` and ``sup b_alpha/b_{alpha g_i}`` per generator."""
    left, right = _ratio_tables(wf)
    if not left:
        return np.full(wf.n, np.nan), np.full(wf.n, np.nan)
    L = np.max(np.stack([t.max(axis=1) for t in left]), axis=0)
    R = np.max(np.stack([t.max(axis=1) for t in right]), axis=0)
    return L, R


@dataclass
class RadiusProbe:
    terms: np.ndarray  # index k-1 holds (sum_{|alpha|=k} b^2)^{1/2k}
    monotone: str
    status: str = PROBE_STATUS


def _trend(x: np.ndarray, tol: float = 1e-12) -> str:
    if len(x) < 2:
        return "undetermined"
    d = np.diff(x)
    if np.all(d <= tol):
        return "nonincreasing"
    if np.all(d >= -tol):
        return "nondecreasing"
    return "mixed"


def radius_probe(wf: WeightFamily) -> RadiusProbe:
    terms = np.array([np.sum(wf.bb[k] ** 2) ** (1.0 / (2 * k)) for k in range(1, wf.degree + 1)])
    return RadiusProbe(terms, _trend(terms))


def _partial_convolution(wf: WeightFamily, k: int, m_lo: int, m_hi: int) -> np.ndarray:
    """``sum_{beta gamma = alpha, m_lo <= |beta| <= m_hi} a_beta b_gamma / b_alpha`` for ``|alpha| = k``."""
    acc = np.zeros(wf.n**k)
    for m in range(max(m_lo, 0), min(m_hi, k) + 1):
        acc += np.kron(wf.aa[m], wf.bb[k - m])
    return acc / wf.bb[k]


def abb_sup(wf: WeightFamily, cap_beta: int, cap_alpha: int) -> dict[int, float]:
    """Table ``N' -> sup_{|alpha| <= cap_alpha} |sum_{|beta| <= N'} a_beta b_gamma / b_alpha|``."""
    if not 0 <= cap_beta <= cap_alpha <= wf.degree:
        raise ValueError("need 0 <= cap_beta <= cap_alpha <= degree")
    table = {}
    for Np in range(cap_beta + 1):
        table[Np] = max(
            float(np.max(np.abs(_partial_convolution(wf, k, 0, Np)))) for k in range(cap_alpha + 1)
        )
    return table


def tail_sup(wf: WeightFamily, q: int, Np: int) -> float:
    """``sup_{q <= |alpha| <= N} |sum_{q <= |beta| <= N'} a_beta b_gamma / b_alpha|``."""
    if not 0 <= q <= Np <= wf.degree:
        raise ValueError("need q <= N' <= degree")
    return max(float(np.max(np.abs(_partial_convolution(wf, k, q, Np)))) for k in range(q, wf.degree + 1))


@dataclass
class Summability:
    max_terms: np.ndarray  # index j-1: max |a_alpha| over |alpha| = j
    partial_sums: np.ndarray
    b_ratio_sup: float  # sup b_gamma / b_{beta gamma}
    status: str = PROBE_STATUS


def ex_summability(wf: WeightFamily) -> Summability:
    terms = np.array([np.max(np.abs(wf.aa[j])) for j in range(1, wf.degree + 1)])
    n, bb = wf.n, wf.bb
    sup = 1.0
    for k in range(1, wf.degree + 1):
        for m in range(1, k + 1):
            sup = max(sup, float(np.max(bb[k - m][None, :] / bb[k].reshape(n**m, n ** (k - m)))))
    return Summability(terms, np.cumsum(terms), sup)


@dataclass
class Verdict:
    passed: bool
    tolerance: float
    witness: Any = None
    detail: dict[str, Any] = field(default_factory=dict)
    status: str = PROBE_STATUS

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, dict):
            w = {k: (list(v) if isinstance(v, tuple) else v) for k, v in w.items()}
        return {"passed": bool(self.passed), "tolerance": self.tolerance, "witness": w,
                "detail": self.detail, "status": self.status}


def submultiplicative_excess(wf: WeightFamily) -> tuple[float, tuple[Word, Word] | None]:
    """Largest relative excess of ``b_alpha b_beta`` over ``b_{alpha beta}``."""
    n, bb = wf.n, wf.bb
    worst, where = -np.inf, None
    for k in range(wf.degree + 1):
        for m in range(k + 1):
            whole = bb[k].reshape(n**m, n ** (k - m))
            ex = np.outer(bb[m], bb[k - m]) / whole - 1.0
            idx = np.unravel_index(np.argmax(ex), ex.shape)
            if ex[idx] > worst:
                worst = float(ex[idx])
                where = (_word_at(n, m, idx[0]), _word_at(n, k - m, idx[1]))
    return worst, where


def _word_at(n: int, k: int, r: int) -> Word:
    letters = []
    for _ in range(k):
        r, d = divmod(int(r), n)
        letters.append(d + 1)
    return tuple(reversed(letters))


def regularity_check(wf: WeightFamily, tol: float = SIGN_TOL, rel_tol: float = REL_TOL) -> Verdict:
    """Regular domain test: ``a_{g_i} < 0`` and ``a_alpha <= 0`` for ``|alpha| >= 1``."""
    if wf.degree < 1:
        return Verdict(False, tol, detail={"reason": "truncation too short"})
    first = wf.aa[1]
    if np.any(first >= 0):
        i = int(np.argmax(first >= 0))
        return Verdict(False, tol, {"word": (i + 1,), "a": float(first[i])})
    for k in range(1, wf.degree + 1):
        bad = np.nonzero(wf.aa[k] > tol)[0]
        if bad.size:
            w = _word_at(wf.n, k, bad[0])
            return Verdict(False, tol, {"word": w, "a": float(wf.aa[k][bad[0]])})
    excess, where = submultiplicative_excess(wf)
    return Verdict(True, tol, detail={
        "submultiplicative": bool(excess <= rel_tol),
        "submultiplicative_excess": excess,
        "submultiplicative_worst_pair": [list(w) for w in where] if where else None,
        "relative_tolerance": rel_tol,
    })


def subcn_check(wf: WeightFamily, tol: float = SIGN_TOL) -> Verdict:
    """Ratio condition ``b_{beta g_i}/b_{g_j beta g_i} <= b_beta/b_{g_j beta}`` on ``|beta| <= N-2``."""
    n, bb = wf.n, wf.bb
    worst = -np.inf
    for k in range(wf.degree - 1):
        lhs = bb[k + 1].reshape(1, n**k, n) / bb[k + 2].reshape(n, n**k, n)
        rhs = bb[k][None, :] / bb[k + 1].reshape(n, n**k)
        gap = lhs - rhs[:, :, None]
        worst = max(worst, float(gap.max()))
        if gap.max() > tol:
            j, beta, i = np.unravel_index(np.argmax(gap), gap.shape)
            return Verdict(False, tol, {
                "beta": _word_at(n, k, beta), "i": int(i) + 1, "j": int(j) + 1, "excess": float(gap.max()),
            })
    return Verdict(True, tol, detail={"max_gap": worst})


@dataclass
class SignPattern:
    n0: int | None  # None means no settled sign within the truncation
    sign: str | None  # "nonnegative", "nonpositive" or "zero"
    status: str = PROBE_STATUS


def sign_pattern_check(wf: WeightFamily, tol: float = SIGN_TOL) -> SignPattern:
    """Smallest ``d >= 2`` from which every ``a_alpha`` up to ``N`` has one sign.

    The window ``[d, N]`` must span at least two degrees, otherwise a single
    top degree would certify any pattern.
    """
    aa = wf.aa
    for d in range(2, wf.degree):
        tail = np.concatenate(aa[d:])
        nonneg = bool(np.all(tail >= -tol))
        nonpos = bool(np.all(tail <= tol))
        if nonneg and nonpos:
            return SignPattern(d, "zero")
        if nonneg:
            return SignPattern(d, "nonnegative")
        if nonpos:
            return SignPattern(d, "nonpositive")
    return SignPattern(None, None)


@dataclass
class DecayProbe:
    per_degree: np.ndarray  # index k: max over |gamma| = k, all p
    values: list[np.ndarray]  # index k: array [p, gamma]
    trend: str
    status: str = PROBE_STATUS


def diagonal_decay_probe(wf: WeightFamily, i: int) -> DecayProbe:
    """Values ``b_{g_p gamma}/b_{g_i g_p gamma} - b_gamma/b_{g_p gamma}`` grouped by ``|gamma|``."""
    if not 1 <= i <= wf.n:
        raise ValueError("generator index out of range")
    n, bb = wf.n, wf.bb
    vals = []
    for k in range(wf.degree - 1):
        b1 = bb[k + 1].reshape(n, n**k)
        b2 = bb[k + 2].reshape(n, n ** (k + 1))[i - 1].reshape(n, n**k)
        vals.append(b1 / b2 - bb[k][None, :] / b1)
    per = np.array([np.max(np.abs(v)) for v in vals])
    return DecayProbe(per, vals, _trend(per))


@dataclass
class AdmissibilityReport:
    ratio_sup_left: np.ndarray
    ratio_sup_right: np.ndarray
    radius_sequence: np.ndarray
    abb_sup_table: dict[int, float]
    tail_sup_table: dict[tuple[int, int], float]
    ex_summability: Summability
    regularity: Verdict
    subcn: Verdict
    sign_pattern: SignPattern
    inverse_residuals: tuple[float, float]
    status: str = PROBE_STATUS

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "ratio_sup_left": self.ratio_sup_left.tolist(),
            "ratio_sup_right": self.ratio_sup_right.tolist(),
            "radius_sequence": self.radius_sequence.tolist(),
            "abb_sup_table": {str(k): v for k, v in self.abb_sup_table.items()},
            "tail_sup_table": [{"q": q, "N": Np, "sup": v} for (q, Np), v in self.tail_sup_table.items()],
            "ex_summability": {
                "max_terms": self.ex_summability.max_terms.tolist(),
                "partial_sums": self.ex_summability.partial_sums.tolist(),
                "b_ratio_sup": self.ex_summability.b_ratio_sup,
            },
            "regularity": self.regularity.to_json(),
            "subcn": self.subcn.to_json(),
            "sign_pattern": {"N0": self.sign_pattern.n0, "sign": self.sign_pattern.sign},
            "inverse_residuals": {"sum1": self.inverse_residuals[0], "sum2": self.inverse_residuals[1]},
        }


def admissibility_report(wf: WeightFamily, cap_beta: int | None = None, tol: float = SIGN_TOL) -> AdmissibilityReport:
    N = wf.degree
    cap_beta = min(N, 2) if cap_beta is None else cap_beta
    L, R = ratio_sups(wf)
    tails = {}
    for q in range(1, N + 1):
        tails[(q, N)] = tail_sup(wf, q, N)
    return AdmissibilityReport(
        ratio_sup_left=L,
        ratio_sup_right=R,
        radius_sequence=radius_probe(wf).terms,
        abb_sup_table=abb_sup(wf, cap_beta, N),
        tail_sup_table=tails,
        ex_summability=ex_summability(wf),
        regularity=regularity_check(wf, tol),
        subcn=subcn_check(wf, tol),
        sign_pattern=sign_pattern_check(wf, tol),
        inverse_residuals=wf.inverse_residuals(),
    )

