"""Geometric Wold decomposition of finite tuples.

``K^(0) = range K^*`` carries the pure part and ``K^(1) = ker K`` the Cuntz
part, where ``K`` is the Berezin kernel.  The split is only attempted when
``K^* K`` is a projection; that gate stands in for the tuple coming from a
representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import berezin_kernel, classify, defect, spectral_norm, word_product_stacks
from .errors import GateError
from .fock import OperatorTuple, matrix_to_json
from .weights import WeightFamily
from .words import Word, words_up_to

SVD_THRESHOLD = 1e-8
SVD_FLOOR = 1e-12  # singular values below this are zero whatever the scale
SCHEMA_VERSION = 1


def _split(M: np.ndarray, d: int, threshold: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal bases of ``range M^*`` and ``ker M`` (both in ``C^d``) plus the singular values."""
    if M.shape[0] == 0:
        return np.zeros((d, 0), dtype=complex), np.eye(d, dtype=complex), np.zeros(0)
    _, s, Vh = np.linalg.svd(M)
    cut = max(threshold * s.max(), SVD_FLOOR) if s.size else np.inf
    r = int(np.sum(s > cut))
    V = Vh.conj().T
    return V[:, :r], V[:, r:], s


def _projector(B: np.ndarray) -> np.ndarray:
    return B @ B.conj().T


def _gate(wf: WeightFamily, V: OperatorTuple, N, degree_cap, tol, series_tol):
    bk = berezin_kernel(wf, V, N, degree_cap, series_tol)
    G = bk.K.conj().T @ bk.K
    res = spectral_norm(G @ G - G)
    if res > tol:
        raise GateError(f"not representation-type: |(K*K)^2 - K*K| = {res:.3e} > {tol:.1e}")
    return bk, res


@dataclass
class WoldDecomposition:
    k0: np.ndarray  # orthonormal basis columns of K^(0)
    k1: np.ndarray
    pure_part: OperatorTuple | None
    cuntz_part: OperatorTuple | None
    wandering: np.ndarray
    singular_values: np.ndarray
    threshold: float
    residuals: dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-8

    @property
    def dims(self) -> tuple[int, int]:
        return self.k0.shape[1], self.k1.shape[1]

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.residuals.values())

    def to_json(self, include_bases: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "dims": {"k0": self.dims[0], "k1": self.dims[1], "wandering": int(self.wandering.shape[1])},
            "residuals": dict(self.residuals),
            "tolerance": self.tolerance,
            "threshold": self.threshold,
            "singular_values": [float(x) for x in self.singular_values],
            "passed": self.passed,
        }
        if include_bases:
            out["bases"] = {"k0": matrix_to_json(self.k0), "k1": matrix_to_json(self.k1),
                            "wandering": matrix_to_json(self.wandering)}
        return out


def wandering_space(wf: WeightFamily, V: OperatorTuple, N: int | None = None,
                    degree_cap: int | None = None, tol: float = 1e-8,
                    threshold: float = SVD_THRESHOLD, series_tol: float = 1e-12) -> np.ndarray:
    """Basis of ``D``, the orthogonal complement of ``sum_i range V_i``."""
    _gate(wf, V, N, degree_cap, tol, series_tol)
    return _wandering(V, threshold)


def _wandering(V: OperatorTuple, threshold: float) -> np.ndarray:
    stacked = np.concatenate(list(V.mats), axis=1)  # d x nd, range = sum of ranges
    _, cokernel, _ = _split(stacked.conj().T, V.dim, threshold)
    return cokernel


def k1_characterization(wf: WeightFamily, V: OperatorTuple, cap: int | None = None,
                        degree_cap: int | None = None, tol: float = 1e-8,
                        threshold: float = SVD_THRESHOLD, series_tol: float = 1e-12) -> np.ndarray:
    """Joint kernel of ``Delta V_alpha^*`` over ``|alpha| <= cap``."""
    _gate(wf, V, None, degree_cap, tol, series_tol)
    return _joint_kernel(wf, V, wf.degree if cap is None else cap, degree_cap, series_tol, threshold)


def _joint_kernel(wf, V, cap, degree_cap, series_tol, threshold) -> np.ndarray:
    D = defect(wf, V, degree_cap, series_tol).matrix
    blocks = []
    for S in word_product_stacks(V, cap):
        Sh = np.conj(np.transpose(S, (0, 2, 1)))
        blocks.append(np.einsum("ab,rbc->rac", D, Sh).reshape(-1, V.dim))
    _, ker, _ = _split(np.concatenate(blocks, axis=0), V.dim, threshold)
    return ker


@dataclass
class K0Expansion:
    words: list[Word]
    subspaces: list[np.ndarray]  # orthonormal bases of V_alpha D
    orthogonality: float  # max |P_alpha P_beta|, alpha != beta
    span_residual: float  # |P_span - P_0|


def k0_orthogonal_expansion(wf: WeightFamily, V: OperatorTuple, cap: int | None = None,
                            degree_cap: int | None = None, tol: float = 1e-8,
                            threshold: float = SVD_THRESHOLD, series_tol: float = 1e-12) -> K0Expansion:
    """``V_alpha D`` for ``|alpha| <= cap``, with orthogonality and spanning residuals."""
    bk, _ = _gate(wf, V, None, degree_cap, tol, series_tol)
    cap = wf.degree if cap is None else cap
    Dw = _wandering(V, threshold)
    k0, _, _ = _split(bk.K, V.dim, threshold)
    words, subs = [], []
    if Dw.shape[1]:
        for w in words_up_to(V.n, cap):
            M = V.word(w) @ Dw
            if np.linalg.norm(M) <= threshold:
                continue
            B, _, _ = _split(M.conj().T, V.dim, threshold)
            words.append(w)
            subs.append(B)
    ortho = 0.0
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            ortho = max(ortho, spectral_norm(subs[i].conj().T @ subs[j]))
    if subs:
        span, _, _ = _split(np.concatenate(subs, axis=1).conj().T, V.dim, threshold)
    else:
        span = np.zeros((V.dim, 0), dtype=complex)
    span_res = spectral_norm(_projector(span) - _projector(k0))
    return K0Expansion(words, subs, ortho, span_res)


def wold_decompose(wf: WeightFamily, V: OperatorTuple, N: int | None = None,
                   degree_cap: int | None = None, tol: float = 1e-8,
                   threshold: float = SVD_THRESHOLD, series_tol: float = 1e-12,
                   k1_cap: int | None = None) -> WoldDecomposition:
    bk, gate_res = _gate(wf, V, N, degree_cap, tol, series_tol)
    k0, k1, s = _split(bk.K, V.dim, threshold)
    P0 = _projector(k0)
    reducing = max(spectral_norm(P0 @ Vi - Vi @ P0) for Vi in V.mats)
    pure_part = V.compress(k0) if k0.shape[1] else None
    cuntz_part = V.compress(k1) if k1.shape[1] else None
    pure_res = cuntz_res = 0.0
    if pure_part is not None:
        c = classify(wf, pure_part, degree_cap, series_tol, radial_grid=())
        pure_res = c.pure_residual if c.converged else np.inf
    if cuntz_part is not None:
        D1 = defect(wf, cuntz_part, degree_cap, series_tol)
        cuntz_res = D1.norm if D1.converged else np.inf
    cap = bk.N if k1_cap is None else k1_cap
    k1_alt = _joint_kernel(wf, V, cap, degree_cap, series_tol, threshold)
    cross = spectral_norm(_projector(k1_alt) - _projector(k1))
    residuals = {
        "projection_defect": gate_res,
        "reducing": reducing,
        "pure_on_k0": pure_res,
        "cuntz_on_k1": cuntz_res,
        "k1_cross_method": cross,
    }
    return WoldDecomposition(k0, k1, pure_part, cuntz_part, _wandering(V, threshold),
                             s, threshold, residuals, tol)
