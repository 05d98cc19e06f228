"""Homogeneous parts, Fejer means, Fourier coefficients and functional calculus.

On the graded space ``F^2_N (x) C^k`` the torus average that defines the
``s``-th homogeneous part of an operator reduces to keeping the blocks that
raise degree by exactly ``s``, so everything here is exact block algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import _require_pure, berezin_kernel, spectral_norm
from .fock import OperatorTuple, TruncatedFock, build_Lambda, build_W
from .series import FreeSeries
from .weights import WeightFamily
from .words import degree_offset


def _degree_grid(fock: TruncatedFock, aux: int) -> np.ndarray:
    deg = np.repeat(fock.degrees(), aux)
    return deg[:, None] - deg[None, :]


def _infer_fock(A: np.ndarray, n: int, aux: int) -> TruncatedFock:
    d = A.shape[0] // aux
    N = 0
    while degree_offset(n, N + 1) < d:
        N += 1
    if degree_offset(n, N + 1) != d or A.shape[0] % aux:
        raise ValueError(f"dimension {A.shape[0]} is not a truncated Fock space over {n} letters")
    return TruncatedFock(n, N)


def homogeneous_part(A: np.ndarray, s: int, n: int, aux: int = 1) -> np.ndarray:
    """``A_s = sum_p Q_{s+p} A Q_p``."""
    fock = _infer_fock(A, n, aux)
    return np.where(_degree_grid(fock, aux) == s, A, 0)


def homogeneous_parts(A: np.ndarray, n: int, aux: int = 1) -> dict[int, np.ndarray]:
    fock = _infer_fock(A, n, aux)
    grid = _degree_grid(fock, aux)
    return {s: np.where(grid == s, A, 0) for s in range(-fock.N, fock.N + 1)}


def cesaro_sum(A: np.ndarray, Np: int, n: int, aux: int = 1) -> np.ndarray:
    """Fejer mean ``sum_{|s| <= N'} (1 - |s|/(N'+1)) A_s``."""
    if Np < 0:
        raise ValueError("N' must be nonnegative")
    fock = _infer_fock(A, n, aux)
    w = np.clip(1.0 - np.abs(_degree_grid(fock, aux)) / (Np + 1.0), 0.0, None)
    return w * A


def analytic_matrix(wf: WeightFamily, coeffs: FreeSeries | np.ndarray, N: int | None = None) -> np.ndarray:
    """``sum_alpha W_alpha (x) C_alpha`` on ``F^2_N (x) C^k``.

    ``coeffs`` is either a scalar series or an array of shape ``(dim, k, k)``
    of operator coefficients in graded-lex order.
    """
    N = wf.degree if N is None else N
    if N > wf.degree:
        wf = wf.at_degree(N)
    n, bb = wf.n, wf.bb
    if isinstance(coeffs, FreeSeries):
        if coeffs.n != n:
            raise ValueError("coefficient series has the wrong generator count")
        C = np.zeros((degree_offset(n, N + 1), 1, 1), dtype=complex)
        flat = coeffs.truncate(min(coeffs.degree, N)).flat
        C[: flat.size, 0, 0] = flat
    else:
        C = np.asarray(coeffs, dtype=complex)
    k = C.shape[1]
    dim = degree_offset(n, N + 1)
    out = np.zeros((dim * k, dim * k), dtype=complex)
    for la in range(N + 1):
        for ra in range(n**la):
            c = C[degree_offset(n, la) + ra] if degree_offset(n, la) + ra < C.shape[0] else None
            if c is None or not np.any(c):
                continue
            for lg in range(N - la + 1):
                m = n**lg
                src = np.arange(m)
                dst = ra * m + src  # lex rank of alpha gamma
                scale = np.sqrt(bb[lg] / bb[la + lg][dst])
                rows = degree_offset(n, la + lg) + dst
                cols = degree_offset(n, lg) + src
                for r, cc, v in zip(rows, cols, scale):
                    out[r * k:(r + 1) * k, cc * k:(cc + 1) * k] += v * c
    return out


def fourier_coefficients(A: np.ndarray, wf: WeightFamily, aux: int = 1) -> FreeSeries | np.ndarray:
    """``c_beta = sqrt(b_beta) <A e_{g_0}, e_beta>`` (block version for ``aux > 1``)."""
    fock = _infer_fock(A, wf.n, aux)
    if fock.N > wf.degree:
        wf = wf.at_degree(fock.N)
    root = np.sqrt(np.concatenate(wf.bb[: fock.N + 1]))
    if aux == 1:
        flat = root * A[:, 0]
        blocks = [flat[fock.block(k)] for k in range(fock.N + 1)]
        return FreeSeries.from_blocks(wf.n, blocks)
    col = A[:, :aux].reshape(fock.dim, aux, aux)
    return root[:, None, None] * col


def commutant_residual(A: np.ndarray, wf: WeightFamily, against: str = "Lambda", aux: int = 1) -> float:
    """``max_i |A X_i - X_i A|`` on degrees below ``N``, ``X`` the right (or left) creation tuple."""
    fock = _infer_fock(A, wf.n, aux)
    X = build_Lambda(wf, fock.N) if against == "Lambda" else build_W(wf, fock.N)
    mask = fock.interior(aux)
    worst = 0.0
    for Xi in X.mats:
        Xk = np.kron(Xi, np.eye(aux))
        R = (A @ Xk - Xk @ A)[np.ix_(mask, mask)]
        worst = max(worst, spectral_norm(R))
    return worst


def functional_calculus(wf: WeightFamily, T: OperatorTuple, phi: FreeSeries | np.ndarray,
                        N: int | None = None, degree_cap: int | None = None,
                        tol: float = 1e-12, pure_tol: float = 1e-8) -> np.ndarray:
    """``K^* (phi(W) (x) I) K`` for a pure tuple ``T``."""
    _require_pure(wf, T, degree_cap, tol, pure_tol)
    bk = berezin_kernel(wf, T, N, degree_cap, tol)
    A = analytic_matrix(wf, phi, bk.N) if isinstance(phi, FreeSeries) else np.asarray(phi, dtype=complex)
    if A.shape[0] != TruncatedFock(wf.n, bk.N).dim:
        raise ValueError("symbol matrix does not live on the kernel's Fock truncation")
    return bk.K.conj().T @ np.kron(A, np.eye(bk.rank)) @ bk.K


def homogeneous_terms(T: OperatorTuple, phi: FreeSeries) -> list[np.ndarray]:
    """``P_s = sum_{|alpha| = s} c_alpha T_alpha`` for ``s = 0..deg phi``."""
    from .domain import word_product_stacks

    out = []
    for s, S in enumerate(word_product_stacks(T, phi.degree)):
        out.append(np.einsum("r,rab->ab", phi.blocks[s], S))
    return out


@dataclass
class CesaroCalculus:
    sequence: list[np.ndarray]  # index N': Fejer mean of the homogeneous expansion
    limit: np.ndarray


def cesaro_calculus(wf: WeightFamily, T: OperatorTuple, phi: FreeSeries, Nmax: int,
                    require_pure: bool = True, pure_tol: float = 1e-8) -> CesaroCalculus:
    """Fejer means of ``sum_s P_s`` and their limit.

    For ``N' >= deg phi`` the mean is ``A - B/(N'+1)`` with fixed ``A, B``,
    so two consecutive means determine the limit ``A`` exactly.
    """
    if require_pure:
        _require_pure(wf, T, None, 1e-12, pure_tol)
    P = homogeneous_terms(T, phi)
    if Nmax < len(P):
        raise ValueError(f"need Nmax >= {len(P)} to extrapolate")
    seq = []
    for Np in range(Nmax + 1):
        acc = np.zeros((T.dim, T.dim), dtype=complex)
        for s in range(min(Np, len(P) - 1) + 1):
            acc += (1.0 - s / (Np + 1.0)) * P[s]
        seq.append(acc)
    limit = (Nmax + 1) * seq[Nmax] - Nmax * seq[Nmax - 1]
    return CesaroCalculus(seq, limit)


def radial_calculus(T: OperatorTuple, phi: FreeSeries, grid: Sequence[float]) -> dict[float, np.ndarray]:
    """``phi(rT) = sum_alpha c_alpha r^{|alpha|} T_alpha`` on a grid of radii."""
    P = homogeneous_terms(T, phi)
    return {float(r): sum(r**s * P[s] for s in range(len(P))) for r in grid}


@dataclass
class CncResult:
    sigma_min: float
    kernel_dim: int
    cnc: bool
    threshold: float


def cnc_check(wf: WeightFamily, T: OperatorTuple, N: int | None = None,
              degree_cap: int | None = None, tol: float = 1e-12, threshold: float = 1e-10) -> CncResult:
    """Injectivity of the Berezin kernel."""
    bk = berezin_kernel(wf, T, N, degree_cap, tol)
    if bk.K.shape[0]:
        s = np.linalg.svd(bk.K, compute_uv=False)
    else:
        s = np.zeros(0)
    s = np.concatenate([s, np.zeros(max(0, T.dim - s.size))])[: T.dim]
    kdim = int(np.sum(s <= threshold))
    return CncResult(float(s.min()) if s.size else 0.0, kdim, kdim == 0, threshold)
