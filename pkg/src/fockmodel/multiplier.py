"""Weighted series space, left/right multiplications and multiplier symbols.

Two coordinate systems are used for ``F^2(g) (x) C^e``:

* ``"Z"``: coefficients of the monomials ``Z_alpha``; the inner product has
  Gram matrix ``diag(1/b)``.  Left/right multiplications are plain shifts.
* ``"orthonormal"``: coefficients against ``sqrt(b_alpha) Z_alpha``.  This is
  the default; inner products are Euclidean and ``U_g`` becomes the identity
  on coordinates.

Matrices act on vectors ordered word-major: index ``alpha * e + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .domain import spectral_norm
from .errors import NotMultiAnalyticError
from .fock import TruncatedFock, build_Lambda, build_W, matrix_to_json
from .weights import WeightFamily
from .words import Word, degree_offset, index_word, word_index


def _root_b(wf: WeightFamily, N: int) -> np.ndarray:
    if N > wf.degree:
        wf = wf.at_degree(N)
    return np.sqrt(np.concatenate(wf.bb[: N + 1]))


def u_g(wf: WeightFamily, N: int | None = None) -> np.ndarray:
    """``U_g e_alpha = sqrt(b_alpha) Z_alpha``, as a map from Fock coordinates to Z-coefficients."""
    N = wf.degree if N is None else N
    return np.diag(_root_b(wf, N)).astype(complex)


def gram_matrix(wf: WeightFamily, N: int | None = None) -> np.ndarray:
    """Gram matrix of the monomials: ``<Z_alpha, Z_beta>_g = delta / b_alpha``."""
    N = wf.degree if N is None else N
    return np.diag(1.0 / _root_b(wf, N) ** 2)


def u_g_adjoint(wf: WeightFamily, N: int | None = None) -> np.ndarray:
    """Hilbert-space adjoint ``U_g^* = U^H G``."""
    U = u_g(wf, N)
    return U.conj().T @ gram_matrix(wf, N)


def unitarity_residual(wf: WeightFamily, N: int | None = None) -> float:
    """``max(|U^* U - I|, |U U^* - I|)`` with the adjoint taken in the weighted inner product."""
    U, Us = u_g(wf, N), u_g_adjoint(wf, N)
    I = np.eye(U.shape[0])
    return max(np.abs(Us @ U - I).max(), np.abs(U @ Us - I).max())


def build_L(wf: WeightFamily, N: int | None = None, basis: str = "orthonormal") -> list[np.ndarray]:
    """``L_{Z_i} zeta = Z_i zeta``."""
    N = wf.degree if N is None else N
    if basis == "orthonormal":
        return list(build_W(wf, N).mats)
    if basis == "Z":
        U = u_g(wf, N)
        Ui = np.diag(1.0 / np.diag(U))
        return [U @ Wi @ Ui for Wi in build_W(wf, N).mats]
    raise ValueError(f"unknown basis {basis!r}")


def build_R(wf: WeightFamily, N: int | None = None, basis: str = "orthonormal") -> list[np.ndarray]:
    """``R_{Z_i} zeta = zeta Z_i``."""
    N = wf.degree if N is None else N
    if basis == "orthonormal":
        return list(build_Lambda(wf, N).mats)
    if basis == "Z":
        U = u_g(wf, N)
        Ui = np.diag(1.0 / np.diag(U))
        return [U @ Li @ Ui for Li in build_Lambda(wf, N).mats]
    raise ValueError(f"unknown basis {basis!r}")


@dataclass(frozen=True)
class MultiplierSymbol:
    """``phi = sum_alpha Z_alpha (x) A_alpha`` with ``A_alpha : C^{e1} -> C^{e2}``."""

    n: int
    degree: int
    coeffs: np.ndarray  # shape (dim, e2, e1), graded-lex order

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != degree_offset(self.n, self.degree + 1):
            raise ValueError("symbol coefficients must have shape (dim, e2, e1)")
        object.__setattr__(self, "coeffs", c)

    @property
    def e1(self) -> int:
        return self.coeffs.shape[2]

    @property
    def e2(self) -> int:
        return self.coeffs.shape[1]

    def __getitem__(self, w: Word) -> np.ndarray:
        if len(w) > self.degree:
            return np.zeros((self.e2, self.e1), dtype=complex)
        return self.coeffs[word_index(tuple(w), self.n)]

    @classmethod
    def from_terms(cls, n: int, degree: int, terms: Mapping[Word, np.ndarray], e1: int, e2: int) -> MultiplierSymbol:
        c = np.zeros((degree_offset(n, degree + 1), e2, e1), dtype=complex)
        for w, A in terms.items():
            if len(w) > degree:
                raise ValueError(f"word {w} beyond degree {degree}")
            c[word_index(tuple(w), n)] = np.asarray(A, dtype=complex).reshape(e2, e1)
        return cls(n, degree, c)

    @classmethod
    def identity(cls, n: int, degree: int, e: int) -> MultiplierSymbol:
        return cls.from_terms(n, degree, {(): np.eye(e)}, e, e)

    def max_abs_diff(self, other: MultiplierSymbol) -> float:
        d = min(self.degree, other.degree)
        m = degree_offset(self.n, d + 1)
        return float(np.abs(self.coeffs[:m] - other.coeffs[:m]).max())

    def to_json(self) -> dict:
        terms = []
        for i, A in enumerate(self.coeffs):
            if np.any(A):
                terms.append({"word": list(index_word(i, self.n)), "matrix": matrix_to_json(A)})
        return {"n": self.n, "degree": self.degree, "e1": self.e1, "e2": self.e2, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> MultiplierSymbol:
        n, deg, e1, e2 = (int(data[k]) for k in ("n", "degree", "e1", "e2"))
        terms = {}
        for t in data["terms"]:
            rows = t["matrix"]["rows"]
            A = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
            terms[tuple(t["word"])] = A
        return cls.from_terms(n, deg, terms, e1, e2)


def _convolution_matrix(phi: MultiplierSymbol, N: int, side: str) -> np.ndarray:
    """Z-coordinate matrix of ``zeta -> zeta phi`` (``side="right"``) or ``phi zeta``."""
    n, e1, e2 = phi.n, phi.e1, phi.e2
    dim = degree_offset(n, N + 1)
    out = np.zeros((dim * e2, dim * e1), dtype=complex)
    for la in range(min(phi.degree, N) + 1):
        for ra in range(n**la):
            A = phi.coeffs[degree_offset(n, la) + ra]
            if not np.any(A):
                continue
            for lb in range(N - la + 1):
                m = n**lb
                src = np.arange(m)
                dst = src * n**la + ra if side == "right" else ra * m + src
                rows = degree_offset(n, la + lb) + dst
                cols = degree_offset(n, lb) + src
                for r, c in zip(rows, cols):
                    out[r * e2:(r + 1) * e2, c * e1:(c + 1) * e1] += A
    return out


def apply_right_multiplier(phi: MultiplierSymbol, zeta: np.ndarray, N: int | None = None) -> np.ndarray:
    """``zeta phi`` in Z-coordinates; ``zeta`` has shape ``(dim, e1)``, result ``(dim, e2)``."""
    zeta = np.asarray(zeta, dtype=complex)
    N = _degree_of_rows(zeta.shape[0], phi.n) if N is None else N
    if zeta.ndim != 2 or zeta.shape[1] != phi.e1:
        raise ValueError(f"vector must have shape (dim, {phi.e1})")
    return (_convolution_matrix(phi, N, "right") @ zeta.reshape(-1)).reshape(-1, phi.e2)


def apply_left_multiplier(phi: MultiplierSymbol, zeta: np.ndarray, N: int | None = None) -> np.ndarray:
    """``phi zeta`` in Z-coordinates."""
    zeta = np.asarray(zeta, dtype=complex)
    N = _degree_of_rows(zeta.shape[0], phi.n) if N is None else N
    if zeta.ndim != 2 or zeta.shape[1] != phi.e1:
        raise ValueError(f"vector must have shape (dim, {phi.e1})")
    return (_convolution_matrix(phi, N, "left") @ zeta.reshape(-1)).reshape(-1, phi.e2)


def _degree_of_rows(d: int, n: int) -> int:
    N = 0
    while degree_offset(n, N + 1) < d:
        N += 1
    if degree_offset(n, N + 1) != d:
        raise ValueError(f"{d} rows is not a truncated Fock dimension over {n} letters")
    return N


def _orthonormal(C: np.ndarray, g: WeightFamily, f: WeightFamily, N: int, e1: int, e2: int) -> np.ndarray:
    Dg = np.repeat(_root_b(g, N), e1)
    Df = np.repeat(_root_b(f, N), e2)
    return (C * Dg[None, :]) / Df[:, None]


def right_multiplier_matrix(phi: MultiplierSymbol, g: WeightFamily, f: WeightFamily,
                            N: int | None = None, basis: str = "orthonormal") -> np.ndarray:
    """``R_phi : F^2(g) (x) C^{e1} -> F^2(f) (x) C^{e2}``."""
    N = min(g.degree, f.degree) if N is None else N
    C = _convolution_matrix(phi, N, "right")
    if basis == "Z":
        return C
    return _orthonormal(C, g, f, N, phi.e1, phi.e2)


def left_multiplier_matrix(phi: MultiplierSymbol, g: WeightFamily, f: WeightFamily,
                           N: int | None = None, basis: str = "orthonormal") -> np.ndarray:
    N = min(g.degree, f.degree) if N is None else N
    C = _convolution_matrix(phi, N, "left")
    if basis == "Z":
        return C
    return _orthonormal(C, g, f, N, phi.e1, phi.e2)


def intertwining_residual(X: np.ndarray, g: WeightFamily, f: WeightFamily, N: int,
                          e1: int, e2: int, side: str = "left") -> float:
    """``max_i |X (S_i^g (x) I) - (S_i^f (x) I) X|`` on degrees below ``N``.

    ``S`` is the left multiplication tuple (``side="left"``) or the right one.
    """
    build = build_W if side == "left" else build_Lambda
    Sg, Sf = build(g, N).mats, build(f, N).mats
    fock = TruncatedFock(g.n, N)
    rmask, cmask = fock.interior(e2), fock.interior(e1)
    worst = 0.0
    for A, B in zip(Sg, Sf):
        R = X @ np.kron(A, np.eye(e1)) - np.kron(B, np.eye(e2)) @ X
        worst = max(worst, spectral_norm(R[np.ix_(rmask, cmask)]))
    return worst


def symbol_from_commutant(X: np.ndarray, g: WeightFamily, f: WeightFamily, e1: int, e2: int,
                          N: int | None = None, tol: float = 1e-10) -> tuple[MultiplierSymbol, float]:
    """Recover ``phi`` with ``X = R_phi`` from an operator intertwining the left multiplications.

    ``X`` is in orthonormal coordinates.  Returns the symbol and
    ``|X - R_phi|`` on interior degrees.
    """
    X = np.asarray(X, dtype=complex)
    N = min(g.degree, f.degree) if N is None else N
    fock = TruncatedFock(g.n, N)
    if X.shape != (fock.dim * e2, fock.dim * e1):
        raise ValueError(f"expected a {fock.dim * e2} x {fock.dim * e1} matrix")
    res = intertwining_residual(X, g, f, N, e1, e2, "left")
    if res > tol:
        raise NotMultiAnalyticError(f"intertwining residual {res:.3e} exceeds {tol:.1e}")
    col = X[:, :e1].reshape(fock.dim, e2, e1)
    coeffs = _root_b(f, N)[:, None, None] * col
    phi = MultiplierSymbol(g.n, N, coeffs)
    R = right_multiplier_matrix(phi, g, f, N)
    rmask, cmask = fock.interior(e2), fock.interior(e1)
    return phi, spectral_norm((X - R)[np.ix_(rmask, cmask)])


def hatX_conjugate(X: np.ndarray, g: WeightFamily, f: WeightFamily, e1: int, e2: int,
                   N: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """``(U_f^* (x) I) R_phi (U_g (x) I)`` on the Fock spaces, ``phi`` recovered from ``X``."""
    N = min(g.degree, f.degree) if N is None else N
    phi, _ = symbol_from_commutant(X, g, f, e1, e2, N, tol)
    C = right_multiplier_matrix(phi, g, f, N, basis="Z")
    Ug = np.kron(u_g(g, N), np.eye(e1))
    Ufs = np.kron(u_g_adjoint(f, N), np.eye(e2))
    return Ufs @ C @ Ug
