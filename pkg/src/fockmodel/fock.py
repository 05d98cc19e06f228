"""Truncated full Fock space and weighted creation operators.

The truncation keeps ``span{e_alpha : |alpha| <= N}`` and lets every
creation operator annihilate the top degree.  That span is co-invariant
for the untruncated operators, so the truncated tuple is the compression
of the infinite model and identities involving adjoints stay exact away
from degree ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .weights import WeightFamily
from .words import Word, degree_offset, lex_rank, truncation_dim


@dataclass(frozen=True)
class TruncatedFock:
    n: int
    N: int

    @property
    def dim(self) -> int:
        return truncation_dim(self.n, self.N)

    def offset(self, k: int) -> int:
        return degree_offset(self.n, k)

    def block(self, k: int) -> slice:
        if not 0 <= k <= self.N:
            raise ValueError(f"degree {k} outside 0..{self.N}")
        return slice(self.offset(k), self.offset(k + 1))

    def degrees(self) -> np.ndarray:
        """Degree of every basis vector, in basis order."""
        return np.concatenate([np.full(self.n**k, k) for k in range(self.N + 1)])

    def index(self, w: Word) -> int:
        if len(w) > self.N:
            raise IndexError(f"word {w} beyond degree {self.N}")
        return self.offset(len(w)) + lex_rank(tuple(w), self.n)

    def interior(self, aux: int = 1) -> np.ndarray:
        """Boolean mask of rows of degree below ``N`` on ``F^2_N (x) C^aux``."""
        return np.repeat(self.degrees() < self.N, aux)


@dataclass
class OperatorTuple:
    """``n`` square complex matrices acting on one space."""

    mats: np.ndarray  # shape (n, d, d)

    def __post_init__(self):
        m = np.asarray(self.mats, dtype=complex)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValueError("an operator tuple is an (n, d, d) stack of square matrices")
        self.mats = m

    @classmethod
    def from_list(cls, mats: Sequence[np.ndarray]) -> OperatorTuple:
        return cls(np.stack([np.asarray(m, dtype=complex) for m in mats]))

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def __getitem__(self, i: int) -> np.ndarray:
        """1-based generator access, ``T[1]`` is the first operator."""
        return self.mats[i - 1]

    def word(self, w: Word) -> np.ndarray:
        out = np.eye(self.dim, dtype=complex)
        for x in w:
            out = out @ self.mats[x - 1]
        return out

    def adjoints(self) -> np.ndarray:
        return np.conj(np.transpose(self.mats, (0, 2, 1)))

    def scaled(self, r: complex) -> OperatorTuple:
        return OperatorTuple(r * self.mats)

    def tensor_identity(self, k: int) -> OperatorTuple:
        return OperatorTuple(np.stack([np.kron(m, np.eye(k)) for m in self.mats]))

    def compress(self, basis: np.ndarray) -> OperatorTuple:
        """``B^* T_i B`` for a matrix ``B`` with orthonormal columns."""
        B = np.asarray(basis, dtype=complex)
        return OperatorTuple(np.einsum("ji,njk,kl->nil", B.conj(), self.mats, B))

    def row_sum(self) -> np.ndarray:
        """``sum_i T_i T_i^*``."""
        return np.einsum("nij,nkj->ik", self.mats, self.mats.conj())

    def to_json(self) -> dict:
        return {"n": self.n, "dim": self.dim, "matrices": [matrix_to_json(m) for m in self.mats]}

    @classmethod
    def from_json(cls, data: Mapping) -> OperatorTuple:
        mats = [matrix_from_json(m) for m in data["matrices"]]
        T = cls.from_list(mats)
        if T.n != int(data.get("n", T.n)) or T.dim != int(data.get("dim", T.dim)):
            raise ValueError("tuple header disagrees with its matrices")
        return T


def direct_sum(*tuples: OperatorTuple) -> OperatorTuple:
    n = tuples[0].n
    if any(t.n != n for t in tuples):
        raise ValueError("direct sum needs equal generator counts")
    d = sum(t.dim for t in tuples)
    out = np.zeros((n, d, d), dtype=complex)
    pos = 0
    for t in tuples:
        out[:, pos:pos + t.dim, pos:pos + t.dim] = t.mats
        pos += t.dim
    return OperatorTuple(out)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": m.shape[0], "rows": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def matrix_from_json(data: Mapping) -> np.ndarray:
    rows = data["rows"]
    m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    if m.ndim != 2 or m.shape[0] != int(data.get("dim", m.shape[0])):
        raise ValueError("malformed matrix JSON")
    return m


# -- model operators ------------------------------------------------------


def _require_degree(wf: WeightFamily, N: int) -> WeightFamily:
    if N < 0:
        raise ValueError("N must be nonnegative")
    if wf.degree < N:
        raise ValueError(f"weights known to degree {wf.degree}, need {N}")
    return wf


def _shift_entries(wf: WeightFamily, N: int, i: int, side: str):
    """Rows, columns and values of the weighted left (or right) shift by letter ``i``."""
    n, bb = wf.n, wf.bb
    rows, cols, vals = [], [], []
    for k in range(N):
        m = n**k
        src = np.arange(m)
        if side == "left":
            dst = (i - 1) * m + src
        else:
            dst = src * n + (i - 1)
        rows.append(degree_offset(n, k + 1) + dst)
        cols.append(degree_offset(n, k) + src)
        vals.append(np.sqrt(bb[k] / bb[k + 1][dst]))
    if not rows:
        return np.array([], int), np.array([], int), np.array([])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_W_sparse(wf: WeightFamily, N: int | None = None) -> list[sp.csr_matrix]:
    """Weighted left creation operators as sparse matrices (one nonzero per column)."""
    N = wf.degree if N is None else N
    _require_degree(wf, N)
    d = truncation_dim(wf.n, N)
    out = []
    for i in range(1, wf.n + 1):
        r, c, v = _shift_entries(wf, N, i, "left")
        out.append(sp.csr_matrix((v.astype(complex), (r, c)), shape=(d, d)))
    return out


def build_Lambda_sparse(wf: WeightFamily, N: int | None = None) -> list[sp.csr_matrix]:
    N = wf.degree if N is None else N
    _require_degree(wf, N)
    d = truncation_dim(wf.n, N)
    out = []
    for i in range(1, wf.n + 1):
        r, c, v = _shift_entries(wf, N, i, "right")
        out.append(sp.csr_matrix((v.astype(complex), (r, c)), shape=(d, d)))
    return out


def build_W(wf: WeightFamily, N: int | None = None) -> OperatorTuple:
    """``W_i e_alpha = sqrt(b_alpha / b_{g_i alpha}) e_{g_i alpha}``, zero on degree ``N``."""
    return OperatorTuple(np.stack([m.toarray() for m in build_W_sparse(wf, N)]))


def build_Lambda(wf: WeightFamily, N: int | None = None) -> OperatorTuple:
    """``Lambda_i e_alpha = sqrt(b_alpha / b_{alpha g_i}) e_{alpha g_i}``, zero on degree ``N``."""
    return OperatorTuple(np.stack([m.toarray() for m in build_Lambda_sparse(wf, N)]))


def grading_projection(fock: TruncatedFock, p: int) -> np.ndarray:
    Q = np.zeros((fock.dim, fock.dim))
    s = fock.block(p)
    Q[s, s] = np.eye(s.stop - s.start)
    return Q


def vacuum_projection(fock: TruncatedFock) -> np.ndarray:
    return grading_projection(fock, 0)


def _sparse_words(mats: list[sp.csr_matrix], N: int):
    """Yield ``(word, M_word)`` for every word of length ``<= N`` (products left to right)."""
    d = mats[0].shape[0]
    stack: list[tuple[Word, sp.csr_matrix]] = [((), sp.identity(d, dtype=complex, format="csr"))]
    while stack:
        w, M = stack.pop()
        yield w, M
        if len(w) < N:
            for i, Wi in enumerate(mats, start=1):
                stack.append(((i, *w), Wi @ M))


def model_defect(wf: WeightFamily, N: int | None = None) -> np.ndarray:
    """``sum_{|beta| <= N} a_beta W_beta W_beta^*`` on the truncation."""
    N = wf.degree if N is None else N
    mats = build_W_sparse(wf, N)
    acc = sp.csr_matrix(mats[0].shape, dtype=complex)
    for w, M in _sparse_words(mats, N):
        acc = acc + wf.a[w] * (M @ M.conj().T)
    return acc.toarray()


def model_completeness(wf: WeightFamily, N: int | None = None) -> np.ndarray:
    """``sum_{|alpha| <= N} b_alpha W_alpha P_{C1} W_alpha^*`` on the truncation."""
    N = wf.degree if N is None else N
    mats = build_W_sparse(wf, N)
    d = mats[0].shape[0]
    P = sp.csr_matrix(([1.0 + 0j], ([0], [0])), shape=(d, d))
    acc = sp.csr_matrix((d, d), dtype=complex)
    for w, M in _sparse_words(mats, N):
        acc = acc + wf.weight(w) * (M @ P @ M.conj().T)
    return acc.toarray()


def diag_compactness_matrix(wf: WeightFamily, N: int | None, i: int) -> np.ndarray:
    """``W_i^* W_i - sum_j W_j W_j^*``; entries below degree ``N`` are exact."""
    W = build_W(wf, N)
    Wi = W[i]
    return Wi.conj().T @ Wi - W.row_sum()


def word_matrix(W: OperatorTuple, w: Word) -> np.ndarray:
    return W.word(w)


def polynomial_in(T: OperatorTuple, coeffs: Mapping[Word, complex] | Iterable[tuple[Word, complex]]) -> np.ndarray:
    """``sum_alpha c_alpha T_alpha``."""
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    out = np.zeros((T.dim, T.dim), dtype=complex)
    for w, c in items:
        if c != 0:
            out += c * T.word(w)
    return out
