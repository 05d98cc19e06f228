"""Truncated free formal power series with complex coefficients.

A series is stored as one coefficient vector per degree, each in
lexicographic word order.  With that layout the degree-``k`` block of a
Cauchy product is ``sum_m kron(f_m, g_{k-m})``, which is what makes
multiplication and inversion cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .words import (
    Word,
    iter_words,
    lex_rank,
    make_word,
    ordered_factorizations,
)


@dataclass(frozen=True)
class FreeSeries:
    n: int
    degree: int
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.n < 1 or self.degree < 0:
            raise ValueError("need n >= 1 and degree >= 0")
        if len(self.blocks) != self.degree + 1:
            raise ValueError("one coefficient block per degree is required")
        for k, b in enumerate(self.blocks):
            if b.shape != (self.n**k,):
                raise ValueError(f"block {k} has shape {b.shape}, expected {(self.n**k,)}")

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, n: int, degree: int) -> FreeSeries:
        return cls(n, degree, tuple(np.zeros(n**k, dtype=complex) for k in range(degree + 1)))

    @classmethod
    def one(cls, n: int, degree: int) -> FreeSeries:
        blocks = [np.zeros(n**k, dtype=complex) for k in range(degree + 1)]
        blocks[0][0] = 1.0
        return cls(n, degree, tuple(blocks))

    @classmethod
    def from_blocks(cls, n: int, blocks) -> FreeSeries:
        return cls(n, len(blocks) - 1, tuple(np.asarray(b, dtype=complex).copy() for b in blocks))

    @classmethod
    def from_terms(cls, n: int, degree: int, terms: Mapping[Word, complex]) -> FreeSeries:
        blocks = [np.zeros(n**k, dtype=complex) for k in range(degree + 1)]
        for w, c in terms.items():
            w = make_word(w, n)
            if len(w) > degree:
                raise ValueError(f"word {w} exceeds truncation degree {degree}")
            blocks[len(w)][lex_rank(w, n)] += c
        return cls(n, degree, tuple(blocks))

    @classmethod
    def from_radial(cls, n: int, values) -> FreeSeries:
        """Series whose coefficient depends only on word length."""
        return cls(n, len(values) - 1,
                   tuple(np.full(n**k, values[k], dtype=complex) for k in range(len(values))))

    @classmethod
    def from_function(cls, n: int, degree: int, fn) -> FreeSeries:
        blocks = [np.array([fn(w) for w in iter_words(n, k)], dtype=complex).reshape(n**k)
                  for k in range(degree + 1)]
        return cls(n, degree, tuple(blocks))

    # access -------------------------------------------------------------

    def __getitem__(self, w: Word) -> complex:
        w = tuple(w)
        if len(w) > self.degree:
            raise KeyError(f"word {w} beyond truncation degree {self.degree}")
        return complex(self.blocks[len(w)][lex_rank(make_word(w, self.n), self.n)])

    coeff = __getitem__

    @property
    def flat(self) -> np.ndarray:
        """Coefficients in graded-lex order."""
        return np.concatenate(self.blocks)

    @property
    def constant(self) -> complex:
        return complex(self.blocks[0][0])

    def items(self) -> Iterator[tuple[Word, complex]]:
        for k in range(self.degree + 1):
            for w, c in zip(iter_words(self.n, k), self.blocks[k]):
                yield w, complex(c)

    def nonzero_terms(self, atol: float = 0.0) -> dict[Word, complex]:
        return {w: c for w, c in self.items() if abs(c) > atol}

    def truncate(self, degree: int) -> FreeSeries:
        if degree > self.degree:
            raise ValueError("cannot raise the truncation degree")
        return FreeSeries(self.n, degree, self.blocks[: degree + 1])

    def pad(self, degree: int) -> FreeSeries:
        """Same polynomial viewed at a higher truncation degree (zero coefficients)."""
        if degree < self.degree:
            raise ValueError("pad cannot lower the truncation degree")
        extra = tuple(np.zeros(self.n**k, dtype=complex) for k in range(self.degree + 1, degree + 1))
        return FreeSeries(self.n, degree, self.blocks + extra)

    def max_abs_imag(self) -> float:
        return max(float(np.max(np.abs(b.imag))) for b in self.blocks)

    def real_blocks(self) -> list[np.ndarray]:
        return [b.real.copy() for b in self.blocks]

    # arithmetic ---------------------------------------------------------

    def _align(self, other: FreeSeries) -> int:
        if self.n != other.n:
            raise ValueError(f"generator counts differ: {self.n} vs {other.n}")
        return min(self.degree, other.degree)

    def __add__(self, other: FreeSeries) -> FreeSeries:
        N = self._align(other)
        return FreeSeries(self.n, N, tuple(self.blocks[k] + other.blocks[k] for k in range(N + 1)))

    def __sub__(self, other: FreeSeries) -> FreeSeries:
        N = self._align(other)
        return FreeSeries(self.n, N, tuple(self.blocks[k] - other.blocks[k] for k in range(N + 1)))

    def __neg__(self) -> FreeSeries:
        return FreeSeries(self.n, self.degree, tuple(-b for b in self.blocks))

    def scale(self, c: complex) -> FreeSeries:
        return FreeSeries(self.n, self.degree, tuple(c * b for b in self.blocks))

    def __mul__(self, other):
        if isinstance(other, FreeSeries):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def max_abs_diff(self, other: FreeSeries) -> float:
        N = self._align(other)
        return max(float(np.max(np.abs(self.blocks[k] - other.blocks[k]))) for k in range(N + 1))

    # serialisation ------------------------------------------------------

    def to_json(self, atol: float = 0.0) -> dict:
        terms = [
            {"word": list(w), "re": c.real, "im": c.imag}
            for w, c in self.items()
            if abs(c) > atol
        ]
        return {"n": self.n, "degree": self.degree, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> FreeSeries:
        n, degree = int(data["n"]), int(data["degree"])
        terms: dict[Word, complex] = {}
        for t in data.get("terms", []):
            w = make_word(t["word"], n)
            terms[w] = terms.get(w, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls.from_terms(n, degree, terms)


def multiply(f: FreeSeries, g: FreeSeries) -> FreeSeries:
    """Cauchy product ``(fg)_gamma = sum_{beta alpha = gamma} f_beta g_alpha``."""
    N = f._align(g)
    out = []
    for k in range(N + 1):
        acc = np.zeros(f.n**k, dtype=complex)
        for m in range(k + 1):
            acc += np.kron(f.blocks[m], g.blocks[k - m])
        out.append(acc)
    return FreeSeries(f.n, N, tuple(out))


def invert(g: FreeSeries) -> FreeSeries:
    """Multiplicative inverse of a series with unit constant term.

    Degree by degree, ``f_gamma = -g_gamma - sum f_beta g_alpha`` over splits
    ``beta alpha = gamma`` with ``1 <= |beta| < |gamma|``; this is the left
    inverse relation, and the right inverse coincides with it.
    """
    if abs(g.constant - 1.0) > 1e-14:
        raise ValueError(f"constant term must be 1, got {g.constant}")
    f = [np.ones(1, dtype=complex)]
    for k in range(1, g.degree + 1):
        acc = -g.blocks[k].astype(complex)
        for m in range(1, k):
            acc -= np.kron(f[m], g.blocks[k - m])
        f.append(acc)
    return FreeSeries(g.n, g.degree, tuple(f))


def direct_inverse_oracle(g: FreeSeries, alpha: Word) -> complex:
    """Inverse coefficient at ``alpha`` by the alternating factorization sum.

    Exponential in ``|alpha|``; kept for cross-checking :func:`invert`.
    """
    alpha = tuple(alpha)
    if len(alpha) == 0:
        raise ValueError("the oracle is defined for nonempty words only")
    if abs(g.constant - 1.0) > 1e-14:
        raise ValueError("constant term must be 1")
    total = 0j
    for j in range(1, len(alpha) + 1):
        sign = (-1) ** j
        for parts in ordered_factorizations(alpha, j):
            prod = 1 + 0j
            for p in parts:
                prod *= g[p]
            total += sign * prod
    return total


def real_binomial(s: float, k: int) -> float:
    """``s (s-1) ... (s-k+1) / k!`` as an iterated product."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1.0
    for j in range(k):
        out *= (s - j) / (j + 1)
    return out


def power(phi: FreeSeries, k: int) -> FreeSeries:
    out = FreeSeries.one(phi.n, phi.degree)
    for _ in range(k):
        out = multiply(out, phi)
    return out


def _binomial_series(phi: FreeSeries, coeffs) -> FreeSeries:
    if abs(phi.constant) > 1e-14:
        raise ValueError("phi must have zero constant term")
    total = FreeSeries.zeros(phi.n, phi.degree)
    term = FreeSeries.one(phi.n, phi.degree)
    # phi^k vanishes below degree k, so degree+1 powers suffice
    for k in range(phi.degree + 1):
        total = total + term.scale(coeffs(k))
        term = multiply(term, phi)
    return total


def neg_power_one_minus(phi: FreeSeries, s: float) -> FreeSeries:
    """``(1 - phi)^(-s) = sum_k binom(s+k-1, k) phi^k`` truncated."""
    return _binomial_series(phi, lambda k: real_binomial(s + k - 1, k))


def power_one_minus(phi: FreeSeries, s: float) -> FreeSeries:
    """``(1 - phi)^s = sum_k (-1)^k binom(s, k) phi^k`` truncated."""
    return _binomial_series(phi, lambda k: (-1) ** k * real_binomial(s, k))


def psi_coefficient_oracle(phi: FreeSeries, s: float, alpha: Word) -> complex:
    """Coefficient of ``(1-phi)^(-s)`` at ``alpha`` summed over ordered factorizations."""
    alpha = tuple(alpha)
    if not alpha:
        return 1.0 + 0j
    total = 0j
    for j in range(1, len(alpha) + 1):
        c = real_binomial(s + j - 1, j)
        for parts in ordered_factorizations(alpha, j):
            prod = 1 + 0j
            for p in parts:
                prod *= phi[p]
            total += c * prod
    return total


def radial_inverse(b) -> np.ndarray:
    """Inverse coefficients of a length-dependent series from its profile ``b_k``."""
    b = np.asarray(b, dtype=float)
    a = np.zeros_like(b)
    a[0] = 1.0
    for k in range(1, len(b)):
        a[k] = -b[k] - np.dot(a[1:k], b[k - 1:0:-1])
    return a
