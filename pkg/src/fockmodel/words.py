"""Combinatorics of the unital free semigroup on ``n`` generators.

Words are plain tuples of 1-based letters; the empty tuple is the unit
``g_0``.  All matrices in the package use the graded-lexicographic order
produced here (degree-major, then lexicographic with ``1 < 2 < ... < n``),
so that the degree-``k`` words occupy one contiguous block.
"""

from __future__ import annotations

import itertools
from math import comb
from typing import Iterator, Sequence

Word = tuple[int, ...]

EMPTY: Word = ()

# full materialisation of a truncation is refused beyond this many words
MAX_WORDS = 10**6


def make_word(letters: Sequence[int], n: int) -> Word:
    w = tuple(int(x) for x in letters)
    for x in w:
        if not 1 <= x <= n:
            raise ValueError(f"letter {x} outside 1..{n}")
    return w


def degree_size(n: int, k: int) -> int:
    return n**k


def degree_offset(n: int, k: int) -> int:
    """Index of the first degree-``k`` word in graded-lex order."""
    if n == 1:
        return k
    return (n**k - 1) // (n - 1)


def truncation_dim(n: int, N: int) -> int:
    """Number of words of length at most ``N``."""
    return degree_offset(n, N + 1)


def iter_words(n: int, k: int) -> Iterator[Word]:
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    return itertools.product(range(1, n + 1), repeat=k)


def enumerate_words(n: int, k: int) -> list[Word]:
    """All ``n**k`` words of length ``k`` in lexicographic order."""
    if n**k > MAX_WORDS:
        raise ValueError(f"{n}**{k} words exceeds the materialisation cap {MAX_WORDS}")
    return list(iter_words(n, k))


def words_up_to(n: int, N: int) -> list[Word]:
    if truncation_dim(n, N) > MAX_WORDS:
        raise ValueError("truncation exceeds the materialisation cap")
    out: list[Word] = []
    for k in range(N + 1):
        out.extend(iter_words(n, k))
    return out


def lex_rank(w: Word, n: int) -> int:
    """Position of ``w`` among the words of its own length."""
    r = 0
    for x in w:
        r = r * n + (x - 1)
    return r


def word_index(w: Word, n: int) -> int:
    for x in w:
        if not 1 <= x <= n:
            raise ValueError(f"letter {x} outside 1..{n}")
    return degree_offset(n, len(w)) + lex_rank(w, n)


def index_word(i: int, n: int, N: int | None = None) -> Word:
    """Inverse of :func:`word_index`; ``N`` optionally bounds the truncation."""
    if i < 0 or (N is not None and i >= truncation_dim(n, N)):
        raise IndexError(f"index {i} out of range")
    k = 0
    while degree_offset(n, k + 1) <= i:
        k += 1
    r = i - degree_offset(n, k)
    letters = []
    for _ in range(k):
        r, d = divmod(r, n)
        letters.append(d + 1)
    return tuple(reversed(letters))


def concat(a: Word, b: Word) -> Word:
    return tuple(a) + tuple(b)


def reverse(a: Word) -> Word:
    return tuple(reversed(a))


def two_factorizations(gamma: Word) -> list[tuple[Word, Word]]:
    """All splits ``gamma = beta alpha`` as ``(beta, alpha)``, prefix length ascending."""
    g = tuple(gamma)
    return [(g[:m], g[m:]) for m in range(len(g) + 1)]


def ordered_factorizations(alpha: Word, j: int) -> list[tuple[Word, ...]]:
    """Splits of ``alpha`` into ``j`` nonempty consecutive factors."""
    a = tuple(alpha)
    k = len(a)
    if not 1 <= j <= k:
        raise ValueError(f"need 1 <= j <= |alpha| = {k}, got j={j}")
    out = []
    for cuts in itertools.combinations(range(1, k), j - 1):
        bounds = (0, *cuts, k)
        out.append(tuple(a[bounds[t]:bounds[t + 1]] for t in range(j)))
    return out


def composition_count(k: int, j: int) -> int:
    return comb(k - 1, j - 1)
