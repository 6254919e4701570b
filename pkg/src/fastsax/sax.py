"""PAA, Gaussian breakpoints, symbolization and the SAX lower-bounding distances."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

MIN_ALPHABET = 3
MAX_ALPHABET = 20


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def check_alphabet(a: int) -> int:
    if isinstance(a, bool) or int(a) != a or not MIN_ALPHABET <= a <= MAX_ALPHABET:
        raise ValueError(f"alphabet size must be an integer in [{MIN_ALPHABET}, {MAX_ALPHABET}], got {a!r}")
    return int(a)


def check_frames(n: int, N: int) -> int:
    if int(N) != N or not 1 <= N <= n:
        raise ValueError(f"frame count must lie in [1, n={n}], got N={N}")
    if n % N:
        raise ValueError(f"frame count N={N} does not divide series length n={n}")
    return int(N)


@dataclass(frozen=True, eq=False)
class BreakpointTable:
    """The ``a - 1`` standard-normal quantiles at probabilities ``i / a``.

    ``cells`` is the full ``a x a`` symbol-pair distance matrix used by
    :func:`mindist`.
    """

    alphabet_size: int
    betas: np.ndarray
    cells: np.ndarray

    def __len__(self):
        return self.betas.shape[0]


def _build_table(a: int) -> BreakpointTable:
    betas = ndtri(np.arange(1, a) / a)
    # exact antisymmetry; ndtri is accurate to ~1e-15 on either side
    betas = (betas - betas[::-1]) / 2.0
    i, j = np.meshgrid(np.arange(a), np.arange(a), indexing="ij")
    hi, lo = np.maximum(i, j), np.minimum(i, j)
    far = hi - lo > 1
    cells = np.zeros((a, a))
    cells[far] = betas[hi[far] - 1] - betas[lo[far]]
    return BreakpointTable(a, _readonly(betas, np.float64), _readonly(cells, np.float64))


_tables: dict[int, BreakpointTable] = {}
_tables_lock = threading.Lock()


def breakpoints(a: int) -> BreakpointTable:
    """Return the (cached) breakpoint table for alphabet size ``a``."""
    a = check_alphabet(a)
    table = _tables.get(a)
    if table is None:
        with _tables_lock:
            table = _tables.get(a)
            if table is None:
                table = _tables[a] = _build_table(a)
    return table


@dataclass(frozen=True, eq=False)
class PaaVector:
    means: np.ndarray
    n: int

    @property
    def N(self) -> int:
        return self.means.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PaaVector):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.means, other.means)


@dataclass(frozen=True, eq=False)
class SaxWord:
    symbols: np.ndarray
    alphabet_size: int
    n: int

    @property
    def N(self) -> int:
        return self.symbols.shape[0]

    def letters(self) -> str:
        return symbols_to_letters(self.symbols)

    def __eq__(self, other):
        if not isinstance(other, SaxWord):
            return NotImplemented
        return (
            self.alphabet_size == other.alphabet_size
            and self.n == other.n
            and np.array_equal(self.symbols, other.symbols)
        )


def symbols_to_letters(symbols) -> str:
    return "".join(chr(ord("a") + int(k)) for k in symbols)


def letters_to_symbols(word: str, a: int) -> np.ndarray:
    symbols = np.frombuffer(word.encode("ascii"), dtype=np.uint8).astype(np.int64) - ord("a")
    if symbols.size and (symbols.min() < 0 or symbols.max() >= a):
        raise ValueError(f"word {word!r} has letters outside the alphabet of size {a}")
    return symbols


def paa_values(x: np.ndarray, N: int) -> np.ndarray:
    """Frame means of a 1-D series or of every row of a 2-D matrix."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    check_frames(n, N)
    return x.reshape(*x.shape[:-1], N, n // N).mean(axis=-1)


def paa(s, N: int) -> PaaVector:
    values = s.values if hasattr(s, "values") else np.asarray(s, dtype=np.float64)
    return PaaVector(_readonly(paa_values(values, N), np.float64), values.shape[0])


def symbolize_values(means: np.ndarray, table: BreakpointTable) -> np.ndarray:
    """Symbol index per mean; a mean equal to a breakpoint takes the upper symbol."""
    return np.searchsorted(table.betas, means, side="right").astype(np.uint8)


def symbolize(p: PaaVector, t: BreakpointTable) -> SaxWord:
    return SaxWord(_readonly(symbolize_values(p.means, t), np.uint8), t.alphabet_size, p.n)


def sax_word(s, N: int, t: BreakpointTable) -> SaxWord:
    return symbolize(paa(s, N), t)


def cell_dist(i: int, j: int, t: BreakpointTable) -> float:
    a = t.alphabet_size
    for k in (i, j):
        if int(k) != k or not 0 <= k < a:
            raise ValueError(f"symbol {k!r} outside [0, {a - 1}]")
    return float(t.cells[int(i), int(j)])


def _check_pair(x, y, what):
    if x.n != y.n or x.N != y.N:
        raise ValueError(f"{what} shape mismatch: (n={x.n}, N={x.N}) vs (n={y.n}, N={y.N})")


def mindist(w1: SaxWord, w2: SaxWord, t: BreakpointTable) -> float:
    _check_pair(w1, w2, "word")
    if not w1.alphabet_size == w2.alphabet_size == t.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: {w1.alphabet_size}, {w2.alphabet_size}, table {t.alphabet_size}"
        )
    cells = t.cells[w1.symbols, w2.symbols]
    return math.sqrt(w1.n / w1.N) * math.sqrt(float(np.dot(cells, cells)))


def paa_dist(p1: PaaVector, p2: PaaVector) -> float:
    _check_pair(p1, p2, "PAA")
    diff = p1.means - p2.means
    return math.sqrt(p1.n / p1.N) * math.sqrt(float(np.dot(diff, diff)))
