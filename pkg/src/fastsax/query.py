"""Online phase: the multi-level exclusion cascade and its baselines.

Two exclusion tests run per level, cheapest first:

* residual test: ``|d(u, u_fit) - d(q, q_fit)| > eps``. Both residuals are
  distances to the same linear subspace (piecewise-linear functions over
  the level's segmentation), and distance-to-a-subspace is 1-Lipschitz, so
  the test never drops a true answer.
* MINDIST test: ``mindist(q_word, u_word) > eps``, sound because MINDIST
  lower-bounds the Euclidean distance.

Every comparison is strict, so ties stay candidates. Operation counters
tally abstract arithmetic at the algorithm level, not machine instructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from . import pla
from .index import LevelConfig, MultiLevelIndex
from .sax import (
    BreakpointTable,
    SaxWord,
    breakpoints,
    mindist,
    paa_values,
    symbolize_values,
)
from .series import Dataset, TimeSeries, _as_values, znormalize_values

OP_CLASSES = ("adds", "mults", "compares", "sqrts", "abss", "lookups")


@dataclass
class OpCounts:
    adds: int = 0
    mults: int = 0
    compares: int = 0
    sqrts: int = 0
    abss: int = 0
    lookups: int = 0

    def __iadd__(self, other: "OpCounts"):
        for name in OP_CLASSES:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self

    def __add__(self, other: "OpCounts") -> "OpCounts":
        out = OpCounts(**self.as_dict())
        out += other
        return out

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in OP_CLASSES}

    def total(self) -> int:
        return sum(self.as_dict().values())

    # cost of each algorithm step, for m series

    def residual_test(self, m: int):
        self.adds += m
        self.abss += m
        self.compares += m

    def mindist_test(self, m: int, N: int):
        self.lookups += m * N
        self.mults += m * N + m
        self.adds += m * (N - 1)
        self.sqrts += m
        self.compares += m

    def distance_test(self, m: int, n: int):
        self.adds += m * (2 * n - 1)
        self.mults += m * n
        self.sqrts += m
        self.compares += m

    def scale_factor(self):
        # sqrt(n / N), once per level per query
        self.mults += 1
        self.sqrts += 1

    def query_word(self, n: int, N: int, a: int):
        L = n // N
        self.adds += N * (L - 1)
        self.mults += N
        self.compares += N * math.ceil(math.log2(a))

    def query_residual(self, n: int, N: int):
        L = n // N
        if L == 1:
            return
        # mean, slope, intercept, sampled line, squared error, sum, sqrt
        self.adds += N * ((L - 1) + (L - 1) + 1 + L + L + (L - 1)) + (N - 1)
        self.mults += N * (1 + L + 1 + 1 + L + L)
        self.sqrts += 1


@dataclass
class LevelStats:
    level: int
    frames: int
    tested: int = 0
    excluded_residual: int = 0
    excluded_mindist: int = 0


@dataclass
class QueryReport:
    """Outcome of one range query.

    ``answers`` holds the ids with ``euclidean(q, u) <= eps``;
    ``candidates`` the ids that survived the cascade and were verified.
    """

    method: str
    answers: frozenset
    candidates: frozenset
    levels: list[LevelStats]
    op_counts: OpCounts = field(default_factory=OpCounts)

    @property
    def candidates_after_cascade(self) -> int:
        return len(self.candidates)

    @property
    def excluded_residual(self) -> int:
        return sum(s.excluded_residual for s in self.levels)

    @property
    def excluded_mindist(self) -> int:
        return sum(s.excluded_mindist for s in self.levels)

    def sorted_answers(self) -> list:
        return sorted(self.answers, key=_sort_key)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "answers": self.sorted_answers(),
            "candidates_after_cascade": self.candidates_after_cascade,
            "levels": [vars(s).copy() for s in self.levels],
            "op_counts": self.op_counts.as_dict(),
        }


def _sort_key(sid):
    return (isinstance(sid, str), sid)


@dataclass(frozen=True, eq=False)
class RangeQuery:
    """A query series (already z-normalized) and a distance threshold."""

    q: np.ndarray
    epsilon: float

    def __post_init__(self):
        q = _as_values(self.q)
        q = np.array(q, dtype=np.float64)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0:
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def from_raw(cls, values, epsilon: float) -> "RangeQuery":
        """Build a query from an unnormalized series."""
        return cls(znormalize_values(_as_values(values)), epsilon)


@dataclass(frozen=True)
class QueryRepresentation:
    residuals: tuple[float, ...]
    words: tuple[SaxWord, ...]


def query_residuals(q, config: LevelConfig) -> QueryRepresentation:
    """Residual and SAX word of the query at every level of ``config``."""
    values = _as_values(q)
    n = values.shape[0]
    config.validate(n)
    table = breakpoints(config.alphabet_size)
    res, words = [], []
    for N in config.levels:
        res.append(float(pla.residuals(values, N)))
        symbols = symbolize_values(paa_values(values, N), table)
        words.append(SaxWord(symbols, config.alphabet_size, n))
    return QueryRepresentation(tuple(res), tuple(words))


def exclude_by_residual(res_u: float, res_q: float, epsilon: float) -> bool:
    return abs(res_u - res_q) > epsilon


def exclude_by_mindist(w_q: SaxWord, w_u: SaxWord, t: BreakpointTable, epsilon: float) -> bool:
    return mindist(w_q, w_u, t) > epsilon


def _check_shapes(data: Dataset, rq: RangeQuery):
    if rq.q.shape[0] != data.n:
        raise ValueError(f"query length {rq.q.shape[0]} does not match series length {data.n}")


def _prepare(idx: MultiLevelIndex, data: Dataset, rq: RangeQuery) -> Dataset:
    data = data.normalize()
    if data.fingerprint() != idx.dataset_fingerprint:
        raise ValueError("index fingerprint does not match the dataset; rebuild the index")
    if rq.q.shape[0] != idx.n:
        raise ValueError(f"query length {rq.q.shape[0]} does not match index n={idx.n}")
    return data


def _verify(data: Dataset, rows: np.ndarray, rq: RangeQuery, ops: OpCounts):
    diff = data.values[rows] - rq.q
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    ops.distance_test(rows.size, data.n)
    return rows[dist <= rq.epsilon]


def _cascade(
    idx: MultiLevelIndex,
    data: Dataset,
    rq: RangeQuery,
    order: Sequence[int],
    use_residual: bool,
    method: str,
) -> QueryReport:
    data = _prepare(idx, data, rq)
    n, a = idx.n, idx.config.alphabet_size
    table = breakpoints(a)
    eps = rq.epsilon
    ops = OpCounts()
    alive = np.arange(len(idx))
    stats = []
    for level in order:
        N = idx.config.levels[level]
        st = LevelStats(level, N)
        stats.append(st)
        if alive.size == 0:
            continue
        st.tested = alive.size

        if use_residual:
            ops.query_residual(n, N)
            res_q = float(pla.residuals(rq.q, N))
            gap = np.abs(idx.residuals[alive, level] - res_q)
            ops.residual_test(alive.size)
            keep = ~(gap > eps)
            st.excluded_residual = int(alive.size - keep.sum())
            alive = alive[keep]
            if alive.size == 0:
                continue

        ops.query_word(n, N, a)
        q_word = symbolize_values(paa_values(rq.q, N), table)
        ops.scale_factor()
        cells = table.cells[idx.words[level][alive], q_word]
        md = math.sqrt(n / N) * np.sqrt(np.einsum("ij,ij->i", cells, cells))
        ops.mindist_test(alive.size, N)
        keep = ~(md > eps)
        st.excluded_mindist = int(alive.size - keep.sum())
        alive = alive[keep]

    hits = _verify(data, alive, rq, ops)
    return QueryReport(
        method=method,
        answers=frozenset(data.ids[i] for i in hits),
        candidates=frozenset(data.ids[i] for i in alive),
        levels=stats,
        op_counts=ops,
    )


def range_query(
    idx: MultiLevelIndex,
    data: Dataset,
    rq: RangeQuery,
    order: Sequence[int] | None = None,
) -> QueryReport:
    """Exact range query through the multi-level exclusion cascade.

    Levels are visited from the lowest (most frames) upward unless
    ``order`` lists level indices explicitly. A series excluded at one
    level is not revisited; survivors are verified on the full series.
    """
    if order is None:
        order = range(len(idx.config))
    order = list(order)
    for level in order:
        if not 0 <= level < len(idx.config):
            raise ValueError(f"level index {level} outside [0, {len(idx.config) - 1}]")
    return _cascade(idx, data, rq, order, use_residual=True, method="FAST_SAX")


def sax_only_query(idx: MultiLevelIndex, data: Dataset, rq: RangeQuery, baseline_level: int = 0) -> QueryReport:
    """Plain SAX: MINDIST filtering at a single level, then verification."""
    if not 0 <= baseline_level < len(idx.config):
        raise ValueError(f"baseline level {baseline_level} outside [0, {len(idx.config) - 1}]")
    return _cascade(idx, data, rq, [baseline_level], use_residual=False, method="SAX")


def linear_scan(data: Dataset, rq: RangeQuery) -> set:
    """Ids of every series within ``epsilon`` of the query, by brute force."""
    _check_shapes(data, rq)
    rows = _verify(data, np.arange(len(data)), rq, OpCounts())
    return {data.ids[i] for i in rows}
