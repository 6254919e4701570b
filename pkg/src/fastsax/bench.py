"""Operation-count benchmark: FAST_SAX versus single-level SAX.

Raw per-class operation counts are always recorded; a :class:`CostModel`
turns them into a weighted latency total and can be re-applied to the CSV
afterwards.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .index import LevelConfig, build_index, default_levels
from .query import OP_CLASSES, OpCounts, RangeQuery, linear_scan, range_query, sax_only_query
from .sax import breakpoints, paa_values, symbolize_values
from .series import Dataset, random_walks, znormalize_values

CSV_COLUMNS = (
    "method", "dataset", "seed", "n", "a", "levels", "epsilon",
    "adds", "mults", "compares", "sqrts", "abss", "lookups",
    "weighted_total", "excluded_eq9", "excluded_eq10",
    "candidates", "answers", "wall_seconds", "mean_tightness",
)

DEFAULT_SEED = 0
DEFAULT_COUNT = 1000
DEFAULT_LENGTH = 128
DEFAULT_QUERIES = 20
DEFAULT_TIGHTNESS_PAIRS = 500


class SweepMismatchError(RuntimeError):
    """Two exact methods disagreed on an answer set: a correctness bug."""


@dataclass(frozen=True)
class CostModel:
    adds: float = 1.0
    mults: float = 1.0
    compares: float = 1.0
    sqrts: float = 1.0
    abss: float = 1.0
    lookups: float = 1.0

    def __post_init__(self):
        for name in OP_CLASSES:
            w = getattr(self, name)
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"cost weight {name}={w!r} must be finite and >= 0")

    @classmethod
    def from_file(cls, path) -> "CostModel":
        """Read weights from a JSON object; missing classes default to 1."""
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(OP_CLASSES)
        if unknown:
            raise ValueError(f"unknown operation classes in cost model: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def weigh(self, counts: OpCounts | dict) -> float:
        if isinstance(counts, OpCounts):
            counts = counts.as_dict()
        return float(sum(counts[name] * getattr(self, name) for name in OP_CLASSES))


@dataclass
class BenchResult:
    method: str
    dataset: str
    seed: int
    n: int
    alphabet_size: int
    levels: tuple[int, ...]
    epsilon: float
    op_counts: OpCounts
    weighted_total: float
    excluded_eq9: int
    excluded_eq10: int
    candidates: int
    answers: int
    wall_seconds: float
    mean_tightness: float

    def row(self) -> list[str]:
        ops = self.op_counts.as_dict()
        return [
            self.method, self.dataset, str(self.seed), str(self.n), str(self.alphabet_size),
            ",".join(map(str, self.levels)), repr(float(self.epsilon)),
            *(str(ops[k]) for k in OP_CLASSES),
            repr(self.weighted_total), str(self.excluded_eq9), str(self.excluded_eq10),
            str(self.candidates), str(self.answers),
            repr(float(self.wall_seconds)), repr(float(self.mean_tightness)),
        ]


@dataclass(frozen=True)
class TightnessSummary:
    min: float
    mean: float
    max: float
    pairs: int
    skipped: int


def tightness_report(data: Dataset, N: int, a: int, sample_size: int = DEFAULT_TIGHTNESS_PAIRS, seed: int = 0) -> TightnessSummary:
    """MINDIST / Euclidean ratio over randomly sampled distinct pairs.

    Pairs at zero Euclidean distance have no defined ratio and are skipped.
    """
    count = len(data)
    if count < 2 or sample_size < 1:
        raise ValueError("need at least two series and a positive sample size")
    data = data.normalize()
    table = breakpoints(a)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, count, sample_size)
    j = (i + rng.integers(1, count, sample_size)) % count
    words = symbolize_values(paa_values(data.values, N), table)
    cells = table.cells[words[i], words[j]]
    md = math.sqrt(data.n / N) * np.sqrt(np.einsum("ij,ij->i", cells, cells))
    diff = data.values[i] - data.values[j]
    ed = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    ok = ed > 0
    if not ok.any():
        raise ValueError("every sampled pair has zero distance")
    ratio = md[ok] / ed[ok]
    return TightnessSummary(float(ratio.min()), float(ratio.mean()), float(ratio.max()),
                            int(ok.sum()), int((~ok).sum()))


def synthetic_workload(seed: int = DEFAULT_SEED, count: int = DEFAULT_COUNT, n: int = DEFAULT_LENGTH,
                       num_queries: int = DEFAULT_QUERIES) -> tuple[Dataset, np.ndarray]:
    """Seeded z-normalized random walks plus held-out random-walk queries."""
    rng = np.random.default_rng(seed)
    values = znormalize_values(random_walks(count, n, rng))
    queries = znormalize_values(random_walks(num_queries, n, rng))
    return Dataset(list(range(count)), values, normalized=True), queries


def run_sweep(
    data: Dataset,
    queries: Sequence,
    epsilons: Sequence[float],
    alphabet_sizes: Sequence[int],
    levels: Sequence[int] | None = None,
    model: CostModel | None = None,
    baseline_level: int = 0,
    order: Sequence[int] | None = None,
    dataset_name: str = "random_walk",
    seed: int = DEFAULT_SEED,
    tightness_pairs: int = DEFAULT_TIGHTNESS_PAIRS,
    timing: bool = False,
) -> list[BenchResult]:
    """Run FAST_SAX and SAX-only over every (alphabet size, epsilon) cell.

    Counts are summed over all queries of a cell. The index is rebuilt per
    alphabet size. Every query's answer set is checked against the other
    method and a linear scan; any disagreement raises
    :class:`SweepMismatchError`. Wall-clock time is recorded only when
    ``timing`` is set (it would otherwise break byte-identical output).
    """
    model = model or CostModel()
    data = data.normalize()
    levels = tuple(levels) if levels else default_levels(data.n)
    order = list(order) if order is not None else list(range(len(levels)))
    visited = tuple(levels[k] for k in order)
    queries = [RangeQuery(q, 0.0).q for q in queries]
    if not queries or not epsilons or not alphabet_sizes:
        raise ValueError("queries, epsilons and alphabet sizes must be nonempty")
    baseline_N = levels[baseline_level]

    results = []
    for a in alphabet_sizes:
        idx = build_index(data, LevelConfig(levels, a))
        tight = tightness_report(data, baseline_N, a, tightness_pairs, seed).mean
        for eps in epsilons:
            cell = {}
            for method in ("FAST_SAX", "SAX"):
                cell[method] = dict(ops=OpCounts(), eq9=0, eq10=0, cand=0, ans=0, secs=0.0, sets=[])
            for qi, q in enumerate(queries):
                rq = RangeQuery(q, eps)
                for method in ("FAST_SAX", "SAX"):
                    t0 = time.perf_counter()
                    if method == "FAST_SAX":
                        rep = range_query(idx, data, rq, order=order)
                    else:
                        rep = sax_only_query(idx, data, rq, baseline_level)
                    acc = cell[method]
                    acc["secs"] += time.perf_counter() - t0
                    acc["ops"] += rep.op_counts
                    acc["eq9"] += rep.excluded_residual
                    acc["eq10"] += rep.excluded_mindist
                    acc["cand"] += rep.candidates_after_cascade
                    acc["ans"] += len(rep.answers)
                    acc["sets"].append(rep.answers)
                truth = linear_scan(data, rq)
                if not cell["FAST_SAX"]["sets"][-1] == cell["SAX"]["sets"][-1] == truth:
                    raise SweepMismatchError(
                        f"answer sets differ at a={a}, epsilon={eps}, query #{qi}"
                    )
            for method in ("FAST_SAX", "SAX"):
                acc = cell[method]
                results.append(BenchResult(
                    method=method,
                    dataset=dataset_name,
                    seed=seed,
                    n=data.n,
                    alphabet_size=a,
                    levels=visited if method == "FAST_SAX" else (baseline_N,),
                    epsilon=float(eps),
                    op_counts=acc["ops"],
                    weighted_total=model.weigh(acc["ops"]),
                    excluded_eq9=acc["eq9"],
                    excluded_eq10=acc["eq10"],
                    candidates=acc["cand"],
                    answers=acc["ans"],
                    wall_seconds=acc["secs"] if timing else math.nan,
                    mean_tightness=tight,
                ))
    return results


def cell_ratios(results: Sequence[BenchResult]) -> list[tuple[int, float, float]]:
    """``(a, epsilon, FAST_SAX total / SAX total)`` per sweep cell."""
    totals = {}
    for r in results:
        totals[(r.alphabet_size, r.epsilon, r.method)] = r.weighted_total
    out = []
    for (a, eps, method), fast in totals.items():
        if method == "FAST_SAX":
            sax = totals[(a, eps, "SAX")]
            out.append((a, eps, fast / sax if sax else math.inf))
    return out


def emit_csv(results: Sequence[BenchResult], path) -> None:
    if not results:
        raise ValueError("no benchmark results to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(r.row())


def read_csv(path) -> list[dict]:
    """Parse a benchmark CSV back into typed rows."""
    ints = {"seed", "n", "a", "adds", "mults", "compares", "sqrts", "abss", "lookups",
            "excluded_eq9", "excluded_eq10", "candidates", "answers"}
    floats = {"epsilon", "weighted_total", "wall_seconds", "mean_tightness"}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for k, v in raw.items():
                row[k] = int(v) if k in ints else float(v) if k in floats else v
            row["levels"] = tuple(int(x) for x in row["levels"].split(","))
            rows.append(row)
    return rows
