"""Time series containers, z-normalization, Euclidean distance and UCR ingestion."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

# population std below this is treated as a constant series
CONSTANT_TOL = 1e-12

_SEP = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class TimeSeries:
    id: Hashable
    values: np.ndarray
    label: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError(f"series {self.id!r}: values must be one-dimensional")
        if values.shape[0] < 2:
            raise ValueError(f"series {self.id!r}: length must be at least 2, got {values.shape[0]}")
        _check_finite(values, self.id)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _check_finite(values: np.ndarray, owner=None):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        where = f"series {owner!r}: " if owner is not None else ""
        raise ValueError(f"{where}non-finite value {values[bad[0]]!r} at index {int(bad[0])}")


def _check_normalized(matrix: np.ndarray, ids, tol=1e-9):
    mean = matrix.mean(axis=1)
    std = matrix.std(axis=1)
    ok = (np.abs(mean) <= tol) & ((np.abs(std - 1) <= tol) | np.all(matrix == 0, axis=1))
    if not ok.all():
        k = int(np.flatnonzero(~ok)[0])
        raise ValueError(
            f"series {ids[k]!r} flagged normalized but has mean {mean[k]:.3g}, std {std[k]:.6g}"
        )


def _as_values(s) -> np.ndarray:
    if isinstance(s, TimeSeries):
        return s.values
    values = np.asarray(s, dtype=np.float64)
    _check_finite(values)
    return values


def znormalize_values(x: np.ndarray) -> np.ndarray:
    """Row-wise z-normalization of a 1-D or 2-D array.

    Uses the population standard deviation. Rows whose deviation is below
    ``CONSTANT_TOL`` map to zeros.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 0:
        raise ValueError("cannot normalize an empty series")
    _check_finite(x.ravel())
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    std = np.sqrt(np.mean(centered * centered, axis=-1, keepdims=True))
    flat = std <= CONSTANT_TOL
    out = centered / np.where(flat, 1.0, std)
    return np.where(flat, 0.0, out)


def znormalize(s):
    """Return the z-normalized version of a series.

    Accepts a :class:`TimeSeries` (id and label are kept) or any 1-D
    sequence of reals (a plain array is returned).
    """
    if isinstance(s, TimeSeries):
        return TimeSeries(s.id, znormalize_values(s.values), s.label)
    return znormalize_values(_as_values(s))


def euclidean(u, v) -> float:
    a, b = _as_values(u), _as_values(v)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    diff = a - b
    return float(np.sqrt(np.dot(diff, diff)))


class Dataset:
    """An ordered collection of equal-length series.

    Values live in one ``(count, n)`` float64 matrix; :class:`TimeSeries`
    views are produced on demand.
    """

    def __init__(self, ids: Sequence[Hashable], values, labels=None, normalized=False):
        matrix = np.array(values, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("dataset values must form a (count, n) matrix")
        count, n = matrix.shape
        if n < 2:
            raise ValueError(f"series length must be at least 2, got {n}")
        ids = list(ids)
        if len(ids) != count:
            raise ValueError(f"{len(ids)} ids for {count} series")
        if len(set(ids)) != count:
            raise ValueError("series ids must be unique")
        if labels is None:
            labels = [None] * count
        labels = list(labels)
        if len(labels) != count:
            raise ValueError(f"{len(labels)} labels for {count} series")
        for row, sid in zip(matrix, ids):
            _check_finite(row, sid)
        if normalized:
            _check_normalized(matrix, ids)
        matrix.setflags(write=False)
        self.ids = ids
        self.labels = labels
        self.values = matrix
        self.normalized = bool(normalized)
        self._position = {sid: i for i, sid in enumerate(ids)}
        self._fingerprint = None

    @classmethod
    def from_series(cls, series: Iterable[TimeSeries], normalized=False) -> "Dataset":
        series = list(series)
        if not series:
            raise ValueError("dataset needs at least one series")
        lengths = {len(s) for s in series}
        if len(lengths) != 1:
            raise ValueError(f"series lengths differ: {sorted(lengths)}")
        return cls(
            [s.id for s in series],
            np.vstack([s.values for s in series]),
            [s.label for s in series],
            normalized=normalized,
        )

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i: int) -> TimeSeries:
        return TimeSeries(self.ids[i], self.values[i], self.labels[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def series(self) -> list[TimeSeries]:
        return list(self)

    def position(self, sid) -> int:
        return self._position[sid]

    def normalize(self) -> "Dataset":
        if self.normalized:
            return self
        return Dataset(self.ids, znormalize_values(self.values), self.labels, normalized=True)

    def fingerprint(self) -> str:
        """SHA-256 over ids and the exact float64 bytes of the values."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update(f"{len(self)} {self.n}\n".encode())
            for sid in self.ids:
                h.update(f"{sid}\n".encode())
            h.update(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.labels == other.labels
            and self.normalized == other.normalized
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"Dataset(count={len(self)}, n={self.n}, normalized={self.normalized})"


def parse_ucr_line(line: str) -> tuple[str, np.ndarray]:
    fields = [f for f in _SEP.split(line.strip()) if f]
    if len(fields) < 2:
        raise ValueError("expected a label followed by values")
    label, raw = fields[0], fields[1:]
    values = np.empty(len(raw))
    for k, tok in enumerate(raw):
        try:
            values[k] = float(tok)
        except ValueError:
            raise ValueError(f"unparsable number {tok!r} in field {k + 2}") from None
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ValueError(f"non-finite value in field {int(bad[0]) + 2}")
    return label, values


def load_ucr(path) -> Dataset:
    """Read a UCR-format text file.

    Each non-blank line holds a class label followed by the values,
    separated by commas and/or whitespace. Lines starting with ``#`` are
    ignored. Series ids are 0-based row positions among the data lines.
    """
    labels, rows = [], []
    n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                label, values = parse_ucr_line(text)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            if n is None:
                n = values.shape[0]
            elif values.shape[0] != n:
                raise ValueError(
                    f"{path}: line {lineno}: ragged row of length {values.shape[0]}, expected {n}"
                )
            labels.append(label)
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: line 0: no series found in file")
    if n < 2:
        raise ValueError(f"{path}: line 1: series length must be at least 2")
    return Dataset(list(range(len(rows))), np.vstack(rows), labels)


def dump_ucr(dataset: Dataset, path) -> None:
    """Write a dataset in comma-separated UCR format with lossless reals."""
    lines = []
    for label, row in zip(dataset.labels, dataset.values):
        tag = "0" if label is None else str(label)
        lines.append(",".join([tag] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def random_walks(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian random walks, one per row (not normalized)."""
    return np.cumsum(rng.standard_normal((count, n)), axis=1)


def random_walk_dataset(count: int = 1000, n: int = 128, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(list(range(count)), znormalize_values(random_walks(count, n, rng)), normalized=True)
