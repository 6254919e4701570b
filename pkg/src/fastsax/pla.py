"""Per-frame least-squares line fits and the residual distance to them.

Frames use local abscissae ``0 .. L-1`` where ``L = n / N``. The fitted
approximant is the orthogonal projection of a series onto the space of
piecewise-linear functions over the fixed segmentation, so its distance
to the series is the smallest achievable by any such function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sax import check_frames


@dataclass(frozen=True, eq=False)
class PlaApprox:
    """``segments`` is an ``(N, 2)`` array of ``(slope, intercept)`` rows."""

    segments: np.ndarray
    n: int

    @property
    def N(self) -> int:
        return self.segments.shape[0]

    @property
    def slopes(self) -> np.ndarray:
        return self.segments[:, 0]

    @property
    def intercepts(self) -> np.ndarray:
        return self.segments[:, 1]

    def __eq__(self, other):
        if not isinstance(other, PlaApprox):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.segments, other.segments)


def _frames(x: np.ndarray, N: int) -> np.ndarray:
    n = x.shape[-1]
    check_frames(n, N)
    return x.reshape(*x.shape[:-1], N, n // N)


def fit_lines(x: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Slopes and intercepts for every frame of a 1-D series or 2-D matrix."""
    frames = _frames(np.asarray(x, dtype=np.float64), N)
    L = frames.shape[-1]
    mean_y = frames.mean(axis=-1)
    if L == 1:
        return np.zeros_like(mean_y), mean_y
    pos = np.arange(L, dtype=np.float64)
    centered = pos - pos.mean()
    slope = frames @ centered / np.dot(centered, centered)
    return slope, mean_y - slope * pos.mean()


def _sample(slope, intercept, L):
    pos = np.arange(L, dtype=np.float64)
    return intercept[..., None] + slope[..., None] * pos


def residuals(x: np.ndarray, N: int) -> np.ndarray:
    """Distance from each row of ``x`` to its own piecewise-linear fit."""
    x = np.asarray(x, dtype=np.float64)
    slope, intercept = fit_lines(x, N)
    err = _frames(x, N) - _sample(slope, intercept, x.shape[-1] // N)
    return np.sqrt(np.sum(err * err, axis=(-2, -1)))


def fit_pla(s, N: int) -> PlaApprox:
    values = np.asarray(getattr(s, "values", s), dtype=np.float64)
    slope, intercept = fit_lines(values, N)
    segments = np.column_stack([slope, intercept])
    segments.setflags(write=False)
    return PlaApprox(segments, values.shape[0])


def evaluate(p: PlaApprox) -> np.ndarray:
    """Sample every segment's line at its frame positions (length ``n``)."""
    return _sample(p.slopes, p.intercepts, p.n // p.N).reshape(p.n)


def residual(s, p: PlaApprox) -> float:
    values = np.asarray(getattr(s, "values", s), dtype=np.float64)
    if values.shape[0] != p.n:
        raise ValueError(f"length mismatch: series n={values.shape[0]}, approximation n={p.n}")
    diff = values - evaluate(p)
    return math.sqrt(float(np.dot(diff, diff)))
