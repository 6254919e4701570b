"""Exact time-series range queries with SAX and precomputed residual pruning."""

from .bench import BenchResult, CostModel, emit_csv, run_sweep, tightness_report
from .index import (
    IndexFormatError,
    LevelConfig,
    LevelEntry,
    MultiLevelIndex,
    build_index,
    default_levels,
    load_index,
    save_index,
)
from .pla import PlaApprox, evaluate, fit_pla, residual
from .query import (
    OpCounts,
    QueryReport,
    RangeQuery,
    exclude_by_mindist,
    exclude_by_residual,
    linear_scan,
    query_residuals,
    range_query,
    sax_only_query,
)
from .sax import (
    BreakpointTable,
    PaaVector,
    SaxWord,
    breakpoints,
    cell_dist,
    mindist,
    paa,
    paa_dist,
    symbolize,
)
from .series import Dataset, TimeSeries, euclidean, load_ucr, znormalize

__version__ = "0.1.0"
