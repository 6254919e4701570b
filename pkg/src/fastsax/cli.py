"""Command-line interface: build, query, bench and verify."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, pla
from .index import IndexFormatError, LevelConfig, build_index, default_levels, load_index, save_index
from .query import RangeQuery, linear_scan, range_query
from .sax import breakpoints, mindist, paa, paa_dist, sax_word
from .series import euclidean, load_ucr, parse_ucr_line, znormalize_values

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BUG = 3


class CliError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _level_config(levels, a, n) -> LevelConfig:
    levels = levels or default_levels(n)
    for N in levels:
        if N < 1 or n % N:
            raise CliError(f"level {N} does not divide series length n={n}")
    return LevelConfig(tuple(levels), a)


def _load_query(spec: str, data) -> np.ndarray:
    """Normalized query values; ``data`` must already be normalized."""
    if spec.startswith("row:"):
        try:
            k = int(spec[4:])
        except ValueError:
            raise CliError(f"bad row reference {spec!r}") from None
        if not 0 <= k < len(data):
            raise CliError(f"row {k} outside dataset of {len(data)} series")
        return data.values[k]
    else:
        lines = [
            ln for ln in Path(spec).read_text().splitlines()
            if ln.strip() and not ln.strip().startswith("#")
        ]
        if len(lines) != 1:
            raise CliError(f"{spec}: query file must hold exactly one series, found {len(lines)}")
        try:
            raw = parse_ucr_line(lines[0])[1]
        except ValueError as exc:
            raise CliError(f"{spec}: {exc}") from None
    if raw.shape[0] != data.n:
        raise CliError(f"query length {raw.shape[0]} does not match series length n={data.n}")
    return znormalize_values(raw)


def cmd_build(args) -> int:
    data = load_ucr(args.data).normalize()
    config = _level_config(args.levels, args.alphabet, data.n)
    idx = build_index(data, config)
    save_index(idx, args.index)
    print(f"indexed {len(idx)} series, n={idx.n}, a={config.alphabet_size}")
    for level, N in enumerate(config.levels):
        print(f"level {level}: frames={N} mean_residual={idx.residuals[:, level].mean():.6f}")
    return EXIT_OK


def cmd_query(args) -> int:
    idx = load_index(args.index)
    data = load_ucr(args.data).normalize()
    rq = RangeQuery(_load_query(args.query, data), args.epsilon)
    report = range_query(idx, data, rq)
    if args.json:
        print(json.dumps(report.as_dict(), sort_keys=True))
        return EXIT_OK
    answers = report.sorted_answers()
    print(f"answers ({len(answers)}): {' '.join(map(str, answers))}")
    for st in report.levels:
        print(
            f"level {st.level} frames={st.frames}: tested={st.tested} "
            f"excluded_residual={st.excluded_residual} excluded_mindist={st.excluded_mindist}"
        )
    print(f"candidates_after_cascade: {report.candidates_after_cascade}")
    ops = report.op_counts.as_dict()
    print("ops: " + " ".join(f"{k}={v}" for k, v in ops.items()))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.data:
        data = load_ucr(args.data).normalize()
        rng = np.random.default_rng(args.seed)
        rows = rng.choice(len(data), size=min(args.queries, len(data)), replace=False)
        queries = data.values[np.sort(rows)]
        name = Path(args.data).stem
    else:
        data, queries = bench.synthetic_workload(args.seed, num_queries=args.queries)
        name = "random_walk"
    levels = args.levels or default_levels(data.n)
    _level_config(levels, args.alphabet_list[0], data.n)
    if not 0 <= args.baseline_level < len(levels):
        raise CliError(f"baseline level {args.baseline_level} outside [0, {len(levels) - 1}]")
    order = list(range(len(levels)))
    if args.order == "reverse":
        order.reverse()
    model = bench.CostModel.from_file(args.cost_model) if args.cost_model else bench.CostModel()
    try:
        results = bench.run_sweep(
            data, queries, args.epsilon_list, args.alphabet_list, levels, model,
            baseline_level=args.baseline_level, order=order, dataset_name=name,
            seed=args.seed, timing=args.wall_clock,
        )
    except bench.SweepMismatchError as exc:
        print(f"BUG: {exc}", file=sys.stderr)
        return EXIT_BUG
    bench.emit_csv(results, args.out)
    for a, eps, ratio in bench.cell_ratios(results):
        print(f"a={a} epsilon={eps:g} FAST_SAX/SAX={ratio:.4f}")
    return EXIT_OK


def _check(results, name, ok, detail=""):
    results.append((name, ok))
    line = f"{'PASS' if ok else 'FAIL'} {name}"
    print(line + (f": {detail}" if detail and not ok else ""))


def cmd_verify(args) -> int:
    results = []
    try:
        idx = load_index(args.index)
    except (IndexFormatError, OSError) as exc:
        _check(results, "index file integrity", False, str(exc))
        print("FAILED: index file integrity", file=sys.stderr)
        return EXIT_FAIL
    _check(results, "index file integrity", True)
    data = load_ucr(args.data).normalize()
    if data.fingerprint() != idx.dataset_fingerprint:
        _check(results, "dataset fingerprint", False, "index was built from a different dataset")
        print("FAILED: dataset fingerprint", file=sys.stderr)
        return EXIT_FAIL
    _check(results, "dataset fingerprint", True)

    table = breakpoints(idx.config.alphabet_size)
    bad = []
    for row in range(len(idx)):
        s = data.values[row]
        for level, N in enumerate(idx.config.levels):
            entry = idx.entry(row, level)
            res = pla.residual(s, pla.fit_pla(s, N))
            if abs(res - entry.residual) > 1e-9 or entry.word != sax_word(s, N, table):
                bad.append((data.ids[row], level))
    _check(results, "entries match recomputation", not bad, f"{len(bad)} mismatches, first {bad[:3]}")
    mono = np.all(np.diff(idx.residuals, axis=1) >= -1e-9)
    _check(results, "residuals nonincreasing toward lower levels", bool(mono))

    rng = np.random.default_rng(args.seed)
    count = len(data)
    lb_fail = opt_fail = 0
    for _ in range(args.trials):
        i, j = rng.integers(0, count, 2)
        u, v = data.values[i], data.values[j]
        for N in idx.config.levels:
            md = mindist(sax_word(u, N, table), sax_word(v, N, table), table)
            pd = paa_dist(paa(u, N), paa(v, N))
            if not md <= pd + 1e-9 <= euclidean(u, v) + 2e-9:
                lb_fail += 1
            if pla.residual(u, pla.fit_pla(u, N)) > pla.residual(u, pla.fit_pla(v, N)) + 1e-9:
                opt_fail += 1
    _check(results, "lower-bounding chain", lb_fail == 0, f"{lb_fail} violations")
    _check(results, "projection optimality", opt_fail == 0, f"{opt_fail} violations")

    q_fail = 0
    for _ in range(args.trials):
        base = data.values[rng.integers(0, count)]
        q = znormalize_values(base + rng.normal(0, rng.uniform(0.01, 0.5), data.n))
        dists = np.sqrt(((data.values - q) ** 2).sum(axis=1))
        eps = float(np.quantile(dists, rng.uniform(0, 0.2)))
        rq = RangeQuery(q, eps)
        if set(range_query(idx, data, rq).answers) != linear_scan(data, rq):
            q_fail += 1
    _check(results, "range queries match linear scan", q_fail == 0, f"{q_fail} mismatches")

    failed = [name for name, ok in results if not ok]
    if failed:
        print("FAILED: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastsax", description="Exact SAX range queries with residual pruning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and save a multi-level index")
    p.add_argument("--data", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--alphabet", type=int, default=10)
    p.add_argument("--levels", type=_int_list, default=None, help="frame counts, finest first")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run one range query")
    p.add_argument("--index", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--query", required=True, help="one-line UCR file or row:k")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="FAST_SAX vs SAX operation-count sweep")
    p.add_argument("--data", default=None, help="UCR file (default: synthetic random walks)")
    p.add_argument("--alphabet-list", type=_int_list, default=[3, 10, 20])
    p.add_argument("--epsilon-list", type=_float_list, default=[1.0, 2.0, 3.0, 4.0])
    p.add_argument("--levels", type=_int_list, default=None)
    p.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--cost-model", default=None, help="JSON object of per-class weights")
    p.add_argument("--baseline-level", type=int, default=0)
    p.add_argument("--queries", type=int, default=bench.DEFAULT_QUERIES, help="queries per cell")
    p.add_argument("--order", choices=("paper", "reverse"), default="paper",
                   help="visit levels finest-first (paper) or coarsest-first")
    p.add_argument("--wall-clock", action="store_true", help="record wall-clock seconds")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check an index against its dataset")
    p.add_argument("--index", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "epsilon", None) is not None and args.epsilon < 0:
        parser.error("--epsilon must be >= 0")
    if hasattr(args, "epsilon_list") and (not args.epsilon_list or min(args.epsilon_list) < 0):
        parser.error("--epsilon-list must be nonempty and >= 0")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
