import itertools
import math

import numpy as np
import pytest

from fastsax.index import LevelConfig, build_index
from fastsax.pla import fit_pla, residual
from fastsax.query import (
    OpCounts,
    RangeQuery,
    exclude_by_mindist,
    exclude_by_residual,
    linear_scan,
    query_residuals,
    range_query,
    sax_only_query,
)
from fastsax.sax import SaxWord, breakpoints, sax_word
from fastsax.series import Dataset
from oracles import naive_euclidean, naive_znorm, random_walk_rows


def naive_answers(data, q, eps):
    return {sid for sid, row in zip(data.ids, data.values) if naive_euclidean(row, q) <= eps}


def workload(rng, count=200, n=64, levels=(16, 8, 4), a=10):
    data = Dataset(list(range(count)), random_walk_rows(rng, count, n), normalized=True)
    return data, build_index(data, LevelConfig(levels, a))


def near_query(rng, data):
    base = data.values[rng.integers(len(data))]
    return np.array(naive_znorm(list(base + rng.normal(0, rng.uniform(0.01, 0.6), data.n))))


def test_exclude_by_residual_examples():
    assert exclude_by_residual(5.0, 1.0, 2.0)
    assert not exclude_by_residual(1.3, 1.3, 0.0)
    assert exclude_by_residual(0.1, 0.0, 0.0)
    assert not exclude_by_residual(3.0, 1.0, 2.0)  # boundary stays a candidate


def test_exclude_by_mindist_examples(rng):
    t = breakpoints(4)
    w1 = SaxWord(np.array([0, 0, 2, 2]), 4, 16)
    w2 = SaxWord(np.array([2, 2, 0, 0]), 4, 16)
    assert not exclude_by_mindist(w1, w1, t, 0.0)
    assert exclude_by_mindist(w1, w2, t, 2.0)
    for a in (3, 10, 20):
        t = breakpoints(a)
        ceiling = math.sqrt(64) * t.betas[-1] * 2
        for _ in range(200):
            wa = SaxWord(rng.integers(0, a, 8), a, 64)
            wb = SaxWord(rng.integers(0, a, 8), a, 64)
            assert not exclude_by_mindist(wa, wb, t, ceiling + 1e-9)


def test_query_residuals(rng):
    cfg = LevelConfig((16, 8, 4), 5)
    pos = np.arange(16)
    linear = np.concatenate([rng.normal() * pos + rng.normal() for _ in range(4)])
    assert all(r <= 1e-12 for r in query_residuals(linear, cfg).residuals)
    q = random_walk_rows(rng, 1, 64)[0]
    rep = query_residuals(q, cfg)
    assert list(rep.residuals) == sorted(rep.residuals)
    t = breakpoints(5)
    for r, w, N in zip(rep.residuals, rep.words, cfg.levels):
        assert r == pytest.approx(residual(q, fit_pla(q, N)), abs=1e-12)
        assert w == sax_word(q, N, t)
    with pytest.raises(ValueError):
        query_residuals(q[:60], cfg)


def test_range_query_query_validation():
    with pytest.raises(ValueError, match="epsilon"):
        RangeQuery(np.zeros(4), -1)
    with pytest.raises(ValueError, match="epsilon"):
        RangeQuery(np.zeros(4), math.nan)


def test_huge_epsilon_returns_everything(rng):
    data, idx = workload(rng, 50)
    rep = range_query(idx, data, RangeQuery(data.values[0], 1e6))
    assert rep.answers == set(data.ids)


def test_self_match_at_zero_epsilon(rng):
    data, idx = workload(rng, 50)
    for k in (0, 17, 49):
        rq = RangeQuery(data.values[k], 0.0)
        assert k in range_query(idx, data, rq).answers
        assert k in sax_only_query(idx, data, rq).answers


def test_linear_scan_basics(rng):
    data, _ = workload(rng, 50)
    q = random_walk_rows(rng, 1, 64)[0]
    assert linear_scan(data, RangeQuery(q, 0.0)) == set()
    assert linear_scan(data, RangeQuery(q, 1e9)) == set(data.ids)
    prev = set()
    for eps in np.linspace(0, 15, 16):
        cur = linear_scan(data, RangeQuery(q, eps))
        assert prev <= cur
        prev = cur
    with pytest.raises(ValueError):
        linear_scan(data, RangeQuery(q[:10], 1.0))


def test_fingerprint_mismatch_rejected(rng):
    data, idx = workload(rng, 20)
    other = Dataset(data.ids, random_walk_rows(rng, 20, 64), normalized=True)
    with pytest.raises(ValueError, match="fingerprint"):
        range_query(idx, other, RangeQuery(data.values[0], 1.0))
    with pytest.raises(ValueError, match="length"):
        range_query(idx, data, RangeQuery(data.values[0][:32], 1.0))


@pytest.mark.parametrize("a, levels", [(3, (16,)), (10, (16, 8)), (20, (32, 8, 4)), (5, (4, 2))])
def test_exactness_against_naive_oracle(rng, a, levels):
    levels = tuple(sorted(levels, reverse=True))
    data, idx = workload(rng, 150, 64, levels, a)
    for _ in range(40):
        q = near_query(rng, data)
        for eps in (0.0, 0.5, 1.0, 2.0, 4.0, float(rng.uniform(0, 8))):
            rq = RangeQuery(q, eps)
            expected = naive_answers(data, q, eps)
            fast = range_query(idx, data, rq)
            assert fast.answers == expected
            assert fast.answers <= fast.candidates
            assert sax_only_query(idx, data, rq).answers == expected
            assert linear_scan(data, rq) == expected


def test_each_exclusion_is_sound(rng):
    data, idx = workload(rng, 200, 64, (16, 8, 4), 10)
    t = breakpoints(10)
    for _ in range(15):
        q = near_query(rng, data)
        rep = query_residuals(q, idx.config)
        for eps in (0.5, 1.0, 2.0, 4.0):
            for row, level in itertools.product(range(len(data)), range(3)):
                e = idx.entry(row, level)
                excluded = exclude_by_residual(e.residual, rep.residuals[level], eps) or exclude_by_mindist(
                    rep.words[level], e.word, t, eps
                )
                if excluded:
                    assert naive_euclidean(data.values[row], q) > eps


def test_counters_conserve_and_are_deterministic(rng):
    data, idx = workload(rng, 200)
    for _ in range(10):
        rq = RangeQuery(near_query(rng, data), float(rng.uniform(0, 6)))
        rep = range_query(idx, data, rq)
        excl = sum(s.excluded_residual + s.excluded_mindist for s in rep.levels)
        assert excl + rep.candidates_after_cascade == len(data)
        assert rep.levels[0].tested == len(data)
        for prev, cur in zip(rep.levels, rep.levels[1:]):
            assert cur.tested == prev.tested - prev.excluded_residual - prev.excluded_mindist
        assert range_query(idx, data, rq) == rep
        base = sax_only_query(idx, data, rq)
        assert base.excluded_residual == 0
        assert base.excluded_mindist + base.candidates_after_cascade == len(data)
        assert rep.candidates <= base.candidates
        assert set(base.op_counts.as_dict()) == set(rep.op_counts.as_dict())


def test_answers_nested_in_epsilon(rng):
    data, idx = workload(rng, 200)
    q = near_query(rng, data)
    prev = frozenset()
    for eps in np.linspace(0, 10, 21):
        cur = range_query(idx, data, RangeQuery(q, eps)).answers
        assert prev <= cur
        prev = cur


def test_early_termination_skips_levels():
    x = np.array(naive_znorm(list(np.sin(np.linspace(0, 6, 64)))))
    data = Dataset(range(5), np.tile(x, (5, 1)), normalized=True)
    idx = build_index(data, LevelConfig((16, 8, 4), 20))
    rep = range_query(idx, data, RangeQuery(-x, 0.1))
    assert rep.levels[0].excluded_residual + rep.levels[0].excluded_mindist == 5
    assert [s.tested for s in rep.levels] == [5, 0, 0]
    assert rep.answers == frozenset() and rep.candidates_after_cascade == 0


def test_level_order_override(rng):
    data, idx = workload(rng, 100)
    rq = RangeQuery(near_query(rng, data), 2.0)
    rev = range_query(idx, data, rq, order=[2, 1, 0])
    assert rev.answers == range_query(idx, data, rq).answers
    assert [s.frames for s in rev.levels] == [4, 8, 16]
    with pytest.raises(ValueError):
        range_query(idx, data, rq, order=[3])
    with pytest.raises(ValueError):
        sax_only_query(idx, data, rq, baseline_level=5)


def test_op_counts_arithmetic():
    a = OpCounts(adds=1, mults=2, compares=3, sqrts=4, abss=5, lookups=6)
    b = a + a
    assert b.as_dict() == {k: 2 * v for k, v in a.as_dict().items()}
    assert a.total() == 21
    c = OpCounts()
    c.distance_test(2, 10)
    assert c.as_dict() == dict(adds=38, mults=20, compares=2, sqrts=2, abss=0, lookups=0)
