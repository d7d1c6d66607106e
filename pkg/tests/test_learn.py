import numpy as np
import pytest
from conftest import random_cpt
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzybayes.bnet import Cpt, NetworkStructure
from fuzzybayes.core import DEFAULT_SCALE
from fuzzybayes.learn import (
    IterationRecord,
    LearnConfig,
    SufficientStats,
    encode_records,
    fit_until_converged,
    mle_fit,
    recover_known_cpt,
    sample_from_cpt,
    update_step,
)

SCALES = (DEFAULT_SCALE,) * 3
T = ("e", "e", "e")


def stats_with(counts_by_grade, parents=T):
    st_ = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    recs = [(parents, g) for g, k in counts_by_grade.items() for _ in range(k)]
    st_.add(*encode_records(recs, SCALES, DEFAULT_SCALE))
    return st_


def row_egmp(cpt, parents=T):
    row = cpt.table[cpt.index(parents)]
    return tuple(row[DEFAULT_SCALE.index(g)] for g in "egmp")


def test_mle_examples():
    stats = stats_with({"e": 8, "g": 1, "m": 1})
    assert stats.count(T, "e") == 8 and stats.totals[Cpt.uniform(SCALES).index(T)] == 10
    assert row_egmp(mle_fit(stats, LearnConfig(smoothing=0))) == pytest.approx((0.8, 0.1, 0.1, 0.0), abs=1e-15)
    assert row_egmp(mle_fit(stats, LearnConfig(smoothing=1))) == pytest.approx((9 / 14, 2 / 14, 2 / 14, 1 / 14), abs=1e-15)
    assert row_egmp(mle_fit(stats, LearnConfig(smoothing=0)), ("p", "p", "p")) == (0.25,) * 4


def test_config_validation():
    for kw in ({"smoothing": -1}, {"tau": 0}, {"max_iters": 0}):
        with pytest.raises(ValueError):
            LearnConfig(**kw)


def test_stats_invariants():
    with pytest.raises(ValueError):
        SufficientStats(SCALES, DEFAULT_SCALE, np.zeros((3, 4), dtype=np.int64))
    with pytest.raises(ValueError):
        SufficientStats(SCALES, DEFAULT_SCALE, -np.ones((64, 4), dtype=np.int64))
    s = stats_with({"e": 2, "p": 1})
    assert np.array_equal(s.totals, s.counts.sum(axis=1))
    c = s.copy()
    c.add(np.array([0]), np.array([0]))
    assert s.counts.sum() == 3 and c.counts.sum() == 4


def test_update_step_empty_batch():
    cpt = Cpt.uniform(SCALES)
    stats = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    new, delta = update_step(cpt, stats, [], LearnConfig())
    assert new is cpt and delta == 0.0


def test_update_step_single_record_hand_computed():
    cfg = LearnConfig(smoothing=1.0)
    stats = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    cpt = mle_fit(stats, cfg)
    new, delta = update_step(cpt, stats, [(T, "e")], cfg)
    # row goes from 1/4 each to (2/5, 1/5, 1/5, 1/5)
    assert delta == pytest.approx(2 / 5 - 1 / 4, abs=1e-15)
    assert row_egmp(new) == pytest.approx((0.4, 0.2, 0.2, 0.2), abs=1e-15)


def test_update_step_unknown_labels():
    stats = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    with pytest.raises(KeyError):
        update_step(Cpt.uniform(SCALES), stats, [(("e", "e", "x"), "e")], LearnConfig())
    with pytest.raises(KeyError):
        update_step(Cpt.uniform(SCALES), stats, [(T, "best")], LearnConfig())


def test_update_large_stationary_batch_below_tau():
    rng = np.random.default_rng(0)
    net = NetworkStructure.default()
    truth = random_cpt(rng, net)
    cfg = LearnConfig(smoothing=1.0)
    stats = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    cpt = mle_fit(stats, cfg)
    cpt, _ = update_step(cpt, stats, sample_from_cpt(truth, 4_000_000, rng), cfg)
    _, delta = update_step(cpt, stats, sample_from_cpt(truth, 20_000, rng), cfg)
    assert delta < cfg.tau


def test_fit_until_converged_stops_and_logs():
    rng = np.random.default_rng(1)
    truth = random_cpt(rng, NetworkStructure.default())
    batches = [sample_from_cpt(truth, 200_000, rng) for _ in range(50)]
    res = fit_until_converged(batches, LearnConfig(tau=1e-3), SCALES, DEFAULT_SCALE)
    assert res.converged and res.log[-1].delta < 1e-3 and len(res.log) < 50
    assert [r.iteration for r in res.log] == list(range(1, len(res.log) + 1))
    assert str(res.log[0]).startswith("iter=1\tbatch=200000\tdelta=")


def test_fit_until_converged_respects_max_iters():
    rng = np.random.default_rng(2)
    truth = random_cpt(rng, NetworkStructure.default())
    batches = [sample_from_cpt(truth, 100, rng) for _ in range(10)]
    res = fit_until_converged(batches, LearnConfig(max_iters=3), SCALES, DEFAULT_SCALE)
    assert len(res.log) == 3 and not res.converged
    with pytest.raises(ValueError):
        fit_until_converged([], LearnConfig(), SCALES, DEFAULT_SCALE)


def test_empty_batch_is_not_convergence():
    batch = ([(T, "e")], [], [(T, "g")])
    res = fit_until_converged(batch, LearnConfig(tau=1e-3), SCALES, DEFAULT_SCALE)
    assert [r.batch_size for r in res.log] == [1, 0, 1] and not res.converged


def test_repeated_identical_batches_monotone():
    rng = np.random.default_rng(3)
    truth = random_cpt(rng, NetworkStructure.default())
    batch = sample_from_cpt(truth, 5000, rng)
    res = fit_until_converged([batch] * 200, LearnConfig(smoothing=1.0, max_iters=200), SCALES, DEFAULT_SCALE)
    deltas = [r.delta for r in res.log]
    assert all(b <= a + 1e-15 for a, b in zip(deltas[1:], deltas[2:]))
    assert res.converged


def test_recover_known_cpt_error_shrinks_with_n():
    truth = random_cpt(np.random.default_rng(4), NetworkStructure.default())
    errs = [np.median([recover_known_cpt(truth, n, s) for s in range(5)]) for n in (10_000, 100_000, 1_000_000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02
    with pytest.raises(ValueError):
        recover_known_cpt(truth, 0, 0)


def test_sample_from_cpt_respects_zero_cells():
    table = np.zeros((64, 4))
    table[:, 2] = 1.0
    cpt = Cpt(SCALES, DEFAULT_SCALE, table)
    _, grades = sample_from_cpt(cpt, 1000, np.random.default_rng(0))
    assert set(grades.tolist()) == {2}


def test_iteration_record_format():
    assert str(IterationRecord(3, 10, 0.00012345)) == "iter=3\tbatch=10\tdelta=0.00012345"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 63), st.integers(0, 3)), max_size=60), st.floats(0, 3))
def test_mle_rows_always_valid(records, a):
    stats = SufficientStats.empty(SCALES, DEFAULT_SCALE)
    if records:
        t, g = map(np.array, zip(*records))
        stats.add(t, g)
    cpt = mle_fit(stats, LearnConfig(smoothing=a))
    assert cpt.rows_valid()
