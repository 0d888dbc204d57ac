import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diversion_sentry import bench
from diversion_sentry.bench import CurvePoint, TrialOutcome, classify, estimate
from diversion_sentry.core import RngStream
from diversion_sentry.detectors import GCusumDetector, train_g_cusum, train_m_cusum


@pytest.fixture(scope="module")
def small_config(paper_config):
    return paper_config.replace(test_length=300, change_point=101)


@pytest.fixture(scope="module")
def g_model(paper_training):
    return train_g_cusum(paper_training)


@pytest.fixture(scope="module")
def m_model(paper_training):
    return train_m_cusum(paper_training, rng=0)


def det(delay, cp=100):
    return classify(cp + delay, cp)


def test_estimate_examples():
    p = estimate([det(2), det(4)], 1.0)
    assert (p.add, p.far, p.n_detect) == (3.0, 0.0, 2)
    p = estimate([classify(5, 100), det(5), classify(None, 100), det(5)], 2.0)
    assert (p.far, p.add, p.n_censored, p.n_false, p.trials) == (0.25, 5.0, 1, 1, 4)
    assert p.add_ci_halfwidth == 0.0
    p = estimate([classify(None, 10)] * 3, 1.0)
    assert p.add is None and p.add_ci_halfwidth is None and p.n_censored == 3
    with pytest.raises(ValueError):
        estimate([], 1.0)


def test_estimate_ci_halfwidth():
    delays = [1, 2, 4, 9]
    p = estimate([det(d) for d in delays], 1.0)
    assert p.add_ci_halfwidth == pytest.approx(1.96 * np.std(delays, ddof=1) / 2, rel=1e-12)
    assert estimate([det(3)], 1.0).add_ci_halfwidth is None


@given(st.lists(st.one_of(st.none(), st.integers(1, 400)), min_size=1, max_size=50), st.integers(1, 400))
def test_classification_is_a_partition(alarms, cp):
    outcomes = [classify(a, cp) for a in alarms]
    p = estimate(outcomes, 0.0)
    assert p.n_false + p.n_detect + p.n_censored == p.trials == len(alarms)
    assert p.far == p.n_false / p.trials
    for a, o in zip(alarms, outcomes):
        if a is None:
            assert o.kind == "censored"
        elif a < cp:
            assert o.kind == "false_alarm"
        else:
            assert o.kind == "detection" and o.delay == a - cp >= 0


def test_alarm_at_change_point_is_detection():
    o = classify(50, 50)
    assert o.kind == "detection" and o.delay == 0


def test_trial_outcome_invariants():
    with pytest.raises(ValueError):
        TrialOutcome("false_alarm", 10, 5)
    with pytest.raises(ValueError):
        TrialOutcome("detection", 4, 5)
    with pytest.raises(ValueError):
        TrialOutcome("censored", 3, 5)


def test_run_trial_edges(g_model, small_config):
    rng = RngStream(1).substream(0)
    assert bench.run_trial(g_model, 1e18, small_config, rng).kind == "censored"
    o = bench.run_trial(g_model, 0.0, small_config, rng)
    assert o.kind == "false_alarm" and o.alarm_time == 1


def test_change_point_is_first_diversion(g_model, small_config):
    rng = RngStream(4).substream(2)
    test = bench.generate(small_config, small_config.test_length, small_config.change_point, rng.substream(1))
    o = bench.run_trial(g_model, 1e18, small_config, rng)
    assert o.change_point == test.change_point >= small_config.change_point
    assert test.diverted[test.change_point - 1]


def test_m_cusum_mostly_detects_quickly(m_model, small_config):
    outcomes = [bench.run_trial(m_model, 40.0, small_config, bench.trial_stream(3, i)) for i in range(40)]
    quick = [o for o in outcomes if o.kind == "detection" and o.delay <= 60]
    assert len(quick) >= 0.8 * len(outcomes)


def test_sweep_deterministic_and_monotone(g_model, small_config):
    th = np.geomspace(1, 300, 12)
    a = bench.sweep(g_model, th, 30, small_config, seed=9, n_threads=1)
    b = bench.sweep(g_model, th, 30, small_config, seed=9, n_threads=1)
    assert a == b
    far = [p.far for p in a]
    assert all(y <= x for x, y in zip(far, far[1:]))
    assert a[0].far > 0 and a[-1].n_false < a[0].n_false


def test_paired_trials_alarm_monotone(g_model, small_config):
    th = np.geomspace(0.5, 500, 15)
    for i in range(100):
        rng = bench.trial_stream(11, i)
        test = bench.generate(small_config, small_config.test_length, small_config.change_point, rng.substream(1))
        times = [np.inf if t is None else t for t in g_model.alarm_times(test, th)]
        assert all(y >= x for x, y in zip(times, times[1:]))
        outs = bench.trial_outcomes(g_model, th, small_config, rng)
        assert [o.alarm_time for o in outs] == [None if np.isinf(t) else t for t in times]


def test_sweep_threads_do_not_matter(g_model, small_config):
    th = np.geomspace(1, 300, 6)
    one = bench.sweep(g_model, th, 16, small_config, seed=2, n_threads=1)
    four = bench.sweep(g_model, th, 16, small_config, seed=2, n_threads=4)
    assert one == four


def test_sweep_validation(g_model, small_config):
    for bad in ([], [2.0, 1.0], [1.0, 1.0]):
        with pytest.raises(ValueError):
            bench.sweep(g_model, bad, 2, small_config, 0, 1)
    with pytest.raises(ValueError):
        bench.sweep(g_model, [1.0], 0, small_config, 0, 1)


def test_retrain_changes_models_not_streams(small_config):
    cfg = small_config.replace(training_length=200)
    rng = bench.trial_stream(5, 0)
    shared = GCusumDetector().fit(bench.training_series(cfg, 5))
    a = bench.trial_outcomes(shared, [1e18], cfg, rng)
    b = bench.trial_outcomes(GCusumDetector(), [1e18], cfg, rng, retrain=True)
    assert a[0].change_point == b[0].change_point


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv(bench.THREADS_ENV, "3")
    assert bench.resolve_threads() == 3
    assert bench.resolve_threads(2) == 2
    monkeypatch.setenv(bench.THREADS_ENV, "0")
    assert bench.resolve_threads() >= 1


def test_curves_csv_format():
    pts = [CurvePoint(1.5, 4, 1, 2, 1, 0.25, 3.0, 0.5), CurvePoint(2.0, 4, 0, 0, 4, 0.0, None, None)]
    text = bench.curves_to_csv({"g_cusum": pts})
    assert text == (
        "algo,threshold,trials,n_false,n_detect,n_censored,far,add,add_ci95\n"
        "g_cusum,1.5,4,1,2,1,0.25,3,0.5\n"
        "g_cusum,2,4,0,0,4,0,,\n"
    )
    assert float(format(0.1, ".17g")) == 0.1


def test_add_at_far():
    pts = [
        CurvePoint(1, 10, 5, 5, 0, 0.5, 1.0, 0.1),
        CurvePoint(2, 10, 2, 8, 0, 0.2, 4.0, 0.4),
        CurvePoint(3, 10, 2, 8, 0, 0.2, 6.0, 0.6),
        CurvePoint(4, 10, 0, 0, 10, 0.0, None, None),
    ]
    add, ci = bench.add_at_far(pts, [0.1, 0.2, 0.35, 0.5, 0.6])
    assert np.isnan(add[0]) and np.isnan(add[-1])
    assert add[1:4] == pytest.approx([5.0, 3.0, 1.0])
    assert ci[1:4] == pytest.approx([0.5, 0.3, 0.1])


def test_default_thresholds_and_factory():
    assert len(bench.default_thresholds("ks")) == 25
    th = bench.default_thresholds("m_cusum", 10)
    assert np.all(np.diff(th) > 0)
    assert bench.make_detector("m_cusum", seed=4).random_state == 4
    assert bench.make_detector("ks", window=20).window == 20
