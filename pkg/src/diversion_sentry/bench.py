"""Monte Carlo estimation of detection delay and false alarm rate.

A trial simulates one test stream and records when the detector first
alarms. Relative to the first diverted shipment ``T*`` the alarm is a false
alarm (``T < T*``), a detection (``T >= T*``, delay ``T - T*``) or censored
(no alarm before the stream ends).

Trial ``i`` always draws its stream from ``RngStream(seed).substream(i)``,
so every threshold and every detector sees the same streams. Results do
not depend on how trials are spread over worker threads.
"""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from sklearn.base import clone

from .core import RngStream
from .detectors import DETECTORS, BaseDetector
from .simulator import ScenarioConfig, generate

THREADS_ENV = "DIVERSION_SENTRY_THREADS"
CURVE_COLUMNS = ("algo", "threshold", "trials", "n_false", "n_detect", "n_censored", "far", "add", "add_ci95")
_TRAINING_KEY = 0xF17


@dataclass(frozen=True)
class TrialOutcome:
    kind: Literal["false_alarm", "detection", "censored"]
    alarm_time: Optional[int] = None
    change_point: Optional[int] = None

    def __post_init__(self):
        t, c = self.alarm_time, self.change_point
        if self.kind == "false_alarm":
            ok = t is not None and (c is None or t < c)
        elif self.kind == "detection":
            ok = t is not None and c is not None and t >= c
        elif self.kind == "censored":
            ok = t is None
        else:
            raise ValueError(f"unknown outcome kind {self.kind!r}")
        if not ok:
            raise ValueError(f"inconsistent {self.kind} outcome: alarm {t}, change point {c}")

    @property
    def delay(self) -> Optional[int]:
        return self.alarm_time - self.change_point if self.kind == "detection" else None


def classify(alarm_time: Optional[int], change_point: Optional[int]) -> TrialOutcome:
    """An alarm exactly at the change point counts as a detection with delay 0."""
    if alarm_time is None:
        return TrialOutcome("censored", None, change_point)
    if change_point is None or alarm_time < change_point:
        return TrialOutcome("false_alarm", alarm_time, change_point)
    return TrialOutcome("detection", alarm_time, change_point)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    trials: int
    n_false: int
    n_detect: int
    n_censored: int
    far: float
    add: Optional[float]
    add_ci_halfwidth: Optional[float]


def estimate(outcomes: Sequence[TrialOutcome], threshold: float) -> CurvePoint:
    """False alarm rate over all trials and mean delay over detecting trials.

    ``add_ci_halfwidth`` is the 95 % normal-approximation half-width; it is
    ``None`` with fewer than two detections, as is ``add`` with none.
    """
    if not outcomes:
        raise ValueError("need at least one outcome")
    n = len(outcomes)
    n_false = sum(o.kind == "false_alarm" for o in outcomes)
    delays = np.array([o.delay for o in outcomes if o.kind == "detection"], dtype=float)
    n_detect = delays.size
    add = float(delays.mean()) if n_detect else None
    ci = float(1.96 * delays.std(ddof=1) / math.sqrt(n_detect)) if n_detect >= 2 else None
    return CurvePoint(float(threshold), n, n_false, n_detect, n - n_false - n_detect, n_false / n, add, ci)


def resolve_threads(n_threads: Optional[int] = None) -> int:
    if n_threads is None:
        n_threads = int(os.environ.get(THREADS_ENV, "0") or 0)
    if n_threads <= 0:
        n_threads = os.cpu_count() or 1
    return n_threads


def trial_stream(seed: int, trial: int) -> RngStream:
    return RngStream(seed).substream(trial)


def training_series(config: ScenarioConfig, seed: int):
    """Training stream shared by all trials of an experiment."""
    return generate(config, config.training_length, None, RngStream(seed).substream(_TRAINING_KEY))


def trial_outcomes(
    detector: BaseDetector,
    thresholds: Sequence[float],
    config: ScenarioConfig,
    rng: RngStream,
    retrain: bool = False,
) -> list[TrialOutcome]:
    """Simulate one test stream and classify the alarm for each threshold."""
    if retrain:
        training = generate(config, config.training_length, None, rng.substream(0))
        detector = clone(detector).fit(training)
    test = generate(config, config.test_length, config.change_point, rng.substream(1))
    alarms = detector.alarm_times(test, thresholds)
    return [classify(a, test.change_point) for a in alarms]


def run_trial(detector: BaseDetector, threshold: float, config: ScenarioConfig, rng: RngStream) -> TrialOutcome:
    return trial_outcomes(detector, [threshold], config, rng)[0]


def sweep(
    detector: BaseDetector,
    thresholds: Sequence[float],
    trials: int,
    config: ScenarioConfig,
    seed: int,
    n_threads: Optional[int] = None,
    retrain: bool = False,
) -> list[CurvePoint]:
    """One :class:`CurvePoint` per threshold, from ``trials`` shared-stream trials."""
    thresholds = [float(x) for x in thresholds]
    if not thresholds:
        raise ValueError("need at least one threshold")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    if trials < 1:
        raise ValueError("need at least one trial")

    def one(i):
        return trial_outcomes(detector, thresholds, config, trial_stream(seed, i), retrain)

    workers = min(resolve_threads(n_threads), trials)
    if workers == 1:
        per_trial = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            per_trial = list(pool.map(one, range(trials)))
    return [estimate([row[k] for row in per_trial], th) for k, th in enumerate(thresholds)]


def default_thresholds(algo: str, n: int = 25) -> np.ndarray:
    """Log-spaced thresholds covering the useful range of each detector."""
    if algo == "ks":
        return np.geomspace(0.05, 0.6, n)
    return np.geomspace(1.0, 1000.0, n)


def make_detector(algo: str, seed: int = 0, **params) -> BaseDetector:
    cls = DETECTORS[algo]
    if "random_state" in cls().get_params():
        params.setdefault("random_state", seed)
    return cls(**params)


def run_experiment(
    config: ScenarioConfig,
    algos: dict,
    trials: int,
    seed: int,
    n_threads: Optional[int] = None,
    retrain: bool = False,
) -> dict:
    """Train once per algorithm on shared training data, then sweep.

    ``algos`` maps algorithm name to ``(detector, thresholds)``.
    """
    training = None if retrain else training_series(config, seed)
    curves = {}
    for name, (det, thresholds) in algos.items():
        if not retrain:
            det = clone(det).fit(training)
        curves[name] = sweep(det, thresholds, trials, config, seed, n_threads, retrain)
    return curves


def _num(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def curves_to_csv(curves: dict) -> str:
    buf = io.StringIO()
    buf.write(",".join(CURVE_COLUMNS) + "\n")
    for algo, points in curves.items():
        for p in points:
            buf.write(",".join([
                algo, _num(p.threshold), str(p.trials), str(p.n_false), str(p.n_detect),
                str(p.n_censored), _num(p.far), _num(p.add), _num(p.add_ci_halfwidth),
            ]) + "\n")
    return buf.getvalue()


def add_at_far(points: Sequence[CurvePoint], far_levels) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate ADD and its CI half-width at the given FAR levels.

    Points without a defined ADD are skipped; points sharing a FAR value are
    averaged. Levels outside the curve's FAR range give NaN.
    """
    levels = np.asarray(far_levels, dtype=float)
    pts = [p for p in points if p.add is not None]
    if not pts:
        nan = np.full(levels.shape, np.nan)
        return nan, nan.copy()
    far = np.array([p.far for p in pts])
    add = np.array([p.add for p in pts])
    ci = np.array([p.add_ci_halfwidth if p.add_ci_halfwidth is not None else np.nan for p in pts])
    ux = np.unique(far)
    ua = np.array([add[far == x].mean() for x in ux])
    uc = np.array([ci[far == x].mean() for x in ux])
    inside = (levels >= ux[0]) & (levels <= ux[-1])
    a = np.where(inside, np.interp(levels, ux, ua), np.nan)
    c = np.where(inside, np.interp(levels, ux, uc), np.nan)
    return a, c
