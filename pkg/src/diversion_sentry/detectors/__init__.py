"""Sequential diversion detectors and their training entry points."""
from .base import (
    BaseDetector,
    DetectorState,
    ShiftSpec,
    TrainingError,
    cusum_step,
    first_crossings,
    glr_shift_llr,
)
from .cusum import GCusumDetector, GMCusumDetector
from .ks import KSDetector
from .mcusum import MCusumDetector
from .persistence import KINDS, ModelFormatError, dumps_model, loads_model, model_from_dict, model_to_dict

DETECTORS = {
    "ks": KSDetector,
    "g_cusum": GCusumDetector,
    "gm_cusum": GMCusumDetector,
    "m_cusum": MCusumDetector,
}


def train_ks(training, window: int = 50) -> KSDetector:
    return KSDetector(window=window).fit(training)


def train_g_cusum(training, shift: ShiftSpec = ShiftSpec()) -> GCusumDetector:
    return GCusumDetector(shift=shift).fit(training)


def train_gm_cusum(training, shift: ShiftSpec = ShiftSpec(), k_max: int = 8, rng=0) -> GMCusumDetector:
    return GMCusumDetector(shift=shift, k_max=k_max, random_state=rng).fit(training)


def train_m_cusum(training, shift: ShiftSpec = ShiftSpec(), m_range=(2, 8), rng=0) -> MCusumDetector:
    return MCusumDetector(shift=shift, m_range=m_range, random_state=rng).fit(training)


def ks_step(model: KSDetector, state: DetectorState, obs, threshold: float):
    return model.step(state, obs, threshold)


def g_cusum_step(model: GCusumDetector, state: DetectorState, obs, threshold: float):
    return model.step(state, obs, threshold)


def gm_cusum_step(model: GMCusumDetector, state: DetectorState, obs, threshold: float):
    return model.step(state, obs, threshold)


def m_cusum_step(model: MCusumDetector, state: DetectorState, obs, threshold: float):
    return model.step(state, obs, threshold)


__all__ = [
    "BaseDetector",
    "DETECTORS",
    "DetectorState",
    "GCusumDetector",
    "GMCusumDetector",
    "KINDS",
    "KSDetector",
    "MCusumDetector",
    "ModelFormatError",
    "ShiftSpec",
    "TrainingError",
    "cusum_step",
    "dumps_model",
    "first_crossings",
    "g_cusum_step",
    "glr_shift_llr",
    "gm_cusum_step",
    "ks_step",
    "loads_model",
    "m_cusum_step",
    "model_from_dict",
    "model_to_dict",
    "train_g_cusum",
    "train_gm_cusum",
    "train_ks",
    "train_m_cusum",
]
