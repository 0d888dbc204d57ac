"""JSON-compatible model documents for trained detectors.

Documents carry a ``kind`` discriminator and one key per model field. Floats
survive a ``json`` round trip exactly because ``json`` writes ``repr``.
"""
from __future__ import annotations

import json

from ..stats import EmbeddingModel, GaussianMixture, GaussianParams, KernelCdf
from .base import BaseDetector, ShiftSpec
from .cusum import GCusumDetector, GMCusumDetector
from .ks import KSDetector
from .mcusum import MCusumDetector

KINDS = ("ks", "g_cusum", "gm_cusum", "m_cusum")


class ModelFormatError(ValueError):
    pass


def _gauss(g: GaussianParams) -> dict:
    return {"mean": g.mean, "std": g.std}


def _mix(m: GaussianMixture) -> dict:
    return {"weights": list(m.weights), "components": [_gauss(c) for c in m.components]}


def _kcdf(k: KernelCdf) -> dict:
    return {"sample_points": k.sample_points.tolist(), "bandwidth": k.bandwidth}


def _shift(s: ShiftSpec) -> dict:
    return {"lower_mult": s.lower_mult, "upper_mult": s.upper_mult}


def model_to_dict(det: BaseDetector) -> dict:
    det._check_fitted()
    if isinstance(det, KSDetector):
        return {
            "kind": "ks",
            "baseline_duration": _kcdf(det.baseline_duration_),
            "baseline_power": _kcdf(det.baseline_power_),
            "window": det.window,
            "grid_size": det.grid_size,
        }
    if isinstance(det, GCusumDetector):
        return {
            "kind": "g_cusum",
            "duration_g0": _gauss(det.duration_g0_),
            "power_g0": _gauss(det.power_g0_),
            "shift": _shift(det.shift),
        }
    if isinstance(det, GMCusumDetector):
        return {
            "kind": "gm_cusum",
            "duration_mix": _mix(det.duration_mix_),
            "power_mix": _mix(det.power_mix_),
            "shift": _shift(det.shift),
        }
    if isinstance(det, MCusumDetector):
        emb = det.embedding_
        return {
            "kind": "m_cusum",
            "embedding": {
                "duration_center": emb.duration_center,
                "duration_scale": emb.duration_scale,
                "power_center": emb.power_center,
                "power_scale": emb.power_scale,
            },
            "m": det.m_,
            "energy_g0": [_gauss(g) for g in det.energy_g0_],
            "power_g0": [_gauss(g) for g in det.power_g0_],
            "shift": _shift(det.shift),
        }
    raise TypeError(f"cannot serialize {type(det).__name__}")


def model_from_dict(doc: dict) -> BaseDetector:
    """Rebuild a fitted detector. Raises :class:`ModelFormatError` on bad documents."""
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
    try:
        if kind == "ks":
            det = KSDetector(window=int(doc["window"]), grid_size=doc.get("grid_size", 128))
            return det._set_baselines(KernelCdf(**doc["baseline_duration"]), KernelCdf(**doc["baseline_power"]))
        shift = ShiftSpec(**doc["shift"])
        if kind == "g_cusum":
            det = GCusumDetector(shift=shift)
            det.duration_g0_ = GaussianParams(**doc["duration_g0"])
            det.power_g0_ = GaussianParams(**doc["power_g0"])
            return det
        if kind == "gm_cusum":
            return GMCusumDetector(shift=shift)._set_mixtures(
                GaussianMixture(**doc["duration_mix"]), GaussianMixture(**doc["power_mix"])
            )
        det = MCusumDetector(shift=shift)
        det.embedding_ = EmbeddingModel(**doc["embedding"])
        det._set_clusters(
            [GaussianParams(**g) for g in doc["energy_g0"]], [GaussianParams(**g) for g in doc["power_g0"]]
        )
        if det.m_ != int(doc["m"]):
            raise ModelFormatError(f"m={doc['m']} but {det.m_} clusters are listed")
        return det
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed {kind} model: {exc!r}") from None


def dumps_model(det: BaseDetector) -> str:
    return json.dumps(model_to_dict(det), indent=2)


def loads_model(text: str) -> BaseDetector:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc)
