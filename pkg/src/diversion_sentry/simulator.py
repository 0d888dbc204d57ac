"""Shipment stream simulator for an enrichment facility with optional diversion.

Each shipment is served for one customer pattern, i.e. one (energy level,
power level) pair. Energy and power are drawn from per-level Gaussians and the
duration follows as energy / power. From the change point on, each shipment
carries a diversion with probability ``diversion_prob``; a diversion adds a
fixed amount of energy and power on top of the regular draw.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import DiversionSentryError, LabeledSeries, RngStream, ShipmentSeries

# Reference energies for 1 t of LEU at 3 / 3.5 / 4 % and 1 kg of 90 % HEU (MTSWU).
LEU_ENERGY_MTSWU = {0.03: 3.43, 0.035: 4.35, 0.04: 5.29}
HEU_KG_ENERGY_MTSWU = 0.1934


class ConfigError(DiversionSentryError, ValueError):
    """An invalid scenario configuration."""


@dataclass(frozen=True)
class CustomerPattern:
    energy_mean: float
    energy_std: float
    power_mean: float
    power_std: float

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ConfigError(f"{k} must be positive, got {v}")


def _uniform_table(n_energy: int, n_power: int) -> tuple:
    p = 1.0 / (n_energy * n_power)
    return tuple(tuple(p for _ in range(n_power)) for _ in range(n_energy))


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario parameters.

    ``pattern_probs[i][j]`` is the probability that a shipment uses energy
    level ``i`` and power level ``j``; pattern ids are ``i * n_power + j + 1``.
    ``change_point`` indexes the test stream; ``test_length + 1`` means no change.
    """

    energy_levels: tuple = ((3.43, 0.03), (4.35, 0.03), (5.29, 0.03))
    power_levels: tuple = ((0.1, 0.001), (0.2, 0.001))
    pattern_probs: Optional[tuple] = None
    training_length: int = 1000
    test_length: int = 3000
    change_point: int = 1001
    diversion_prob: float = 0.2
    diversion_energy_add: float = HEU_KG_ENERGY_MTSWU
    diversion_power_add: float = 0.001

    def __post_init__(self):
        energy = tuple((float(m), float(s)) for m, s in self.energy_levels)
        power = tuple((float(m), float(s)) for m, s in self.power_levels)
        if not energy or not power:
            raise ConfigError("at least one energy level and one power level are required")
        object.__setattr__(self, "energy_levels", energy)
        object.__setattr__(self, "power_levels", power)
        probs = self.pattern_probs
        if probs is None:
            probs = _uniform_table(len(energy), len(power))
        probs = tuple(tuple(float(p) for p in row) for row in probs)
        object.__setattr__(self, "pattern_probs", probs)

        if len(probs) != len(energy) or any(len(row) != len(power) for row in probs):
            raise ConfigError(
                f"pattern_probs must be a {len(energy)} x {len(power)} table (energy levels x power levels)"
            )
        flat = np.array(probs).ravel()
        if (flat < 0).any():
            raise ConfigError("pattern_probs entries must be nonnegative")
        if abs(flat.sum() - 1.0) > 1e-12:
            raise ConfigError(f"pattern_probs must sum to 1, got {flat.sum():.17g}")
        for m, s in energy + power:
            CustomerPattern(m, s, 1.0, 1.0)  # positivity check
        if not 0.0 <= self.diversion_prob <= 1.0:
            raise ConfigError(f"diversion_prob must lie in [0, 1], got {self.diversion_prob}")
        if self.training_length < 0 or self.test_length < 0:
            raise ConfigError("stream lengths must be nonnegative")
        if not 1 <= self.change_point <= self.test_length + 1:
            raise ConfigError(
                f"change_point must lie in [1, test_length + 1] = [1, {self.test_length + 1}], got {self.change_point}"
            )

    @property
    def patterns(self) -> list[CustomerPattern]:
        """Customer patterns in pattern-id order."""
        return [CustomerPattern(em, es, pm, ps) for (em, es), (pm, ps) in itertools.product(self.energy_levels, self.power_levels)]

    @property
    def pattern_weights(self) -> np.ndarray:
        return np.array(self.pattern_probs, dtype=float).ravel()

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig.from_dict(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["energy_levels"] = [list(x) for x in self.energy_levels]
        d["power_levels"] = [list(x) for x in self.power_levels]
        d["pattern_probs"] = [list(r) for r in self.pattern_probs]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario field(s): {', '.join(sorted(unknown))}")
        kw = dict(d)
        try:
            for k in ("energy_levels", "power_levels", "pattern_probs"):
                if kw.get(k) is not None:
                    kw[k] = tuple(tuple(row) for row in kw[k])
            for k in ("training_length", "test_length", "change_point"):
                if k in kw:
                    if int(kw[k]) != kw[k]:
                        raise ConfigError(f"{k} must be an integer")
                    kw[k] = int(kw[k])
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed scenario: {exc}") from None


def default_paper_scenario() -> ScenarioConfig:
    """Six customer patterns: 3 enrichment levels x 2 delivery modes, 1 kg HEU diversions."""
    return ScenarioConfig()


def _positive_normal(gen: np.random.Generator, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    x = gen.normal(mean, std)
    bad = np.flatnonzero(x <= 0)
    while bad.size:
        x[bad] = gen.normal(mean[bad], std[bad])
        bad = bad[x[bad] <= 0]
    return x


def generate(config: ScenarioConfig, length: int, change_point: Optional[int], rng: RngStream) -> LabeledSeries:
    """Simulate ``length`` shipments.

    Random draws are consumed in a fixed order independent of the diversion
    settings, so the same ``rng`` with and without diversion gives the same
    base energies and powers.
    """
    if length < 0:
        raise ConfigError("length must be nonnegative")
    gen = rng.generator()
    n_power = len(config.power_levels)
    weights = config.pattern_weights
    pattern = gen.choice(weights.size, size=length, p=weights)
    e_idx, p_idx = np.divmod(pattern, n_power)
    e_mean, e_std = np.array(config.energy_levels, dtype=float).T
    p_mean, p_std = np.array(config.power_levels, dtype=float).T
    energy = _positive_normal(gen, e_mean[e_idx], e_std[e_idx])
    power = _positive_normal(gen, p_mean[p_idx], p_std[p_idx])
    u = gen.random(length)

    t = np.arange(1, length + 1)
    eligible = t >= change_point if change_point is not None else np.zeros(length, bool)
    diverted = eligible & (u < config.diversion_prob)
    energy = energy + diverted * config.diversion_energy_add
    power = power + diverted * config.diversion_power_add
    return LabeledSeries(ShipmentSeries(energy / power, power), pattern_id=pattern + 1, diverted=diverted)


def generate_training_and_test(config: ScenarioConfig, rng: RngStream) -> tuple[LabeledSeries, LabeledSeries]:
    """Diversion-free training stream and test stream, from independent substreams."""
    training = generate(config, config.training_length, None, rng.substream(0))
    test = generate(config, config.test_length, config.change_point, rng.substream(1))
    return training, test


def generate_test(config: ScenarioConfig, rng: RngStream) -> LabeledSeries:
    """Only the test half of :func:`generate_training_and_test`."""
    return generate(config, config.test_length, config.change_point, rng.substream(1))
