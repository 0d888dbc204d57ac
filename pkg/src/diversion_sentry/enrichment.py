"""Separative work for uranium enrichment.

Default feed and tails assays (0.711 % natural uranium, 0.30 % tails) are a
fitted choice: with them the closed form reproduces the reference energies
used by the scenario (3.43 / 4.35 / 5.29 MTSWU per tonne at 3 / 3.5 / 4 %,
0.1934 MTSWU per kg at 90 %) to within 0.3 %. They are not taken from a
published plant configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DiversionSentryError

NATURAL_FEED_ASSAY = 0.00711
DEFAULT_TAILS_ASSAY = 0.003
KG_SWU_PER_MTSWU = 1000.0


class DomainError(DiversionSentryError, ValueError):
    """Raised for physically meaningless inputs (assay order, zero power)."""


@dataclass(frozen=True)
class EnrichmentSpec:
    product_assay: float
    product_mass_kg: float
    feed_assay: float = NATURAL_FEED_ASSAY
    tails_assay: float = DEFAULT_TAILS_ASSAY

    def __post_init__(self):
        for name in ("feed_assay", "product_assay", "tails_assay"):
            x = getattr(self, name)
            if not 0.0 < x < 1.0:
                raise DomainError(f"{name} must lie strictly inside (0, 1), got {x}")
        if self.feed_assay == self.tails_assay:
            raise DomainError("feed and tails assays coincide; feed mass is undefined")
        if not self.tails_assay < self.feed_assay < self.product_assay:
            raise DomainError(
                "assays must satisfy tails < feed < product, got "
                f"tails={self.tails_assay}, feed={self.feed_assay}, product={self.product_assay}"
            )
        if not self.product_mass_kg > 0:
            raise DomainError(f"product mass must be positive, got {self.product_mass_kg}")

    @property
    def feed_mass_kg(self) -> float:
        return self.product_mass_kg * (self.product_assay - self.tails_assay) / (self.feed_assay - self.tails_assay)

    @property
    def tails_mass_kg(self) -> float:
        return self.feed_mass_kg - self.product_mass_kg


def value_function(x: float) -> float:
    """Separative potential ``(2x - 1) ln(x / (1 - x))``; symmetric about 0.5."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"assay must lie strictly inside (0, 1), got {x}")
    return (2.0 * x - 1.0) * math.log(x / (1.0 - x))


def separative_work(spec: EnrichmentSpec) -> float:
    """Separative work in kg-SWU needed to produce ``spec``'s product."""
    P = spec.product_mass_kg
    F = spec.feed_mass_kg
    T = F - P
    swu = P * value_function(spec.product_assay) + T * value_function(spec.tails_assay) - F * value_function(spec.feed_assay)
    # rounding can leave a tiny negative for product_assay -> feed_assay
    return max(swu, 0.0)


def separative_work_mtswu(spec: EnrichmentSpec) -> float:
    return separative_work(spec) / KG_SWU_PER_MTSWU


def production_duration(energy: float, power: float) -> float:
    """Days needed to spend ``energy`` MTSWU at ``power`` MTSWU/day."""
    if not power > 0:
        raise DomainError(f"power must be positive, got {power}")
    return energy / power
