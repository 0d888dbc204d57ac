"""Shipment data model, seeded random streams and CSV interchange.

Shipment indices are 1-based everywhere in the public interface, matching
how shipments are numbered in facility records.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

CSV_COLUMNS = ("t", "duration_days", "power_mtswu_per_day")
LABEL_COLUMNS = ("pattern", "diverted")

_UINT64 = (1 << 64) - 1


class DiversionSentryError(Exception):
    """Base class for all package errors."""


class ParseError(DiversionSentryError, ValueError):
    """Raised when a shipment CSV cannot be read."""


@dataclass(frozen=True)
class ShipmentObservation:
    """A single shipment: duration since the previous one and mean power."""

    t: int
    duration_days: float
    power: float

    def __post_init__(self):
        if not (self.duration_days > 0 and math.isfinite(self.duration_days)):
            raise ValueError(f"shipment {self.t}: duration must be positive, got {self.duration_days}")
        if not (self.power > 0 and math.isfinite(self.power)):
            raise ValueError(f"shipment {self.t}: power must be positive, got {self.power}")

    @property
    def energy(self) -> float:
        return energy_of(self)


def energy_of(obs: ShipmentObservation) -> float:
    """Energy consumed for a shipment (MTSWU): duration times mean power."""
    return obs.duration_days * obs.power


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ShipmentSeries:
    """Ordered shipments with consecutive indices 1..n.

    Stored column-wise; iterate to get :class:`ShipmentObservation` values.
    """

    durations: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        d = _frozen(self.durations, float)
        p = _frozen(self.powers, float)
        if d.shape != p.shape:
            raise ValueError("durations and powers must have the same length")
        bad = np.flatnonzero(~((d > 0) & (p > 0) & np.isfinite(d) & np.isfinite(p)))
        if bad.size:
            raise ValueError(f"shipment {bad[0] + 1}: duration and power must be positive and finite")
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "powers", p)

    @classmethod
    def from_observations(cls, observations: Sequence[ShipmentObservation]) -> "ShipmentSeries":
        for i, obs in enumerate(observations, start=1):
            if obs.t != i:
                raise ValueError(f"shipment indices must be consecutive from 1; got {obs.t} at position {i}")
        return cls([o.duration_days for o in observations], [o.power for o in observations])

    @property
    def energies(self) -> np.ndarray:
        return self.durations * self.powers

    @property
    def observations(self) -> list[ShipmentObservation]:
        return list(self)

    def to_array(self) -> np.ndarray:
        """(n, 2) array of ``[duration, power]`` rows."""
        return np.column_stack([self.durations, self.powers])

    def __len__(self) -> int:
        return self.durations.shape[0]

    def __iter__(self) -> Iterator[ShipmentObservation]:
        for i, (d, p) in enumerate(zip(self.durations.tolist(), self.powers.tolist()), start=1):
            yield ShipmentObservation(i, d, p)

    def __getitem__(self, i: int) -> ShipmentObservation:
        return ShipmentObservation(i + 1, float(self.durations[i]), float(self.powers[i]))

    def __eq__(self, other):
        if not isinstance(other, ShipmentSeries):
            return NotImplemented
        return np.array_equal(self.durations, other.durations) and np.array_equal(self.powers, other.powers)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    """A shipment series with optional ground-truth labels.

    ``change_point`` is the 1-based index of the first diverted shipment, or
    ``None`` when no shipment is diverted.
    """

    series: ShipmentSeries
    pattern_id: Optional[np.ndarray] = None
    diverted: Optional[np.ndarray] = None
    change_point: Optional[int] = field(default=None)

    def __post_init__(self):
        n = len(self.series)
        if self.pattern_id is not None:
            pid = _frozen(self.pattern_id, np.int64)
            if pid.shape[0] != n:
                raise ValueError("pattern_id length does not match series")
            if n and pid.min() < 1:
                raise ValueError("pattern ids are 1-based")
            object.__setattr__(self, "pattern_id", pid)
        if self.diverted is not None:
            div = _frozen(self.diverted, bool)
            if div.shape[0] != n:
                raise ValueError("diverted length does not match series")
            object.__setattr__(self, "diverted", div)
            first = int(np.argmax(div)) + 1 if div.any() else None
            if self.change_point is None:
                object.__setattr__(self, "change_point", first)
            elif first is not None and first < self.change_point:
                raise ValueError(f"shipment {first} is diverted before change point {self.change_point}")
        elif self.change_point is not None:
            raise ValueError("change_point given without diverted labels")

    def __len__(self) -> int:
        return len(self.series)

    def __eq__(self, other):
        if not isinstance(other, LabeledSeries):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            self.series == other.series
            and same(self.pattern_id, other.pattern_id)
            and same(self.diverted, other.diverted)
            and self.change_point == other.change_point
        )

    __hash__ = None


@dataclass(frozen=True)
class RngStream:
    """Named random stream: a (seed, stream_id) pair mapped to a PCG64 generator.

    The mapping goes through :class:`numpy.random.SeedSequence`, so equal pairs
    give equal draws on every platform for a given numpy major version.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) <= _UINT64):
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer")
            object.__setattr__(self, name, int(v))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream_id])))

    def substream(self, *keys: int) -> "RngStream":
        """Derive an independent stream keyed by ``keys`` (e.g. trial index)."""
        ss = np.random.SeedSequence([self.seed, self.stream_id, len(keys), *map(int, keys)])
        return RngStream(self.seed, int(ss.generate_state(1, np.uint64)[0]))


def as_rng_stream(random_state) -> RngStream:
    """Coerce ``None``, an int seed or an :class:`RngStream`."""
    if isinstance(random_state, RngStream):
        return random_state
    if random_state is None:
        return RngStream(0)
    return RngStream(int(random_state))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_series(series: LabeledSeries) -> str:
    """Render a series as CSV text with lossless 17-significant-digit numbers."""
    s = series.series
    has_pattern = series.pattern_id is not None
    has_div = series.diverted is not None
    header = list(CSV_COLUMNS)
    if has_pattern:
        header.append("pattern")
    if has_div:
        header.append("diverted")
    lines = [",".join(header)]
    for i in range(len(s)):
        row = [str(i + 1), _fmt(s.durations[i]), _fmt(s.powers[i])]
        if has_pattern:
            row.append(str(int(series.pattern_id[i])))
        if has_div:
            row.append("1" if series.diverted[i] else "0")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_series(text: str) -> LabeledSeries:
    """Parse CSV text produced by :func:`serialize_series` (or by hand).

    Raises
    ------
    ParseError
        On a missing header/column, a malformed number, non-consecutive
        indices or a non-positive duration/power. The message names the row.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("missing header row") from None
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"missing required column(s): {', '.join(missing)}")
    col = {name: header.index(name) for name in header}
    has_pattern = "pattern" in col
    has_div = "diverted" in col

    durations, powers, patterns, diverted = [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            t = int(row[col["t"]])
            d = float(row[col["duration_days"]])
            p = float(row[col["power_mtswu_per_day"]])
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from None
        if t != len(durations) + 1:
            raise ParseError(f"row {lineno}: expected t={len(durations) + 1}, got {t}")
        if not (d > 0 and math.isfinite(d)):
            raise ParseError(f"row {lineno}: duration must be positive, got {d}")
        if not (p > 0 and math.isfinite(p)):
            raise ParseError(f"row {lineno}: power must be positive, got {p}")
        if has_pattern:
            try:
                patterns.append(int(row[col["pattern"]]))
            except ValueError as exc:
                raise ParseError(f"row {lineno}: {exc}") from None
            if patterns[-1] < 1:
                raise ParseError(f"row {lineno}: pattern ids start at 1")
        if has_div:
            flag = row[col["diverted"]].strip()
            if flag not in ("0", "1"):
                raise ParseError(f"row {lineno}: diverted must be 0 or 1, got {flag!r}")
            diverted.append(flag == "1")
        durations.append(d)
        powers.append(p)

    return LabeledSeries(
        ShipmentSeries(durations, powers),
        pattern_id=patterns if has_pattern else None,
        diverted=diverted if has_div else None,
    )
