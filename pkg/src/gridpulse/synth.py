"""Deterministic synthetic test signals.

Components are added to a constant base in the order given; gaps are applied
last as mask edits. Periodic components are evaluated against absolute UTC
time, so a phase of 0 puts the sinusoid zero crossing or the pulse onset on
the full minute. Noise comes from :mod:`gridpulse.rng`, indexed by the
absolute sample number, which makes chunked generation byte-identical to
generating everything at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Unit, UniformSeries, as_fraction
from .rng import normals

NOISE_STREAM = 0


@dataclass(frozen=True)
class Sinusoid:
    period: float
    amplitude: float
    phase: float = 0.0  # seconds


@dataclass(frozen=True)
class PulseTrain:
    period: float
    width: float
    height: float
    phase: float = 0.0  # seconds


@dataclass(frozen=True)
class WhiteNoise:
    std: float
    seed: int = 0


@dataclass(frozen=True)
class Gap:
    start: float  # seconds after the series start
    length: float


@dataclass(frozen=True)
class SynthSpec:
    duration_s: float
    dt: float = 1
    base: float = 50.0
    start_epoch: int | Fraction = 0
    unit: Unit = Unit.HERTZ
    components: tuple = field(default_factory=tuple)

    @property
    def n_samples(self) -> int:
        n = as_fraction(self.duration_s) / as_fraction(self.dt)
        if n.denominator != 1 or n < 0:
            raise ValueError(f"duration {self.duration_s} s is not a multiple of dt {self.dt} s")
        return int(n)


def _ticks_per_period(period, dt) -> int:
    n = as_fraction(period) / as_fraction(dt)
    if n.denominator != 1 or n <= 0:
        raise ValueError(f"dt {dt} s does not divide {period} s")
    return int(n)


def _phase_offset(start, period, phase, dt) -> tuple[int, int, int, int]:
    """Position of sample 0 inside the period, in units of 1/scale seconds."""
    parts = [as_fraction(x) for x in (start, period, phase, dt)]
    scale = math.lcm(*(p.denominator for p in parts))
    s, p, ph, d = (int(x * scale) for x in parts)
    return (s - ph) % p, p, d, scale


def _periodic_table(spec: SynthSpec, comp) -> np.ndarray:
    """One period of the component, starting at the first sample of the series."""
    n_per = _ticks_per_period(comp.period, spec.dt)
    u0, p, d, scale = _phase_offset(spec.start_epoch, comp.period, comp.phase, spec.dt)
    u = (u0 + d * np.arange(n_per, dtype=np.int64)) % p
    if isinstance(comp, Sinusoid):
        return comp.amplitude * np.sin(2.0 * np.pi * (u / p))
    width = as_fraction(comp.width)
    if not 0 <= width <= as_fraction(comp.period):
        raise ValueError("pulse width must lie in [0, period]")
    if width:
        _ticks_per_period(width, spec.dt)
    return np.where(u < int(width * scale), float(comp.height), 0.0)


def generate(spec: SynthSpec, first: int = 0, count: int | None = None) -> UniformSeries:
    """Samples ``first .. first + count - 1`` of the series described by ``spec``."""
    total = spec.n_samples
    if count is None:
        count = total - first
    if first < 0 or count < 0 or first + count > total:
        raise ValueError("requested range exceeds the series")
    k = np.arange(first, first + count, dtype=np.int64)
    values = np.full(count, float(spec.base))
    valid = np.ones(count, dtype=bool)
    gaps = []
    for comp in spec.components:
        if isinstance(comp, (Sinusoid, PulseTrain)):
            table = _periodic_table(spec, comp)
            values += table[k % table.size]
        elif isinstance(comp, WhiteNoise):
            values += comp.std * normals(comp.seed, NOISE_STREAM, first, count)
        elif isinstance(comp, Gap):
            gaps.append(comp)
        else:
            raise TypeError(f"unknown component {comp!r}")
    dt = as_fraction(spec.dt)
    for gap in gaps:
        lo = math.ceil(as_fraction(gap.start) / dt)
        hi = math.ceil((as_fraction(gap.start) + as_fraction(gap.length)) / dt)
        valid[max(lo - first, 0) : max(hi - first, 0)] = False
    start = as_fraction(spec.start_epoch) + first * dt
    return UniformSeries(start, dt, values, valid, spec.unit)


def component_from_dict(d: dict):
    """Build a component from a config table with a ``kind`` key."""
    d = dict(d)
    kind = d.pop("kind", None)
    types = {
        "sinusoid": Sinusoid,
        "pulse_train": PulseTrain,
        "white_noise": WhiteNoise,
        "gap": Gap,
    }
    if kind not in types:
        raise ValueError(f"unknown component kind {kind!r}; expected one of {sorted(types)}")
    try:
        return types[kind](**d)
    except TypeError as exc:
        raise ValueError(f"bad {kind} component: {exc}") from None
