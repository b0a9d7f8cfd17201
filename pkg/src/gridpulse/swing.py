"""Aggregated swing equation driven by fleets of clocked pulse loads.

The model is the single-bus equation

    (2 E_rot / f_ref) df/dt = dP(t) - D (f - f_ref)

with ``dP > 0`` meaning surplus generation. Damping acts on the deviation
from ``f_ref``. Its linearised, undamped response to a sinusoidal imbalance
``P_T cos(2 pi t / T)`` is ``a sin(2 pi t / T)`` with
``P_T = a * 4 pi E_rot / (f_ref T)``, which :func:`power_amplitudes` uses to
turn hourly frequency amplitudes into power amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import _kernels
from .core import (
    SECONDS_PER_DAY,
    GridPulseError,
    Unit,
    UniformSeries,
    as_fraction,
)
from .rng import normals, uniforms
from .waveform import AmplitudeSeries

POLICIES = ("fixed", "daily_reset", "drift", "random")
NOISE_STREAM = (1 << 64) - 1
DEFAULT_MAX_STEP = Fraction(1, 10)


class SimulationError(GridPulseError):
    """The integration left the physical range (frequency at or below zero)."""


@dataclass(frozen=True)
class GridParams:
    e_rot: float | UniformSeries
    damping_d: float = 0.0
    f_ref: float = 50.0
    f0: float | None = None

    def __post_init__(self):
        if not self.f_ref > 0:
            raise ValueError("f_ref must be positive")
        if self.damping_d < 0:
            raise ValueError("damping must be non-negative")
        if not isinstance(self.e_rot, UniformSeries) and not self.e_rot > 0:
            raise ValueError("e_rot must be positive")


@dataclass(frozen=True)
class PulseDevice:
    """A load drawing ``pulse_power`` for ``pulse_width`` seconds once per period.

    ``phase`` is the onset within the period for the ``fixed`` and ``drift``
    policies. ``daily_reset`` redraws the onset at every UTC midnight,
    ``random`` draws it once; ``drift`` advances it by ``drift_rate`` seconds
    per elapsed day. ``seed`` overrides the fleet's master seed.
    """

    pulse_power: float
    pulse_width: float
    period_s: float = 60
    phase: float = 0.0
    policy: str = "fixed"
    drift_rate: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if not 0 <= self.pulse_width <= self.period_s:
            raise ValueError("pulse width must lie in [0, period]")
        if self.pulse_power < 0:
            raise ValueError("pulse power must be non-negative")


@dataclass(frozen=True)
class DeviceFleet:
    devices: tuple = field(default_factory=tuple)
    noise_std: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(self.devices))


def _ticks(x, dt: Fraction, what: str) -> int:
    n = as_fraction(x) / dt
    if n.denominator != 1:
        raise ValueError(f"{what} {x} s is not a multiple of dt = {dt} s")
    return int(n)


def fleet_demand(fleet: DeviceFleet, t0, duration, dt) -> UniformSeries:
    """Total power drawn by the fleet, sampled every ``dt`` from ``t0`` (W)."""
    dt = as_fraction(dt)
    n = _ticks(duration, dt, "duration")
    start = _ticks(t0, dt, "start time")
    out = np.zeros(n)
    ticks_per_day = _ticks(SECONDS_PER_DAY, dt, "a day")
    for index, dev in _merged(fleet.devices):
        width = as_fraction(dev.pulse_width)
        if width and dt > width / 2:
            raise ValueError(
                f"device {index}: dt = {dt} s cannot resolve a {dev.pulse_width} s pulse"
            )
        period = _ticks(dev.period_s, dt, "period")
        w = _ticks(width, dt, "pulse width")
        seed = fleet.master_seed if dev.seed is None else dev.seed
        kwargs = {}
        if dev.policy == "fixed":
            kwargs = dict(mode=_kernels.PHASE_CONSTANT, phase0=math.floor(as_fraction(dev.phase) / dt))
        elif dev.policy == "random":
            u = uniforms(seed, index, 0, 1)[0]
            kwargs = dict(mode=_kernels.PHASE_CONSTANT, phase0=math.floor(u * period))
        elif dev.policy == "daily_reset":
            day0 = start // ticks_per_day
            day1 = (start + max(n - 1, 0)) // ticks_per_day
            u = uniforms(seed, index, day0, day1 - day0 + 1)
            table = np.floor(u * period).astype(np.int64)
            kwargs = dict(mode=_kernels.PHASE_DAILY_TABLE, table=table, ticks_per_day=ticks_per_day)
        else:
            kwargs = dict(
                mode=_kernels.PHASE_DRIFT,
                phase0=float(as_fraction(dev.phase) / dt),
                rate=float(dev.drift_rate) / SECONDS_PER_DAY,
            )
        _kernels.add_pulses(out, start, period, w, dev.pulse_power, **kwargs)
    if fleet.noise_std:
        out += fleet.noise_std * normals(fleet.master_seed, NOISE_STREAM, start, n)
    return UniformSeries(as_fraction(t0), dt, out, np.ones(n, dtype=bool), Unit.WATT)


def _merged(devices) -> list[tuple[int, PulseDevice]]:
    """Collapse deterministic devices that differ only in power into one.

    Devices with random phases keep their own index, which keys their stream.
    """
    out = []
    slots = {}
    for index, dev in enumerate(devices):
        if dev.policy in ("fixed", "drift"):
            key = (dev.pulse_width, dev.period_s, dev.phase, dev.policy, dev.drift_rate)
            if key in slots:
                j = slots[key]
                i0, d0 = out[j]
                out[j] = (i0, replace(d0, pulse_power=d0.pulse_power + dev.pulse_power))
                continue
            slots[key] = len(out)
        out.append((index, dev))
    return out


def imbalance_from_demand(demand: UniformSeries, balance: bool = True) -> UniformSeries:
    """Imbalance seen by the grid when ``demand`` is added to a balanced system.

    With ``balance`` the mean demand is assumed to be covered by generation,
    leaving ``-(demand - mean(demand))``.
    """
    v = demand.values[demand.valid]
    offset = v.mean() if balance and v.size else 0.0
    return demand.replace(values=-(demand.values - offset), unit=Unit.WATT)


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


def internal_step(forcing_dt, dt_out, max_step=DEFAULT_MAX_STEP) -> Fraction:
    """Largest step not above ``max_step`` dividing both the forcing and output intervals."""
    h = _frac_gcd(as_fraction(forcing_dt), as_fraction(dt_out))
    max_step = as_fraction(max_step)
    if h > max_step:
        h = h / math.ceil(h / max_step)
    return h


def _gain(grid: GridParams, forcing: UniformSeries) -> np.ndarray:
    if not isinstance(grid.e_rot, UniformSeries):
        return np.full(len(forcing), grid.f_ref / (2.0 * float(grid.e_rot)))
    e = grid.e_rot
    # hold each inertia value from its timestamp until the next one
    first = math.floor((forcing.start_epoch - e.start_epoch) / e.dt)
    last = math.floor((forcing.time_at(len(forcing) - 1) - e.start_epoch) / e.dt)
    if first < 0 or last >= len(e):
        raise ValueError("inertia series does not cover the simulated span")
    if not e.valid[first : last + 1].all():
        raise ValueError("inertia series has invalid samples inside the simulated span")
    if (e.values[first : last + 1] <= 0).any():
        raise ValueError("inertia must be positive")
    scale = math.lcm(forcing.start_epoch.denominator, forcing.dt.denominator,
                     e.start_epoch.denominator, e.dt.denominator)
    s = int((forcing.start_epoch - e.start_epoch) * scale)
    d = int(forcing.dt * scale)
    idx = (s + d * np.arange(len(forcing), dtype=np.int64)) // int(e.dt * scale)
    return grid.f_ref / (2.0 * e.values[idx])


def simulate(
    grid: GridParams, forcing: UniformSeries, dt_out=1, max_step=DEFAULT_MAX_STEP
) -> UniformSeries:
    """Integrate the swing equation under ``forcing`` (W, positive = surplus).

    Classical RK4 with a fixed step that divides both the forcing interval
    and ``dt_out`` and does not exceed ``max_step``; the forcing is held
    constant over each of its samples. Returns the frequency sampled every
    ``dt_out`` seconds starting at the forcing's first timestamp.
    """
    if not forcing.valid.all():
        raise ValueError("forcing contains invalid samples")
    dt_out = as_fraction(dt_out)
    h = internal_step(forcing.dt, dt_out, max_step)
    substeps = int(forcing.dt / h)
    out_every = int(dt_out / h)
    n_steps = len(forcing) * substeps
    if n_steps % out_every:
        raise ValueError(f"forcing span is not a whole number of {dt_out} s output intervals")
    n_out = n_steps // out_every
    f0 = grid.f_ref if grid.f0 is None else grid.f0
    out, fail = _kernels.rk4_swing(
        f0, grid.f_ref, grid.damping_d, forcing.values, _gain(grid, forcing),
        substeps, float(h), out_every, n_out,
    )
    if fail >= 0:
        t = forcing.start_epoch + fail * h
        raise SimulationError(f"frequency fell to or below 0 Hz at t = {float(t):.3f} s (step {fail})")
    return UniformSeries(forcing.start_epoch, dt_out, out, np.ones(n_out, dtype=bool), Unit.HERTZ)


def power_amplitudes(
    a: AmplitudeSeries, e_rot_hourly: UniformSeries, f_ref: float = 50.0, period_s=60
) -> AmplitudeSeries:
    """Power amplitude ``a * 4 pi E_rot / (f_ref T)`` for every hour valid in both inputs."""
    amps = a.amplitudes
    e = e_rot_hourly
    if amps.dt != e.dt:
        raise ValueError(f"grids differ: amplitudes every {amps.dt} s, inertia every {e.dt} s")
    shift = (amps.start_epoch - e.start_epoch) / e.dt
    if shift.denominator != 1:
        raise ValueError("amplitude and inertia grids are not aligned")
    idx = int(shift) + np.arange(len(amps))
    inside = (idx >= 0) & (idx < len(e))
    e_vals = np.full(len(amps), np.nan)
    e_ok = np.zeros(len(amps), dtype=bool)
    e_vals[inside] = e.values[idx[inside]]
    e_ok[inside] = e.valid[idx[inside]]
    ok = amps.valid & e_ok
    factor = 4.0 * math.pi / (float(f_ref) * float(as_fraction(period_s)))
    values = np.where(ok, amps.values * factor * e_vals, np.nan)
    out = UniformSeries(amps.start_epoch, amps.dt, values, ok, Unit.WATT)
    return AmplitudeSeries(a.window_s, out, as_fraction(period_s))
