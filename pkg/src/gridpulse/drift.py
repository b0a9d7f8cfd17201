"""Timing of the sawtooth step in folded waveforms and its drift from window to window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SECONDS_PER_DAY, EmptyStatisticsError, GridPulseError, UniformSeries, as_fraction, segment
from .waveform import Waveform, fold

TIE_RTOL = 1e-9
TIE_ULPS = 256  # rounding of bins near a large offset (50 Hz) is not a real difference


class NoStepError(GridPulseError, ValueError):
    """The waveform is constant, so it has no step to locate."""


def step_phase(w: Waveform, falling: bool = False) -> float:
    """Offset into the period of the steepest rise (or fall) of the waveform.

    The step sits at the bin ``k`` maximising the circular first difference
    ``bins[k] - bins[k-1]``; bin 0 is compared with the last bin. Differences
    within ``TIE_RTOL`` of the largest magnitude, or within ``TIE_ULPS`` units
    in the last place of the largest bin, count as ties, which go to the
    smallest index. ``falling=True`` locates the steepest drop instead,
    which is how a demand step shows up in frequency.
    """
    if not w.defined.all():
        raise ValueError("waveform has undefined bins")
    diff = w.bins - np.roll(w.bins, 1)
    if falling:
        diff = -diff
    scale = np.abs(diff).max()
    if scale == 0:
        raise NoStepError("constant waveform has no step")
    tol = max(TIE_RTOL * scale, TIE_ULPS * float(np.spacing(np.abs(w.bins).max())))
    k = int(np.flatnonzero(diff >= diff.max() - tol)[0])
    return float(k * w.dt)


def unwrap_phases(phases: np.ndarray, period: float) -> np.ndarray:
    """Unwrap so that each increment lies in ``(-period/2, period/2]``."""
    phases = np.asarray(phases, dtype=np.float64)
    if phases.size == 0:
        return phases
    d = np.diff(phases)
    d = d - period * np.ceil((d - period / 2) / period)
    return np.concatenate(([phases[0]], phases[0] + np.cumsum(d)))


@dataclass(frozen=True)
class PhaseTrack:
    day_epochs: np.ndarray
    step_phase_s: np.ndarray
    drift_rate_s_per_day: float
    intercept_s: float
    residual_rms: float
    period_s: float

    @property
    def irregular(self) -> bool:
        """Phases scatter too much around the fit for the rate to mean anything."""
        return self.residual_rms > self.period_s / 8

    @property
    def unwrapped(self) -> np.ndarray:
        return unwrap_phases(self.step_phase_s, self.period_s)


def track(
    series: UniformSeries, period_s=60, window_s=SECONDS_PER_DAY, falling: bool = False
) -> PhaseTrack:
    """Step phase of every fully valid window and the least-squares drift rate.

    The rate is fitted on unwrapped phases against elapsed time in days.
    """
    labels, phases = [], []
    for seg in segment(series, window_s):
        if not seg.is_fully_valid():
            continue
        try:
            phases.append(step_phase(fold(series, seg, period_s), falling))
        except NoStepError:
            continue
        labels.append(seg.label_epoch)
    if len(phases) < 3:
        raise EmptyStatisticsError(f"drift tracking needs at least 3 valid windows, found {len(phases)}")
    period = float(as_fraction(period_s))
    epochs = np.array([int(x) for x in labels], dtype=np.int64)
    phases = np.array(phases)
    days = (epochs - epochs[0]) / SECONDS_PER_DAY
    y = unwrap_phases(phases, period)
    slope, intercept = np.polyfit(days, y, 1)
    resid = y - (slope * days + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return PhaseTrack(epochs, phases, float(slope), float(intercept), rms, period)


def write_track_csv(t: PhaseTrack, stream) -> None:
    stamps = np.datetime_as_string(t.day_epochs.astype("datetime64[s]"), unit="s")
    stream.write("day,step_phase_s\n")
    stream.write("".join(f"{d}Z,{p!r}\n" for d, p in zip(stamps.tolist(), t.step_phase_s.tolist())))
