"""Folded waveforms, pattern amplitudes and their daily, weekly and long-term statistics.

Two quantities are kept apart throughout: the pattern period ``P`` (what is
folded, 60 s for the minute pattern) and the averaging window ``W`` over
which one waveform is formed (an hour by default, or a day or a week).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .core import (
    ALIGN_ORIGIN,
    SECONDS_PER_WEEK,
    EmptyStatisticsError,
    Segment,
    UniformSeries,
    as_fraction,
    floor_times,
    window_grid,
)

DAILY = "daily"
WEEKLY = "weekly"


@dataclass(frozen=True)
class Waveform:
    """Mean pattern over one period; bin ``k`` covers second ``k * dt`` of the period."""

    period_s: Fraction
    dt: Fraction
    bins: np.ndarray
    counts: np.ndarray
    window_label: int | Fraction | None = None

    @property
    def defined(self) -> np.ndarray:
        return self.counts > 0

    def offsets(self) -> np.ndarray:
        return np.arange(self.bins.size) * float(self.dt)


@dataclass(frozen=True)
class AmplitudeSeries:
    window_s: Fraction
    amplitudes: UniformSeries
    period_s: Fraction


@dataclass(frozen=True)
class Profile:
    granularity: str
    mean: np.ndarray
    std: np.ndarray
    n: np.ndarray

    def relabel(self, offset_s: int) -> "Profile":
        """Rotate slots for display in a fixed offset from UTC (whole hours only)."""
        if offset_s % 3600:
            raise ValueError("display offset must be a whole number of hours")
        shift = offset_s // 3600
        return Profile(
            self.granularity,
            np.roll(self.mean, shift),
            np.roll(self.std, shift),
            np.roll(self.n, shift),
        )


def _samples_per_period(period_s, dt) -> int:
    n = as_fraction(period_s) / dt
    if n.denominator != 1 or n <= 0:
        raise ValueError(f"period {period_s} s is not a multiple of dt = {dt} s")
    return int(n)


def _window_values(series: UniformSeries, window: Segment, period_s) -> tuple[np.ndarray, int]:
    n_per = _samples_per_period(period_s, series.dt)
    if len(window) % n_per:
        raise ValueError(
            f"window of {len(window)} samples is not a whole number of {n_per}-sample periods"
        )
    if not window.is_fully_valid():
        raise ValueError(f"window starting at {window.label_epoch} contains invalid samples")
    return window.values(), n_per


def fold(series: UniformSeries, window: Segment, period_s=60) -> Waveform:
    """Average the window's period-length blocks sample by sample."""
    x, n_per = _window_values(series, window, period_s)
    n_blocks = x.size // n_per
    bins = x.reshape(n_blocks, n_per).mean(axis=0)
    return Waveform(
        as_fraction(period_s), series.dt, bins, np.full(n_per, n_blocks), window.label_epoch
    )


def fold_harmonic(series: UniformSeries, window: Segment, period_s=60) -> Waveform:
    """Waveform by keeping only the DFT bins at multiples of ``1 / period_s``.

    DC is retained so the result carries the window mean, like :func:`fold`.
    """
    x, n_per = _window_values(series, window, period_s)
    n_blocks = x.size // n_per
    spec = np.fft.rfft(x)
    keep = np.zeros_like(spec)
    keep[::n_blocks] = spec[::n_blocks]
    filtered = np.fft.irfft(keep, n=x.size)
    return Waveform(
        as_fraction(period_s),
        series.dt,
        filtered[:n_per].copy(),
        np.full(n_per, n_blocks),
        window.label_epoch,
    )


def amplitude(w: Waveform) -> float:
    """Half the peak-to-peak range of the waveform."""
    if not w.defined.all():
        raise ValueError("waveform has undefined bins")
    return 0.5 * float(w.bins.max() - w.bins.min())


def windowed_amplitudes(series: UniformSeries, period_s=60, window_s=3600) -> AmplitudeSeries:
    """Amplitude of the folded waveform in every complete UTC window.

    Windows holding any invalid sample yield an invalid entry.
    """
    offset, n_win, spw, first_label = window_grid(series, window_s)
    n_per = _samples_per_period(period_s, series.dt)
    if spw % n_per:
        raise ValueError(f"window {window_s} s is not a multiple of the period {period_s} s")
    span = slice(offset, offset + n_win * spw)
    if n_win:
        amps, ok = _kernels.fold_amplitudes(
            series.values[span].reshape(n_win, spw), series.valid[span].reshape(n_win, spw), n_per
        )
    else:
        amps, ok = np.empty(0), np.empty(0, dtype=bool)
    window = as_fraction(window_s)
    out = UniformSeries(first_label, window, amps, ok, series.unit)
    return AmplitudeSeries(window, out, as_fraction(period_s))


def hourly_amplitudes(series: UniformSeries, period_s=60) -> AmplitudeSeries:
    return windowed_amplitudes(series, period_s, 3600)


def _slot_index(a: UniformSeries, granularity: str) -> np.ndarray:
    t = floor_times(a)
    if granularity == DAILY:
        return (t // 3600) % 24
    if granularity == WEEKLY:
        return ((t - ALIGN_ORIGIN) // 3600) % 168
    raise ValueError(f"granularity must be {DAILY!r} or {WEEKLY!r}, got {granularity!r}")


def _group_stats(groups: np.ndarray, values: np.ndarray, n_groups: int):
    n = np.bincount(groups, minlength=n_groups)
    # centre each group on its first value so constant groups come out exact
    ref = np.zeros(n_groups)
    ref[groups[::-1]] = values[::-1]
    shifted = values - ref[groups]
    with np.errstate(invalid="ignore", divide="ignore"):
        offset = np.bincount(groups, weights=shifted, minlength=n_groups) / n
        dev = shifted - offset[groups]
        ss = np.bincount(groups, weights=dev * dev, minlength=n_groups)
        std = np.where(n >= 2, np.sqrt(ss / (n - 1)), np.nan)
    mean = np.where(n > 0, ref + offset, np.nan)
    return mean, std, n


def profile(a: AmplitudeSeries | UniformSeries, granularity: str = DAILY) -> Profile:
    """Mean and sample std of valid amplitudes per UTC hour of day or hour of week.

    Weeks start on Monday 00:00 UTC. Slots without data have NaN mean, slots
    with fewer than two values NaN std.
    """
    s = a.amplitudes if isinstance(a, AmplitudeSeries) else a
    slots = _slot_index(s, granularity)
    n_slots = 24 if granularity == DAILY else 168
    mean, std, n = _group_stats(slots[s.valid], s.values[s.valid], n_slots)
    return Profile(granularity, mean, std, n)


def weekly_trend(a: AmplitudeSeries | UniformSeries) -> tuple[UniformSeries, UniformSeries]:
    """Per-week mean and sample std of valid amplitudes, weeks from Monday 00:00 UTC.

    Every week touched by the input appears; weeks without a valid value are
    invalid in both outputs, weeks with a single value only in the std series.
    """
    s = a.amplitudes if isinstance(a, AmplitudeSeries) else a
    if len(s) == 0:
        raise EmptyStatisticsError("empty amplitude series")
    week = (floor_times(s) - ALIGN_ORIGIN) // SECONDS_PER_WEEK
    first = int(week[0])
    rel = week - first
    n_weeks = int(rel[-1]) + 1
    mean, std, n = _group_stats(rel[s.valid], s.values[s.valid], n_weeks)
    start = ALIGN_ORIGIN + first * SECONDS_PER_WEEK
    means = UniformSeries(start, SECONDS_PER_WEEK, mean, n > 0, s.unit)
    stds = UniformSeries(start, SECONDS_PER_WEEK, std, n > 1, s.unit)
    return means, stds


def standardize(x: UniformSeries) -> UniformSeries:
    """``(x - mean) / std`` with the sample std, both over valid samples."""
    v = x.values[x.valid]
    if v.size < 2:
        raise EmptyStatisticsError("standardize needs at least two valid samples")
    mu = v.mean()
    sd = v.std(ddof=1)
    if not sd > 0:
        raise ValueError("standardize: zero variance")
    out = np.where(x.valid, (x.values - mu) / sd, np.nan)
    return x.replace(values=out, unit="dimensionless")


def mean_waveform(series: UniformSeries, period_s=60, window_s=3600, method: str = "fold") -> Waveform:
    """Count-weighted average of the waveforms of all fully valid windows."""
    offset, n_win, spw, first_label = window_grid(series, window_s)
    folder = {"fold": fold, "harmonic": fold_harmonic}[method]
    total = None
    count = None
    label = None
    for i in range(n_win):
        lo = offset + i * spw
        seg = Segment(series, lo, lo + spw - 1, None)
        if not seg.is_fully_valid():
            continue
        w = folder(series, seg, period_s)
        weighted = w.bins * w.counts
        total = weighted if total is None else total + weighted
        count = w.counts if count is None else count + w.counts
        if label is None:
            label = first_label + i * as_fraction(window_s)
    if total is None:
        raise EmptyStatisticsError(f"no fully valid {window_s} s window")
    return Waveform(as_fraction(period_s), series.dt, total / count, count, label)


def write_waveform_csv(w: Waveform, stream) -> None:
    stream.write("second_of_period,value\n")
    rows = []
    for k, (v, ok) in enumerate(zip(w.bins.tolist(), w.defined.tolist())):
        sec = k * w.dt
        sec_text = str(sec.numerator) if sec.denominator == 1 else repr(float(sec))
        rows.append(f"{sec_text},{v!r}\n" if ok else f"{sec_text},\n")
    stream.write("".join(rows))


def write_profile_csv(p: Profile, stream) -> None:
    stream.write("slot,mean,std,n\n")
    rows = []
    for s, (m, sd, n) in enumerate(zip(p.mean.tolist(), p.std.tolist(), p.n.tolist())):
        m_text = repr(m) if n > 0 else ""
        sd_text = repr(sd) if n > 1 else ""
        rows.append(f"{s},{m_text},{sd_text},{n}\n")
    stream.write("".join(rows))
