"""Gap-aware uniform time series, UTC window tiling and the hour-drop rule."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

SECONDS_PER_DAY = 86400
SECONDS_PER_WEEK = 7 * SECONDS_PER_DAY

# Monday 1970-01-05 00:00 UTC. A multiple of one day, so hour and day windows
# still align to UTC midnight while week windows start on Mondays.
ALIGN_ORIGIN = 4 * SECONDS_PER_DAY


class GridPulseError(Exception):
    """Base class for errors raised by the toolkit."""


class DataFormatError(GridPulseError, ValueError):
    """Malformed input data (unparsable rows, off-grid or duplicate timestamps)."""


class EmptyStatisticsError(GridPulseError, ValueError):
    """A statistic was requested over a range without any valid sample."""


class Unit(str, enum.Enum):
    HERTZ = "hertz"
    WATT = "watt"
    JOULE = "joule"
    DIMENSIONLESS = "dimensionless"


def as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest decimal repr.

    ``as_fraction(0.1) == Fraction(1, 10)``, which is what a user writing
    ``dt = 0.1`` means.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer, Rational)):
        return Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"expected a finite number, got {x!r}")
        return Fraction(repr(float(x)))
    return Fraction(str(x))


def _plain(x: Fraction) -> int | Fraction:
    return int(x) if x.denominator == 1 else x


@dataclass(frozen=True, eq=False)
class UniformSeries:
    """Uniformly sampled series anchored at a UTC epoch.

    Sample ``k`` sits at ``start_epoch + k * dt`` exactly; ``start_epoch`` and
    ``dt`` are kept as exact rationals. ``valid`` is the missing-data mask and
    values under a false mask entry carry no meaning. If ``valid`` is omitted
    every finite value is valid.

    Instances are immutable: both arrays are stored read-only.
    """

    start_epoch: Fraction
    dt: Fraction
    values: np.ndarray
    valid: np.ndarray = None
    unit: Unit = Unit.HERTZ

    def __post_init__(self):
        start = as_fraction(self.start_epoch)
        dt = as_fraction(self.dt)
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if self.valid is None:
            valid = np.isfinite(values)
        else:
            valid = np.array(self.valid, dtype=bool, copy=True).reshape(-1)
        if valid.shape != values.shape:
            raise ValueError(
                f"values and valid differ in length ({values.size} != {valid.size})"
            )
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "start_epoch", start)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "unit", Unit(self.unit))

    def __len__(self) -> int:
        return self.values.size

    @property
    def end_epoch(self) -> Fraction:
        """Exclusive end: the timestamp one sample past the last one."""
        return self.start_epoch + len(self) * self.dt

    def time_at(self, index: int) -> Fraction:
        return self.start_epoch + index * self.dt

    def timestamps(self) -> np.ndarray:
        """Sample times as float seconds (lossy for large epochs, display only)."""
        return float(self.start_epoch) + np.arange(len(self)) * float(self.dt)

    def replace(self, **changes) -> "UniformSeries":
        fields = dict(
            start_epoch=self.start_epoch,
            dt=self.dt,
            values=self.values,
            valid=self.valid,
            unit=self.unit,
        )
        fields.update(changes)
        return UniformSeries(**fields)

    def slice(self, first: int, stop: int) -> "UniformSeries":
        return UniformSeries(
            self.time_at(first),
            self.dt,
            self.values[first:stop],
            self.valid[first:stop],
            self.unit,
        )

    def masked_values(self) -> np.ndarray:
        """Copy of ``values`` with invalid samples set to NaN."""
        return np.where(self.valid, self.values, np.nan)

    def equals(self, other: "UniformSeries") -> bool:
        """Same grid, unit and mask, and bit-identical values where valid."""
        if not isinstance(other, UniformSeries):
            return False
        if (self.start_epoch, self.dt, self.unit, len(self)) != (
            other.start_epoch,
            other.dt,
            other.unit,
            len(other),
        ):
            return False
        if not np.array_equal(self.valid, other.valid):
            return False
        a = self.values[self.valid]
        b = other.values[other.valid]
        return bool(np.array_equal(a.view(np.int64), b.view(np.int64)))


@dataclass(frozen=True)
class Segment:
    """Closed index range ``[first_index, last_index]`` of a parent series."""

    parent: UniformSeries
    first_index: int
    last_index: int
    label_epoch: int | Fraction

    def __len__(self) -> int:
        return self.last_index - self.first_index + 1

    @property
    def stop(self) -> int:
        return self.last_index + 1

    def values(self) -> np.ndarray:
        return self.parent.values[self.first_index : self.stop]

    def valid(self) -> np.ndarray:
        return self.parent.valid[self.first_index : self.stop]

    def is_fully_valid(self) -> bool:
        return bool(self.valid().all())


def check_window(window_s, dt) -> Fraction:
    """Validate a tiling window against the sample interval; return it exactly."""
    window = as_fraction(window_s)
    dt = as_fraction(dt)
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if (window / dt).denominator != 1:
        raise ValueError(f"window {window} s is not an integer multiple of dt = {dt} s")
    day = Fraction(SECONDS_PER_DAY)
    if (day / window).denominator != 1 and (window / day).denominator != 1:
        raise ValueError(
            f"window {window} s neither divides a day nor is a whole number of days"
        )
    return window


def window_grid(series: UniformSeries, window_s) -> tuple[int, int, int, Fraction]:
    """Locate the complete UTC-aligned windows of ``series``.

    Returns ``(offset, n_windows, samples_per_window, first_label)`` where
    ``offset`` is the index of the first boundary at or after the start.
    """
    window = check_window(window_s, series.dt)
    spw = int(window / series.dt)
    k = math.ceil((series.start_epoch - ALIGN_ORIGIN) / window)
    first_label = ALIGN_ORIGIN + k * window
    lead = (first_label - series.start_epoch) / series.dt
    if lead.denominator != 1:
        raise ValueError(
            f"sample grid (start {series.start_epoch}, dt {series.dt}) does not "
            f"hit the {window} s window boundaries"
        )
    offset = int(lead)
    n_windows = max(0, (len(series) - offset) // spw)
    return offset, n_windows, spw, first_label


def segment(series: UniformSeries, window_s) -> list[Segment]:
    """Tile ``series`` with complete UTC-aligned windows of ``window_s`` seconds.

    Leading and trailing partial windows are dropped.
    """
    offset, n_windows, spw, first_label = window_grid(series, window_s)
    window = as_fraction(window_s)
    return [
        Segment(
            series,
            offset + i * spw,
            offset + (i + 1) * spw - 1,
            _plain(first_label + i * window),
        )
        for i in range(n_windows)
    ]


def block_ids(series: UniformSeries, window_s) -> np.ndarray:
    """Index of the UTC window (counted from the alignment origin) of each sample."""
    window = check_window(window_s, series.dt)
    scale = math.lcm(
        series.start_epoch.denominator, series.dt.denominator, window.denominator
    )
    s = int((series.start_epoch - ALIGN_ORIGIN) * scale)
    d = int(series.dt * scale)
    w = int(window * scale)
    return (s + d * np.arange(len(series), dtype=np.int64)) // w


def floor_times(series: UniformSeries) -> np.ndarray:
    """Sample times rounded down to whole seconds, exactly, as int64."""
    scale = math.lcm(series.start_epoch.denominator, series.dt.denominator)
    s = int(series.start_epoch * scale)
    d = int(series.dt * scale)
    return (s + d * np.arange(len(series), dtype=np.int64)) // scale


def drop_incomplete_windows(series: UniformSeries, window_s=3600) -> UniformSeries:
    """Invalidate every window that contains at least one invalid sample.

    Windows only partially covered by the series are judged on the samples
    present. Values are left untouched; only the mask shrinks.
    """
    if len(series) == 0 or series.valid.all():
        return series
    ids = block_ids(series, window_s)
    rel = ids - ids[0]
    bad = np.bincount(rel, weights=~series.valid, minlength=int(rel[-1]) + 1) > 0
    return series.replace(valid=series.valid & ~bad[rel])


def mean_valid(series: UniformSeries, start: int = 0, stop: int | None = None) -> float:
    """Mean of the valid samples in ``series[start:stop]``."""
    values = series.values[start:stop]
    valid = series.valid[start:stop]
    n = int(valid.sum())
    if n == 0:
        raise EmptyStatisticsError(
            f"no valid sample in index range [{start}, {len(series) if stop is None else stop})"
        )
    return float(values[valid].sum() / n)
