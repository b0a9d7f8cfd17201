"""Averaged one-sided DFT magnitude spectra and narrow-peak detection.

Every fully valid UTC-aligned window is mean-removed and transformed with a
rectangular window; magnitudes are averaged bin by bin over windows. The
magnitude scale is that of a sinusoid's amplitude: ``A sin(2 pi k t / W)``
shows up as ``A`` in bin ``k``. With ``n`` samples per window, Parseval then
reads::

    sum(x**2) = n * (m[0]**2 + m[n/2]**2) + n/2 * sum(m[1:n/2]**2)

(the Nyquist term only for even ``n``); see :func:`parseval_energy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import EmptyStatisticsError, UniformSeries, as_fraction, window_grid

DEFAULT_WINDOW_S = 21600
_CHUNK_SAMPLES = 1 << 22


@dataclass(frozen=True)
class Spectrum:
    df: Fraction
    magnitudes: np.ndarray
    windows_averaged: int
    window_s: Fraction

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.magnitudes.size) * float(self.df)


@dataclass(frozen=True)
class PeakReport:
    period_s: float
    harmonic_index: int
    bin: int
    magnitude: float
    background: float
    prominence: float

    @property
    def frequency_hz(self) -> float:
        return self.harmonic_index / self.period_s


def window_magnitudes(x: np.ndarray) -> np.ndarray:
    """Amplitude-scaled one-sided magnitudes of mean-removed rows of ``x``."""
    x = np.atleast_2d(x)
    n = x.shape[-1]
    centered = x - x.mean(axis=-1, keepdims=True)
    mags = np.abs(np.fft.rfft(centered, axis=-1)) / n
    mags[..., 1 : (n + 1) // 2] *= 2.0
    return mags


def parseval_energy(magnitudes: np.ndarray, n: int) -> float:
    """Time-domain energy implied by the magnitudes of one ``n``-sample window."""
    m = np.asarray(magnitudes, dtype=np.float64)
    inner = m[1 : (n + 1) // 2]
    edge = m[0] ** 2 + (m[n // 2] ** 2 if n % 2 == 0 else 0.0)
    return float(n * edge + 0.5 * n * np.sum(inner**2))


def spectrum(series: UniformSeries, window_s=DEFAULT_WINDOW_S) -> Spectrum:
    """Average the magnitude spectra of all fully valid windows of ``series``."""
    offset, n_win, spw, _ = window_grid(series, window_s)
    total = None
    used = 0
    rows_per_chunk = max(1, _CHUNK_SAMPLES // spw)
    span = slice(offset, offset + n_win * spw)
    values = series.values[span].reshape(n_win, spw)
    good = np.flatnonzero(series.valid[span].reshape(n_win, spw).all(axis=1))
    for lo in range(0, good.size, rows_per_chunk):
        rows = good[lo : lo + rows_per_chunk]
        mags = window_magnitudes(values[rows])
        # fixed left-to-right reduction order for reproducible averages
        for row in mags:
            total = row.copy() if total is None else total + row
        used += rows.size
    if used == 0:
        raise EmptyStatisticsError("no fully valid window for the spectrum")
    window = as_fraction(window_s)
    return Spectrum(1 / window, total / used, used, window)


def harmonic_bin(spec: Spectrum, period_s, harmonic: int) -> int:
    k = spec.window_s * harmonic / as_fraction(period_s)
    if k.denominator != 1:
        raise ValueError(
            f"harmonic {harmonic} of period {period_s} s does not fall on a bin of a "
            f"{spec.window_s} s window"
        )
    k = int(k)
    if k >= spec.magnitudes.size:
        raise ValueError(f"harmonic {harmonic} of period {period_s} s lies above Nyquist")
    return k


def detect_peaks(
    spec: Spectrum,
    period_s=60,
    n_harmonics: int = 5,
    exclusion_bins: int = 2,
    min_prominence: float = 3.0,
    neighborhood: int = 50,
) -> list[PeakReport]:
    """Report harmonics of ``period_s`` standing out of the local median background.

    The background of harmonic ``m`` is the median magnitude of the bins
    within ``neighborhood`` of its bin, leaving out the DC bin and the
    ``exclusion_bins`` nearest bins on either side. A zero background gives an
    infinite prominence for a nonzero peak.
    """
    mags = spec.magnitudes
    reports = []
    for m in range(1, n_harmonics + 1):
        k = harmonic_bin(spec, period_s, m)
        lo = max(1, k - neighborhood)
        hi = min(mags.size, k + neighborhood + 1)
        idx = np.arange(lo, hi)
        idx = idx[np.abs(idx - k) > exclusion_bins]
        background = float(np.median(mags[idx])) if idx.size else 0.0
        mag = float(mags[k])
        if background > 0:
            prominence = mag / background
        else:
            prominence = math.inf if mag > 0 else 0.0
        if prominence >= min_prominence:
            reports.append(PeakReport(float(period_s), m, k, mag, background, prominence))
    return reports


def write_spectrum_csv(spec: Spectrum, stream) -> None:
    stream.write("frequency_hz,magnitude\n")
    freqs = spec.frequencies
    stream.write("".join(f"{f!r},{m!r}\n" for f, m in zip(freqs.tolist(), spec.magnitudes.tolist())))
