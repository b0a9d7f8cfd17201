"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is chosen per call: numba unless ``GRIDPULSE_DISABLE_NUMBA`` is
set to a non-empty value other than ``0`` (or numba is not importable).
The two paths are written independently and agree to rounding, which the
test suite checks; ``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.signal import lfilter

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

ENV_FLAG = "GRIDPULSE_DISABLE_NUMBA"

PHASE_CONSTANT = 0
PHASE_DAILY_TABLE = 1
PHASE_DRIFT = 2


def backend() -> str:
    flag = os.environ.get(ENV_FLAG, "").strip()
    if not HAVE_NUMBA or (flag and flag != "0"):
        return "numpy"
    return "numba"


# ---------------------------------------------------------------------------
# aggregated swing equation, classical RK4 with sample-and-hold forcing
# ---------------------------------------------------------------------------


def _rk4_swing_py(f0, f_ref, damping, forcing, gain, substeps, h, out_every, n_out):
    out = np.empty(n_out)
    f = f0
    s = 0
    n_steps = forcing.size * substeps
    for s in range(n_steps):
        if s % out_every == 0 and s // out_every < n_out:
            out[s // out_every] = f
        i = s // substeps
        p = forcing[i]
        g = gain[i]
        k1 = g * (p - damping * (f - f_ref))
        f2 = f + 0.5 * h * k1
        k2 = g * (p - damping * (f2 - f_ref))
        f3 = f + 0.5 * h * k2
        k3 = g * (p - damping * (f3 - f_ref))
        f4 = f + h * k3
        k4 = g * (p - damping * (f4 - f_ref))
        f = f + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not f > 0.0:
            return out, s
    return out, -1


if HAVE_NUMBA:
    _rk4_swing_nb = njit(cache=True, nogil=True)(_rk4_swing_py)


def _rk4_swing_np(f0, f_ref, damping, forcing, gain, substeps, h, out_every, n_out):
    # RK4 on y' = c + lam*y is exactly y <- R(z) y + h c Q(z), z = h lam.
    z = -h * gain * damping
    r = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)))
    q = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    drive = h * gain * forcing * q

    n = forcing.size
    bounds = np.flatnonzero(np.diff(r)) + 1
    starts = np.concatenate(([0], bounds))
    stops = np.concatenate((bounds, [n]))
    out = np.empty(n_out)
    y = f0 - f_ref
    step = 0
    chunk = max(1, (1 << 20) // substeps)
    for a, b in zip(starts, stops):
        for lo in range(a, b, chunk):
            hi = min(b, lo + chunk)
            inc = np.repeat(drive[lo:hi], substeps)
            ys = lfilter([1.0], [1.0, -r[lo]], inc, zi=[r[lo] * y])[0]
            states = np.concatenate(([y], ys[:-1]))
            first = -step % out_every
            j0 = (step + first) // out_every
            picks = states[first::out_every][: max(n_out - j0, 0)]
            out[j0 : j0 + picks.size] = picks + f_ref
            bad = np.flatnonzero(~(ys + f_ref > 0.0))
            if bad.size:
                return out, step + int(bad[0])
            y = ys[-1]
            step += inc.size
    return out, -1


def rk4_swing(f0, f_ref, damping, forcing, gain, substeps, h, out_every, n_out):
    """Integrate ``df/dt = gain * (P - D (f - f_ref))``.

    ``forcing`` and ``gain`` are held constant over ``substeps`` RK4 steps of
    length ``h`` each. Returns the state sampled every ``out_every`` steps
    (``n_out`` values, starting with ``f0``) and the index of the first step
    whose result is not positive, or -1.
    """
    args = (
        float(f0),
        float(f_ref),
        float(damping),
        np.ascontiguousarray(forcing, dtype=np.float64),
        np.ascontiguousarray(gain, dtype=np.float64),
        int(substeps),
        float(h),
        int(out_every),
        int(n_out),
    )
    if backend() == "numba":
        return _rk4_swing_nb(*args)
    return _rk4_swing_np(*args)


# ---------------------------------------------------------------------------
# periodic pulse loads on an integer tick grid
# ---------------------------------------------------------------------------


def _add_pulses_py(out, t0, period, width, power, mode, phase0, table, ticks_per_day, rate):
    for k in range(out.size):
        t = t0 + k
        if mode == PHASE_CONSTANT:
            ph = int(phase0)
        elif mode == PHASE_DAILY_TABLE:
            ph = table[t // ticks_per_day - t0 // ticks_per_day]
        else:
            ph = int(np.floor(phase0 + rate * float(k)))
        if (t - ph) % period < width:
            out[k] += power


if HAVE_NUMBA:
    _add_pulses_nb = njit(cache=True, nogil=True)(_add_pulses_py)


def _add_pulses_np(out, t0, period, width, power, mode, phase0, table, ticks_per_day, rate):
    t = t0 + np.arange(out.size, dtype=np.int64)
    if mode == PHASE_CONSTANT:
        ph = np.int64(phase0)
    elif mode == PHASE_DAILY_TABLE:
        ph = table[t // ticks_per_day - t0 // ticks_per_day]
    else:
        ph = np.floor(phase0 + rate * np.arange(out.size, dtype=np.float64)).astype(np.int64)
    out[(t - ph) % period < width] += power


def add_pulses(out, t0, period, width, power, mode=PHASE_CONSTANT, phase0=0.0,
               table=None, ticks_per_day=1, rate=0.0):
    """Add a pulse train to ``out`` in place; all times are integer ticks.

    Sample ``k`` is at tick ``t0 + k`` and is loaded with ``power`` when
    ``(t - phase) mod period < width``. The phase is ``phase0`` (mode 0),
    ``table[day]`` with days counted from the day of ``t0`` (mode 1), or
    ``floor(phase0 + rate * k)`` (mode 2).
    """
    if table is None:
        table = np.zeros(1, dtype=np.int64)
    args = (
        out,
        np.int64(t0),
        np.int64(period),
        np.int64(width),
        float(power),
        int(mode),
        float(phase0),
        np.ascontiguousarray(table, dtype=np.int64),
        np.int64(ticks_per_day),
        float(rate),
    )
    if backend() == "numba":
        _add_pulses_nb(*args)
    else:
        _add_pulses_np(*args)
    return out


# ---------------------------------------------------------------------------
# block folding: one waveform amplitude per window
# ---------------------------------------------------------------------------


def _fold_amplitudes_py(values, valid, n_per):
    n_win, length = values.shape
    n_blocks = length // n_per
    amps = np.empty(n_win)
    ok = np.zeros(n_win, dtype=np.bool_)
    acc = np.empty(n_per)
    for w in range(n_win):
        good = True
        for i in range(length):
            if not valid[w, i]:
                good = False
                break
        if not good:
            amps[w] = np.nan
            continue
        acc[:] = 0.0
        for b in range(n_blocks):
            base = b * n_per
            for k in range(n_per):
                acc[k] += values[w, base + k]
        hi = -np.inf
        lo = np.inf
        for k in range(n_per):
            m = acc[k] / n_blocks
            if m > hi:
                hi = m
            if m < lo:
                lo = m
        amps[w] = 0.5 * (hi - lo)
        ok[w] = True
    return amps, ok


if HAVE_NUMBA:
    _fold_amplitudes_nb = njit(cache=True, nogil=True)(_fold_amplitudes_py)


def _fold_amplitudes_np(values, valid, n_per):
    n_win, length = values.shape
    ok = valid.all(axis=1)
    bins = values.reshape(n_win, length // n_per, n_per).mean(axis=1)
    amps = 0.5 * (bins.max(axis=1) - bins.min(axis=1))
    amps[~ok] = np.nan
    return amps, ok


def fold_amplitudes(values, valid, n_per):
    """Half peak-to-peak of the folded waveform of every row of ``values``.

    Rows containing an invalid sample give NaN and a false flag.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    if values.shape[1] % n_per:
        raise ValueError("window length is not a multiple of the fold period")
    if backend() == "numba":
        return _fold_amplitudes_nb(values, valid, int(n_per))
    return _fold_amplitudes_np(values, valid, int(n_per))
