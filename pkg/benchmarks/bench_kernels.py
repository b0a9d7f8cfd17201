"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed over ``--repeat`` runs; the best time is reported. The
backend is switched through the same environment flag users set.
"""

import argparse
import os
import time

import numpy as np

from gridpulse import _kernels


def rk4_case(rng):
    # one day of 1 s forcing at the 0.1 s internal step
    n = 86400
    forcing = rng.normal(0, 5e7, n)
    gain = np.full(n, 50 / (2 * 2e11))
    return lambda: _kernels.rk4_swing(50.0, 50.0, 0.0, forcing, gain, 10, 0.1, 10, n)


def rk4_damped_case(rng):
    n = 86400
    forcing = rng.normal(0, 5e7, n)
    gain = np.full(n, 50 / (2 * 2e11))
    return lambda: _kernels.rk4_swing(50.0, 50.0, 3e8, forcing, gain, 10, 0.1, 10, n)


def pulses_case(rng):
    # 30 days of a drifting 2 s pulse at 1 s resolution
    out = np.zeros(30 * 86400)

    def go():
        out[:] = 0.0
        _kernels.add_pulses(out, 19786 * 86400, 60, 2, 1e3, mode=_kernels.PHASE_DRIFT,
                            phase0=5.0, rate=5 / 86400)

    return go


def fold_case(rng):
    # a week of hourly windows folded on the minute
    values = rng.normal(50, 0.01, (168, 3600))
    valid = np.ones_like(values, dtype=bool)
    return lambda: _kernels.fold_amplitudes(values, valid, 60)


CASES = {
    "rk4_swing (1 day, D=0)": rk4_case,
    "rk4_swing (1 day, D>0)": rk4_damped_case,
    "add_pulses (30 days)": pulses_case,
    "fold_amplitudes (168 h)": fold_case,
}


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        parser.exit(1, "numba is not installed; nothing to compare\n")

    saved = os.environ.get(_kernels.ENV_FLAG)
    print(f"{'kernel':<26} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    try:
        for name, make in CASES.items():
            timings = {}
            for label, flag in (("numba", ""), ("numpy", "1")):
                os.environ[_kernels.ENV_FLAG] = flag
                timings[label] = best_time(make(np.random.default_rng(0)), args.repeat)
            ratio = timings["numpy"] / timings["numba"]
            print(f"{name:<26} {timings['numba'] * 1e3:>8.1f}ms {timings['numpy'] * 1e3:>8.1f}ms {ratio:>7.1f}x")
    finally:
        if saved is None:
            os.environ.pop(_kernels.ENV_FLAG, None)
        else:
            os.environ[_kernels.ENV_FLAG] = saved


if __name__ == "__main__":
    main()
