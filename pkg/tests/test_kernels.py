import numpy as np
import pytest

from gridpulse import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def both(monkeypatch, fn, *args, copy_first=False):
    results = []
    for flag in ("", "1"):
        monkeypatch.setenv(_kernels.ENV_FLAG, flag)
        call_args = list(args)
        if copy_first:
            call_args[0] = call_args[0].copy()
        results.append(fn(*call_args))
    return results


def test_backend_flag(monkeypatch):
    monkeypatch.setenv(_kernels.ENV_FLAG, "1")
    assert _kernels.backend() == "numpy"
    monkeypatch.setenv(_kernels.ENV_FLAG, "0")
    assert _kernels.backend() == "numba"
    monkeypatch.delenv(_kernels.ENV_FLAG)
    assert _kernels.backend() == "numba"


@pytest.mark.parametrize("damping", [0.0, 3e8, 5e9])
def test_rk4_backends_agree(monkeypatch, rng, damping):
    n = 2000
    forcing = rng.normal(0, 2e8, n)
    gain = np.repeat(50 / (2 * rng.uniform(1e11, 3e11, n // 500)), 500)
    (a, fa), (b, fb) = both(
        monkeypatch, _kernels.rk4_swing, 49.95, 50.0, damping, forcing, gain, 10, 0.1, 7, n * 10 // 7
    )
    assert fa == fb == -1
    np.testing.assert_allclose(a - 50, b - 50, rtol=1e-9, atol=1e-12)


def test_rk4_failure_index_agrees(monkeypatch):
    forcing = np.full(100, -1e8)
    gain = np.full(100, 50 / 2e6)
    (_, fa), (_, fb) = both(monkeypatch, _kernels.rk4_swing, 50.0, 50.0, 0.0, forcing, gain, 10, 0.1, 10, 100)
    assert fa == fb >= 0


@pytest.mark.parametrize(
    "mode, kwargs",
    [
        (_kernels.PHASE_CONSTANT, dict(phase0=17)),
        (_kernels.PHASE_DAILY_TABLE, dict(table=np.array([3, 41, 59, 0]), ticks_per_day=864000)),
        (_kernels.PHASE_DRIFT, dict(phase0=55.0, rate=50 / 864000)),
    ],
)
def test_pulses_backends_agree(monkeypatch, mode, kwargs):
    out = np.zeros(3 * 864000 + 777)
    t0 = 19786 * 864000 + 123
    a, b = both(
        monkeypatch,
        lambda o: _kernels.add_pulses(o, t0, 600, 20, 2.5, mode=mode, **kwargs),
        out,
        copy_first=True,
    )
    assert a.sum() > 0
    np.testing.assert_array_equal(a, b)


def test_fold_backends_agree(monkeypatch, rng):
    values = rng.normal(50, 0.01, (30, 3600))
    valid = rng.random((30, 3600)) > 1e-4
    (a, oka), (b, okb) = both(monkeypatch, _kernels.fold_amplitudes, values, valid, 60)
    np.testing.assert_array_equal(oka, okb)
    assert not oka.all() and oka.any()
    np.testing.assert_allclose(a[oka], b[okb], rtol=0, atol=1e-12)
    assert np.isnan(a[~oka]).all() and np.isnan(b[~okb]).all()
