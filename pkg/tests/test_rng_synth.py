import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridpulse.core import drop_incomplete_windows
from gridpulse.rng import normals, raw_words, uniforms
from gridpulse.synth import (
    Gap,
    PulseTrain,
    Sinusoid,
    SynthSpec,
    WhiteNoise,
    component_from_dict,
    generate,
)
from gridpulse.waveform import hourly_amplitudes

from conftest import MONDAY


def test_raw_words_are_philox_blocks():
    # word i is output i % 4 of counter block i // 4 of Philox4x64 keyed by (seed, stream)
    bg = np.random.Philox(key=[7, 3], counter=0)
    expected = bg.random_raw(12)
    np.testing.assert_array_equal(raw_words(7, 3, 0, 12), expected)
    np.testing.assert_array_equal(raw_words(7, 3, 5, 4), expected[5:9])


def test_top_stream_key_is_exact():
    key = np.array([2, (1 << 64) - 1], dtype=np.uint64)
    expected = np.random.Philox(key=key).random_raw(4)
    np.testing.assert_array_equal(raw_words(2, (1 << 64) - 1, 0, 4), expected)


def test_uniforms_use_top_53_bits():
    w = raw_words(1, 2, 0, 8)
    np.testing.assert_array_equal(uniforms(1, 2, 0, 8), (w >> np.uint64(11)) * 2.0**-53)


def test_normals_box_muller():
    u = uniforms(11, 0, 0, 10)
    expected = np.sqrt(-2 * np.log1p(-u[0::2])) * np.cos(2 * np.pi * u[1::2])
    np.testing.assert_allclose(normals(11, 0, 0, 5), expected, rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(first=st.integers(0, 1000), count=st.integers(0, 50))
def test_normals_are_counter_addressed(first, count):
    whole = normals(5, 9, 0, 1100)
    np.testing.assert_array_equal(normals(5, 9, first, count), whole[first : first + count])


def test_normals_moments():
    z = normals(3, 0, 0, 200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1) < 0.01


SPEC = SynthSpec(
    duration_s=3 * 3600,
    dt=1,
    start_epoch=MONDAY,
    components=(
        Sinusoid(60, 0.005, 3),
        PulseTrain(60, 2, -0.01, 5),
        WhiteNoise(0.002, seed=4),
        Gap(5000, 30),
    ),
)


def test_identical_spec_is_bit_identical():
    a, b = generate(SPEC), generate(SPEC)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.valid.tobytes() == b.valid.tobytes()


@settings(max_examples=25, deadline=None)
@given(cuts=st.lists(st.integers(1, 3 * 3600 - 1), max_size=4, unique=True))
def test_chunked_generation_equals_whole(cuts):
    whole = generate(SPEC)
    edges = [0, *sorted(cuts), SPEC.n_samples]
    parts = [generate(SPEC, lo, hi - lo) for lo, hi in zip(edges, edges[1:])]
    assert np.concatenate([p.values for p in parts]).tobytes() == whole.values.tobytes()
    np.testing.assert_array_equal(np.concatenate([p.valid for p in parts]), whole.valid)
    assert all(p.start_epoch == whole.time_at(lo) for p, lo in zip(parts, edges))


def test_sinusoid_hourly_amplitude():
    s = generate(SynthSpec(86400, start_epoch=MONDAY, components=(Sinusoid(60, 0.005),)))
    a = hourly_amplitudes(s).amplitudes
    assert len(a) == 24
    np.testing.assert_allclose(a.values, 0.005, rtol=0, atol=1e-12)


def test_gap_invalidates_hour_two():
    spec = SynthSpec(5 * 3600, start_epoch=MONDAY, components=(Gap(7200, 10),))
    s = drop_incomplete_windows(generate(spec))
    hours = s.valid.reshape(5, 3600)
    assert hours.all(axis=1).tolist() == [True, True, False, True, True]
    assert not hours[2].any()


def test_seeds_change_only_noise():
    base = (Sinusoid(60, 0.005), Gap(100, 5))
    a = generate(SynthSpec(600, components=(*base, WhiteNoise(0.01, 1))))
    b = generate(SynthSpec(600, components=(*base, WhiteNoise(0.01, 2))))
    clean = generate(SynthSpec(600, components=base))
    assert not np.array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.valid, b.valid)
    np.testing.assert_array_equal(a.valid, clean.valid)
    np.testing.assert_allclose(a.values - clean.values, 0.01 * normals(1, 0, 0, 600), atol=1e-13)


def test_pulse_train_definition():
    s = generate(SynthSpec(130, base=0, components=(PulseTrain(60, 2, 7.0, 5),)))
    on = np.flatnonzero(s.values)
    assert on.tolist() == [5, 6, 65, 66, 125, 126]
    assert (s.values[on] == 7.0).all()


def test_periodic_components_follow_absolute_time():
    # a series starting 13 s later is the same signal shifted by 13 samples
    comp = (Sinusoid(60, 1.0, 4), PulseTrain(60, 3, 1.0, 50))
    a = generate(SynthSpec(600, start_epoch=MONDAY, components=comp))
    b = generate(SynthSpec(587, start_epoch=MONDAY + 13, components=comp))
    np.testing.assert_array_equal(a.values[13:], b.values)


def test_subsecond_dt():
    s = generate(SynthSpec(120, dt=0.1, base=0, components=(PulseTrain(60, 0.5, 1.0, 1.2),)))
    assert np.flatnonzero(s.values[:600]).tolist() == [12, 13, 14, 15, 16]


@pytest.mark.parametrize(
    "comp",
    [Sinusoid(7.5, 1.0), PulseTrain(60, 1.5, 1.0)],
)
def test_non_divisible_periods_rejected(comp):
    with pytest.raises(ValueError, match="does not divide"):
        generate(SynthSpec(600, components=(comp,)))


def test_component_from_dict():
    assert component_from_dict({"kind": "gap", "start": 1, "length": 2}) == Gap(1, 2)
    with pytest.raises(ValueError, match="unknown component"):
        component_from_dict({"kind": "chirp"})
    with pytest.raises(ValueError, match="bad sinusoid"):
        component_from_dict({"kind": "sinusoid", "period": 60, "amp": 1})
