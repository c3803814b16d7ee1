import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cn
from fdsic.errors import ConfigurationError
from fdsic.si_channel import (
    ChannelSchedule,
    PAConfig,
    channel_apply,
    complex_noise,
    default_pa,
    make_received,
    pa_apply,
)
from fdsic.signal_gen import (
    ModulationSpec,
    gen_qam_symbols,
    generate_tx,
    mean_power,
    ofdm_modulate,
    scale_to_dbm,
    watts_to_dbm,
)


def test_identity_pa(rng):
    x = cn(rng, 100)
    assert np.array_equal(pa_apply(x, PAConfig({(1, 0): 1.0}, 1)), x)


def test_single_cubic_branch():
    c = 0.3 - 0.4j
    r = 1.7
    x = r * np.exp(1j * np.linspace(0, 6, 50))
    pa = PAConfig({(1, 0): 1e-30, (3, 0): c}, 1)
    y = pa_apply(x, pa)
    assert np.allclose(np.abs(y), abs(c) * r ** 3, rtol=1e-12)


def test_memory_polynomial_direct_sum(rng):
    x = cn(rng, 40)
    pa = default_pa(input_ref_dbm=None)
    y = pa_apply(x, pa)
    ref = np.zeros_like(x)
    for n in range(x.size):
        for (k, m), c in pa.coeffs.items():
            if n - m >= 0:
                ref[n] += c * x[n - m] * abs(x[n - m]) ** (k - 1)
    assert np.allclose(y, ref, rtol=1e-12, atol=1e-14)


def test_pa_reference_level_is_unit_drive(rng):
    x = cn(rng, 200)
    scaled = pa_apply(x * np.sqrt(0.1), default_pa(20.0))
    assert np.allclose(scaled, pa_apply(x, default_pa(None)) * np.sqrt(0.1), rtol=1e-12)


@pytest.mark.parametrize("coeffs, depth", [
    ({(1, 0): 0.0, (3, 0): 1.0}, 1),
    ({(1, 0): 1.0, (2, 0): 1.0}, 1),
    ({(1, 0): 1.0, (3, 2): 1.0}, 2),
    ({(1, 0): 1.0}, 0),
])
def test_pa_validation(coeffs, depth):
    with pytest.raises(ConfigurationError):
        PAConfig(coeffs, depth)


def test_spectral_regrowth():
    # 15 occupied bins; the cyclic prefix (16) exceeds the PA memory (3), so
    # the linear-only PA acts circularly per block and leaves the guard bins empty
    spec = ModulationSpec("ofdm", 1024, 64, 16)
    sy = gen_qam_symbols(1024, 64 * 500, 1).reshape(-1, 64)
    sy[:, 8:57] = 0
    x = scale_to_dbm(ofdm_modulate(sy.ravel(), spec), 20.0)

    def oob_fraction(pa):
        y = pa_apply(x, pa).reshape(-1, 80)[1:, 16:]
        p = np.abs(np.fft.fft(y, axis=1)) ** 2
        return p[:, 8:57].sum() / p.sum()

    full = oob_fraction(default_pa())
    lin = oob_fraction(default_pa().linear_only())
    assert 10 * np.log10(full / max(lin, 1e-300)) >= 10
    assert 10 * np.log10(full) > -40


def test_channel_identity_and_delay(rng):
    x = cn(rng, 30)
    assert np.array_equal(channel_apply(x, [1.0]), x)
    d = channel_apply(x, [0.0, 1.0])
    assert d[0] == 0 and np.array_equal(d[1:], x[:-1])
    with pytest.raises(ConfigurationError):
        channel_apply(x, [])


def test_unit_energy_channel_power(rng):
    h = ChannelSchedule.draw(1, 19, 10, seed=4).taps_per_epoch[0]
    assert np.sum(np.abs(h) ** 2) == pytest.approx(1.0, rel=1e-12)
    y = channel_apply(cn(rng, 100_000), h)
    assert mean_power(y) == pytest.approx(1.0, rel=0.02)


def test_schedule_draw_deterministic():
    a = ChannelSchedule.draw(4, 21, 2200, seed=2)
    b = ChannelSchedule.draw(4, 21, 2200, seed=2)
    assert a.n_epochs == 4
    for ha, hb in zip(a.taps_per_epoch, b.taps_per_epoch):
        assert ha.shape == (21,)
        assert np.array_equal(ha, hb)
        assert np.linalg.norm(ha) == pytest.approx(1.0)
    assert a.epoch_bounds(8800) == [(0, 2200), (2200, 4400), (4400, 6600), (6600, 8800)]


def _reference_tx(n=8800, seed=1):
    spec = ModulationSpec("ofdm", 1024, 64, 16)
    return generate_tx([(spec, n)], 20.0, seed).samples


def test_noise_free_epoch_power():
    tx = _reference_tx()
    sched = ChannelSchedule.draw(4, 21, 2200, seed=2)
    frame = make_received(tx, default_pa(), sched, -50.0, -np.inf, seed=3)
    assert not np.any(frame.noise)
    for start, stop in sched.epoch_bounds(tx.size):
        assert watts_to_dbm(mean_power(frame.rx[start:stop])) == pytest.approx(-50.0, abs=0.1)


def test_noise_only_floor():
    tx = np.zeros(100_000, dtype=complex)
    sched = ChannelSchedule.draw(1, 21, 100_000, seed=2)
    frame = make_received(tx, default_pa(), sched, -50.0, -90.0, seed=3)
    assert not np.any(frame.si)
    assert watts_to_dbm(mean_power(frame.rx)) == pytest.approx(-90.0, abs=0.1)


def test_si_to_noise_ratio():
    tx = _reference_tx()
    sched = ChannelSchedule.draw(4, 19, 2200, seed=2)
    frame = make_received(tx, default_pa(), sched, -50.0, -90.0, seed=3)
    snr = watts_to_dbm(mean_power(frame.si)) - watts_to_dbm(mean_power(frame.noise))
    assert snr == pytest.approx(40.0, abs=0.5)


def test_noise_independent_of_pa_and_channel():
    tx = _reference_tx(4400)
    a = make_received(tx, default_pa(), ChannelSchedule.draw(2, 19, 2200, 2), -50, -90, seed=7)
    b = make_received(tx, default_pa().linear_only(), ChannelSchedule.draw(2, 5, 2200, 9), -40, -90, seed=7)
    assert np.array_equal(a.noise, b.noise)
    assert np.array_equal(a.noise, complex_noise(4400, -90, 7))


def test_epoch_isolation():
    tx = _reference_tx(6600)
    base = ChannelSchedule.draw(3, 19, 2200, seed=2)
    other = ChannelSchedule(2200, [base.taps_per_epoch[0], -1j * base.taps_per_epoch[1][::-1], base.taps_per_epoch[2]])
    a = make_received(tx, default_pa(), base, -50, -np.inf, 0)
    b = make_received(tx, default_pa(), other, -50, -np.inf, 0)
    assert np.array_equal(a.rx[:2200], b.rx[:2200])
    # epoch 2 uses epoch-2 taps on a PA stream that is unchanged, so it is unaffected too
    assert np.array_equal(a.rx[4400:], b.rx[4400:])
    assert not np.allclose(a.rx[2200:4400], b.rx[2200:4400])


def test_schedule_exhausted():
    tx = _reference_tx(4400)
    with pytest.raises(ConfigurationError):
        make_received(tx, default_pa(), ChannelSchedule.draw(1, 19, 2200, 2), -50, -90, 0)


@given(level=st.floats(-80, -20), seed=st.integers(0, 1000))
def test_residual_level_property(level, seed):
    tx = _reference_tx(1000, seed)
    frame = make_received(tx, default_pa(), ChannelSchedule.draw(2, 7, 500, seed), level, -np.inf, 0)
    for start, stop in ((0, 500), (500, 1000)):
        assert watts_to_dbm(mean_power(frame.rx[start:stop])) == pytest.approx(level, abs=1e-9)
