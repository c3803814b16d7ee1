import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdsic.errors import ConfigurationError, DegenerateInputError, FramingError
from fdsic.signal_gen import (
    ModulationSpec,
    Waveform,
    dbm_to_watts,
    gen_qam_symbols,
    generate_tx,
    mean_power,
    modulate,
    ofdm_modulate,
    qam_constellation,
    scale_to_dbm,
    watts_to_dbm,
)

OFDM = ModulationSpec(Waveform.OFDM, 1024, 64, 16)


def test_qpsk_points_and_unit_power():
    pts = qam_constellation(4)
    expected = {complex(a, b) / np.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert len(pts) == 4
    for p in pts:
        assert min(abs(p - q) for q in expected) < 1e-15
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, abs=1e-15)
    syms = gen_qam_symbols(4, 1000, 3)
    assert np.all(np.isclose(np.abs(syms.real), 1 / np.sqrt(2)))
    assert np.all(np.isclose(np.abs(syms.imag), 1 / np.sqrt(2)))


def test_16qam_normalization_constant():
    # raw grid {-3,-1,1,3}^2 has mean energy 10, so the scale is 1/sqrt(10)
    pts = qam_constellation(16)
    assert np.min(np.abs(pts.real)) == pytest.approx(1 / np.sqrt(10), rel=1e-14)
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("order", [4, 16, 64, 256, 1024])
def test_constellation_unit_power(order):
    assert np.mean(np.abs(qam_constellation(order)) ** 2) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("order", [2, 8, 32, 100, 4096])
def test_unsupported_order(order):
    with pytest.raises(ConfigurationError):
        gen_qam_symbols(order, 10, 0)


def test_qam_seed_determinism():
    a = gen_qam_symbols(1024, 500, 7)
    b = gen_qam_symbols(1024, 500, 7)
    c = gen_qam_symbols(1024, 500, 8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_qam_histogram_uniform():
    n, order = 100_000, 16
    pts = qam_constellation(order)
    syms = gen_qam_symbols(order, n, 11)
    idx = np.argmin(np.abs(syms[:, None] - pts[None, :]), axis=1)
    counts = np.bincount(idx, minlength=order)
    p = 1 / order
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 4 * sigma)


def test_ofdm_zero_block():
    out = ofdm_modulate(np.zeros(64), OFDM)
    assert out.shape == (80,)
    assert not np.any(out)


def test_ofdm_parseval_one_block():
    syms = gen_qam_symbols(4, 64, 0)
    out = ofdm_modulate(syms, ModulationSpec(Waveform.OFDM, 4, 64, 0))
    assert np.mean(np.abs(out) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_ofdm_cyclic_prefix():
    syms = gen_qam_symbols(16, 128, 1)
    out = ofdm_modulate(syms, ModulationSpec(Waveform.OFDM, 16, 64, 16)).reshape(2, 80)
    assert np.allclose(out[:, :16], out[:, -16:])


def test_ofdm_framing_error():
    with pytest.raises(FramingError):
        ofdm_modulate(np.ones(65), OFDM)


def test_ofdm_near_gaussian_kurtosis():
    x = modulate(OFDM, 100_000, 5)
    p = np.abs(x) ** 2
    kurt = np.mean(p * p) / np.mean(p) ** 2
    assert 1.9 <= kurt <= 2.1


@pytest.mark.parametrize("bad", [
    dict(qam_order=12),
    dict(fft_size=48),
    dict(cp_len=64),
    dict(cp_len=-1),
])
def test_modulation_spec_validation(bad):
    with pytest.raises(ConfigurationError):
        ModulationSpec(**{"kind": "ofdm", **bad})


def test_scale_examples():
    x = gen_qam_symbols(4, 256, 2)
    y = scale_to_dbm(x, 20.0)
    assert np.allclose(y, x * np.sqrt(0.1), rtol=1e-13)
    assert np.allclose(scale_to_dbm(x, 30.0), x, rtol=1e-13)
    assert mean_power(scale_to_dbm(x, -90.0)) == pytest.approx(1e-12, rel=1e-12)


def test_scale_degenerate():
    with pytest.raises(DegenerateInputError):
        scale_to_dbm(np.zeros(8), 0.0)
    with pytest.raises(DegenerateInputError):
        scale_to_dbm(np.zeros(0), 0.0)


@given(
    target=st.floats(-120, 40),
    seed=st.integers(0, 2 ** 32 - 1),
    n=st.integers(1, 300),
)
def test_scale_power_contract(target, seed, n):
    x = np.random.default_rng(seed).standard_normal(n) + 0.5j
    got = watts_to_dbm(mean_power(scale_to_dbm(x, target)))
    assert abs(got - target) < 1e-9


def test_dbm_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-50.0) == pytest.approx(1e-8)
    assert dbm_to_watts(-np.inf) == 0.0
    assert watts_to_dbm(0.0) == -np.inf


def test_generate_tx_segments():
    segs = [(OFDM, 4400), (ModulationSpec(Waveform.SINGLE_CARRIER, 1024), 4400)]
    tx = generate_tx(segs, 20.0, 1)
    assert tx.samples.shape == (8800,)
    for s in (slice(0, 4400), slice(4400, 8800)):
        assert watts_to_dbm(mean_power(tx.samples[s])) == pytest.approx(20.0, abs=1e-9)
    again = generate_tx(segs, 20.0, 1)
    assert np.array_equal(tx.samples, again.samples)


def test_tx_power_long_stream():
    tx = generate_tx([(OFDM, 20_000)], 20.0, 9)
    assert mean_power(tx.samples) == pytest.approx(0.1, rel=0.01)


def test_generate_tx_requires_segments():
    with pytest.raises(ConfigurationError):
        generate_tx([], 20.0, 0)
