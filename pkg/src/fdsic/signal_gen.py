"""
Transmit baseband generation
============================

Square M-QAM symbol sources, OFDM and single-carrier waveforms, and absolute
power scaling in dBm.

All randomness comes from :func:`numpy.random.default_rng`, i.e. the PCG64
bit generator seeded through ``SeedSequence(seed)``. Integer symbol indices
are drawn with ``Generator.integers(0, order, n)``, so a stream is fully
determined by ``(seed, spec, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, FramingError

QAM_ORDERS = (4, 16, 64, 256, 1024)


def dbm_to_watts(dbm):
    """Convert a power in dBm to watts (``-inf`` maps to 0)."""
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    """Convert a power in watts to dBm (0 W maps to ``-inf``)."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


def mean_power(samples):
    return float(np.mean(np.abs(np.asarray(samples)) ** 2))


class Waveform(str, Enum):
    OFDM = "ofdm"
    SINGLE_CARRIER = "single_carrier"


@dataclass(frozen=True)
class ModulationSpec:
    """Waveform description for one transmit segment.

    Parameters
    ----------
    kind: Waveform
        OFDM or single carrier.
    qam_order: int
        Square QAM order, one of 4, 16, 64, 256, 1024.
    fft_size: int
        OFDM block length (power of two). Ignored for single carrier.
    cp_len: int
        Cyclic prefix length in samples, ``cp_len < fft_size``.
    """

    kind: Waveform = Waveform.OFDM
    qam_order: int = 1024
    fft_size: int = 64
    cp_len: int = 16

    def __post_init__(self):
        object.__setattr__(self, "kind", Waveform(self.kind))
        if self.qam_order not in QAM_ORDERS:
            raise ConfigurationError(f"unsupported QAM order {self.qam_order}; expected one of {QAM_ORDERS}")
        if self.kind is Waveform.OFDM:
            n = self.fft_size
            if n < 1 or n & (n - 1):
                raise ConfigurationError(f"fft_size must be a power of two, got {n}")
            if not 0 <= self.cp_len < n:
                raise ConfigurationError(f"cp_len must satisfy 0 <= cp_len < fft_size, got {self.cp_len}")

    @property
    def samples_per_block(self):
        if self.kind is Waveform.OFDM:
            return self.fft_size + self.cp_len
        return 1


@dataclass
class TxStream:
    samples: np.ndarray
    power_dbm: float
    seed: int


def qam_constellation(order):
    """Return the ``order`` points of a square QAM constellation with unit mean power.

    Points are ordered row-major over (in-phase, quadrature) levels, lowest first.
    """
    if order not in QAM_ORDERS:
        raise ConfigurationError(f"unsupported QAM order {order}; expected one of {QAM_ORDERS}")
    m = int(round(np.sqrt(order)))
    levels = np.arange(-(m - 1), m, 2, dtype=float)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    # average energy of an m x m grid with odd-integer levels is 2(m^2 - 1)/3
    return points / np.sqrt(2.0 * (m * m - 1) / 3.0)


def gen_qam_symbols(order, n, seed):
    """Draw ``n`` i.i.d. uniform symbols from the unit-power square ``order``-QAM."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    points = qam_constellation(order)
    rng = np.random.default_rng(seed)
    return points[rng.integers(0, order, n)]


def ofdm_modulate(symbols, spec):
    """Map frequency-domain symbols to a CP-OFDM time-domain waveform.

    Each block of ``spec.fft_size`` symbols goes through a unitary inverse DFT
    (so time- and frequency-domain average powers match) and gets a cyclic
    prefix of ``spec.cp_len`` samples prepended.
    """
    if spec.kind is not Waveform.OFDM:
        raise ConfigurationError("ofdm_modulate needs an OFDM ModulationSpec")
    symbols = np.asarray(symbols, dtype=complex)
    n_fft = spec.fft_size
    if symbols.size % n_fft:
        raise FramingError(f"{symbols.size} symbols is not a multiple of fft_size={n_fft}")
    blocks = symbols.reshape(-1, n_fft)
    time = np.fft.ifft(blocks, axis=1, norm="ortho")
    if spec.cp_len:
        time = np.concatenate([time[:, -spec.cp_len:], time], axis=1)
    return time.ravel()


def sc_modulate(symbols, spec=None):
    """Single carrier at one sample per symbol: the symbols are the waveform."""
    return np.asarray(symbols, dtype=complex).copy()


def scale_to_dbm(samples, target_dbm):
    """Scale ``samples`` so their mean power is exactly ``target_dbm``."""
    samples = np.asarray(samples, dtype=complex)
    if samples.size == 0:
        raise DegenerateInputError("cannot scale an empty sequence")
    p = mean_power(samples)
    if p == 0.0:
        raise DegenerateInputError("cannot scale an all-zero sequence")
    return samples * np.sqrt(float(dbm_to_watts(target_dbm)) / p)


def modulate(spec, n_samples, seed):
    """Generate exactly ``n_samples`` unit-power waveform samples for ``spec``.

    OFDM output is built from whole blocks and truncated to ``n_samples``.
    """
    if spec.kind is Waveform.OFDM:
        n_blocks = -(-n_samples // spec.samples_per_block)
        symbols = gen_qam_symbols(spec.qam_order, n_blocks * spec.fft_size, seed)
        return ofdm_modulate(symbols, spec)[:n_samples]
    return sc_modulate(gen_qam_symbols(spec.qam_order, n_samples, seed))


def generate_tx(segments, power_dbm, seed):
    """Concatenate modulated segments, each scaled exactly to ``power_dbm``.

    Parameters
    ----------
    segments: sequence of (ModulationSpec, int)
        Waveform and length in samples of each segment, in transmission order.
    power_dbm: float
        Transmit power applied to every segment.
    seed: int
        Root seed; segment ``i`` uses the ``i``-th child of ``SeedSequence(seed)``.
    """
    if not segments:
        raise ConfigurationError("at least one segment is required")
    children = np.random.SeedSequence(seed).spawn(len(segments))
    parts = []
    for (spec, length), child in zip(segments, children):
        parts.append(scale_to_dbm(modulate(spec, length, child), power_dbm))
    return TxStream(np.concatenate(parts), float(power_dbm), seed)
