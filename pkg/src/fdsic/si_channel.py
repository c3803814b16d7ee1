"""
Self-interference path
======================

Memory-polynomial power amplifier, piecewise-constant FIR channel, the fixed
analog-cancellation power level and additive receiver noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .signal_gen import dbm_to_watts, mean_power

PA_ORDERS = (1, 3, 5)


@dataclass
class PAConfig:
    """Odd-order memory polynomial PA.

    ``coeffs[(k, m)]`` multiplies ``x[n-m] |x[n-m]|^(k-1)``. When
    ``input_ref_dbm`` is set, the polynomial acts on the input normalized to
    that power (unit drive) and the output is scaled back, so coefficients
    are independent of the absolute transmit level.
    """

    coeffs: dict
    memory_depth: int
    input_ref_dbm: float | None = None

    def __post_init__(self):
        if self.memory_depth < 1:
            raise ConfigurationError("memory_depth must be >= 1")
        clean = {}
        for key, value in self.coeffs.items():
            k, m = int(key[0]), int(key[1])
            if k not in PA_ORDERS:
                raise ConfigurationError(f"PA order {k} not in {PA_ORDERS}")
            if not 0 <= m < self.memory_depth:
                raise ConfigurationError(f"memory tap {m} outside 0..{self.memory_depth - 1}")
            clean[(k, m)] = complex(value)
        if clean.get((1, 0), 0) == 0:
            raise ConfigurationError("coeffs[(1, 0)] (linear gain) must be nonzero")
        self.coeffs = clean

    def branch_taps(self, order):
        """FIR taps (length ``memory_depth``) applied to the order-``order`` branch."""
        return np.array([self.coeffs.get((order, m), 0j) for m in range(self.memory_depth)])

    def linear_only(self):
        """Copy of this PA with the nonlinear branches removed."""
        lin = {key: c for key, c in self.coeffs.items() if key[0] == 1}
        return PAConfig(lin, self.memory_depth, self.input_ref_dbm)


def default_pa(input_ref_dbm=20.0):
    """Default three-tap PA, specified at unit drive relative to ``input_ref_dbm``."""
    profile = np.array([1.0, 0.2, 0.05])
    lin = [1.0, 0.05 * np.exp(0.3j), 0.01 * np.exp(-1.1j)]
    third = 0.08 * np.exp(0.5j) * profile
    fifth = 0.006 * np.exp(-0.8j) * profile
    coeffs = {}
    for m in range(3):
        coeffs[(1, m)] = lin[m]
        coeffs[(3, m)] = third[m]
        coeffs[(5, m)] = fifth[m]
    return PAConfig(coeffs, 3, input_ref_dbm)


def pa_apply(x, pa):
    """Pass ``x`` through the memory polynomial, zero history before ``x[0]``."""
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        raise ConfigurationError("PA input must be nonempty")
    scale = 1.0
    if pa.input_ref_dbm is not None:
        scale = np.sqrt(float(dbm_to_watts(pa.input_ref_dbm)))
    xn = x / scale
    mag2 = np.abs(xn) ** 2
    y = np.zeros_like(xn)
    for k in PA_ORDERS:
        taps = pa.branch_taps(k)
        if not np.any(taps):
            continue
        y += np.convolve(xn * mag2 ** ((k - 1) // 2), taps)[: x.size]
    return y * scale


def channel_apply(x, h):
    """Causal linear convolution of ``x`` with FIR ``h``, truncated to ``len(x)``."""
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        raise ConfigurationError("channel FIR must have at least one tap")
    x = np.asarray(x, dtype=complex)
    return np.convolve(x, h)[: x.size]


@dataclass
class ChannelSchedule:
    """Sequence of FIR channels, each active for ``change_interval`` samples."""

    change_interval: int
    taps_per_epoch: list
    seed: int | None = None

    def __post_init__(self):
        if self.change_interval < 1:
            raise ConfigurationError("change_interval must be >= 1")
        if not self.taps_per_epoch:
            raise ConfigurationError("at least one channel epoch is required")
        self.taps_per_epoch = [np.asarray(h, dtype=complex) for h in self.taps_per_epoch]

    @classmethod
    def draw(cls, n_epochs, length, change_interval, seed):
        """I.i.d. circular Gaussian taps, each epoch normalized to unit energy."""
        rng = np.random.default_rng(seed)
        taps = []
        for _ in range(n_epochs):
            h = rng.standard_normal(length) + 1j * rng.standard_normal(length)
            taps.append(h / np.linalg.norm(h))
        return cls(change_interval, taps, seed)

    @property
    def n_epochs(self):
        return len(self.taps_per_epoch)

    def epoch_bounds(self, n_samples):
        """``(start, stop)`` sample ranges of every epoch touched by ``n_samples``."""
        starts = range(0, n_samples, self.change_interval)
        return [(s, min(s + self.change_interval, n_samples)) for s in starts]


@dataclass
class RxFrame:
    """Post-analog-SIC receive signal with its components kept for diagnostics."""

    rx: np.ndarray
    si: np.ndarray
    noise: np.ndarray
    noise_dbm: float
    residual_si_dbm: float
    epoch_gains: list = field(default_factory=list)


def complex_noise(n, power_dbm, seed):
    """Circular complex Gaussian noise of mean power ``power_dbm``."""
    power = float(dbm_to_watts(power_dbm))
    if power == 0.0:
        return np.zeros(n, dtype=complex)
    rng = np.random.default_rng(seed)
    return np.sqrt(power / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def make_received(tx, pa, schedule, residual_si_dbm, noise_dbm, seed):
    """Build the receive stream seen by the digital canceller.

    For every channel epoch the PA output is filtered by that epoch's FIR (the
    delay line carries across the switch), then scaled by one gain chosen so
    the epoch's SI power equals ``residual_si_dbm``. Noise comes from its own
    RNG stream so it does not depend on the PA or channel settings.
    """
    tx = np.asarray(tx, dtype=complex)
    n = tx.size
    bounds = schedule.epoch_bounds(n)
    if len(bounds) > schedule.n_epochs:
        raise ConfigurationError(
            f"channel schedule has {schedule.n_epochs} epochs but the stream needs {len(bounds)}"
        )
    pa_out = pa_apply(tx, pa)
    target = float(dbm_to_watts(residual_si_dbm))
    si = np.zeros(n, dtype=complex)
    gains = []
    for (start, stop), h in zip(bounds, schedule.taps_per_epoch):
        # only the last len(h)-1 samples of history reach this epoch
        lo = max(0, start - (h.size - 1))
        seg = channel_apply(pa_out[lo:stop], h)[start - lo:]
        p = mean_power(seg)
        gain = np.sqrt(target / p) if p > 0 else 0.0
        si[start:stop] = gain * seg
        gains.append(gain)
    noise = complex_noise(n, noise_dbm, seed)
    return RxFrame(si + noise, si, noise, float(noise_dbm), float(residual_si_dbm), gains)
