"""
Kernel adaptive cancellers
==========================

Gaussian-kernel LMS with an ever-growing dictionary (one center per step, no
sparsification) and its fixed-size random Fourier feature approximation.
Both see a regressor window as 42 reals ``[Re(taps), Im(taps)]`` and produce
complex estimates through complex expansion weights (equivalently two real
output channels sharing the kernel).
"""
from __future__ import annotations

import numpy as np

from .basis import DEFAULT_TAPS, delay_line_windows
from .canceller import Canceller, StepResult
from .errors import ConfigurationError, NumericFault

DEFAULT_KERNEL_MU = 0.5
DEFAULT_FEATURES = 500


def real_view(window):
    """``[Re(w), Im(w)]`` along the last axis."""
    w = np.asarray(window, dtype=complex)
    return np.concatenate([w.real, w.imag], axis=-1)


def gaussian_kernel(a, b, h):
    """``exp(-||a - b||^2 / (2 h^2))`` over the last axis."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * h * h))


def median_bandwidth(windows_real, n=500, seed=0):
    """Median pairwise Euclidean distance among ``n`` randomly chosen rows."""
    X = np.asarray(windows_real, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.choice(X.shape[0], size=min(n, X.shape[0]), replace=False)
    S = X[idx]
    sq = np.sum(S * S, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * S @ S.T
    iu = np.triu_indices(S.shape[0], 1)
    return float(np.median(np.sqrt(np.maximum(d2[iu], 0.0))))


class KernelDict:
    """Stored centers (real views) and complex expansion weights."""

    def __init__(self, h, dim=2 * DEFAULT_TAPS, capacity=1024):
        if not h > 0:
            raise ConfigurationError(f"kernel bandwidth must be positive, got {h}")
        self.h = float(h)
        self._centers = np.zeros((capacity, dim))
        self._sqnorms = np.zeros(capacity)
        self._alphas = np.zeros(capacity, dtype=complex)
        self.size = 0

    @property
    def centers(self):
        return self._centers[: self.size]

    @property
    def alphas(self):
        return self._alphas[: self.size]

    def predict(self, v):
        n = self.size
        if n == 0:
            return 0j
        d2 = self._sqnorms[:n] + v @ v - 2.0 * (self._centers[:n] @ v)
        k = np.exp(-np.maximum(d2, 0.0) / (2.0 * self.h * self.h))
        return complex(k @ self._alphas[:n])

    def append(self, v, alpha):
        if self.size == self._centers.shape[0]:
            grow = self._centers.shape[0]
            self._centers = np.vstack([self._centers, np.zeros_like(self._centers[:grow])])
            self._sqnorms = np.concatenate([self._sqnorms, np.zeros(grow)])
            self._alphas = np.concatenate([self._alphas, np.zeros(grow, dtype=complex)])
        self._centers[self.size] = v
        self._sqnorms[self.size] = v @ v
        self._alphas[self.size] = alpha
        self.size += 1


def klms_step(kdict, u_window, d, mu=DEFAULT_KERNEL_MU):
    """Predict with the current expansion, then store ``u_window`` with weight ``mu e``."""
    v = real_view(u_window)
    if not (np.all(np.isfinite(v)) and np.isfinite(d)):
        raise NumericFault("non-finite kernel input")
    y = kdict.predict(v)
    e = complex(d) - y
    kdict.append(v, mu * e)
    return StepResult(y, e)


class KLMS(Canceller):
    name = "klms"

    def __init__(self, h, taps=DEFAULT_TAPS, mu=DEFAULT_KERNEL_MU, capacity=1024):
        self.taps = taps
        self.mu = mu
        self.dict = KernelDict(h, 2 * taps, capacity)

    @property
    def param_count(self):
        return self.dict.size

    def step(self, window, d, boundary=False, upcoming=None):
        return klms_step(self.dict, window, d, self.mu)


class RandomFeatureMap:
    """Random Fourier features for the Gaussian kernel of bandwidth ``h``.

    ``omega`` rows are N(0, I / h^2) and phases are U[0, 2 pi); both are drawn
    once from ``default_rng(seed)``.
    """

    def __init__(self, h, dim=2 * DEFAULT_TAPS, n_features=DEFAULT_FEATURES, seed=0):
        if not h > 0:
            raise ConfigurationError(f"kernel bandwidth must be positive, got {h}")
        rng = np.random.default_rng(seed)
        self.h = float(h)
        self.D = n_features
        self.seed = seed
        self.omega = rng.standard_normal((n_features, dim)) / h
        self.b = rng.uniform(0.0, 2.0 * np.pi, n_features)
        self.omega.setflags(write=False)
        self.b.setflags(write=False)


def rfk_features(fmap, u_window):
    """``sqrt(2/D) cos(omega v + b)`` for the real view ``v`` of the window(s)."""
    v = real_view(u_window)
    return np.sqrt(2.0 / fmap.D) * np.cos(v @ fmap.omega.T + fmap.b)


class RFKLMS(Canceller):
    """LMS on random Fourier features with a fixed number of weights."""

    name = "rfk_lms"

    def __init__(self, h, taps=DEFAULT_TAPS, mu=DEFAULT_KERNEL_MU, n_features=DEFAULT_FEATURES, seed=0):
        self.taps = taps
        self.mu = mu
        self.fmap = RandomFeatureMap(h, 2 * taps, n_features, seed)
        self.w = np.zeros(n_features, dtype=complex)

    @property
    def param_count(self):
        """Complex weights; the real parameter count is twice this."""
        return self.w.size

    @property
    def real_param_count(self):
        return 2 * self.w.size

    def step(self, window, d, boundary=False, upcoming=None):
        z = rfk_features(self.fmap, window)
        if not (np.all(np.isfinite(z)) and np.isfinite(d)):
            raise NumericFault("non-finite kernel input")
        return self._update(z, d)

    def _update(self, z, d):
        y = complex(z @ self.w)
        e = complex(d) - y
        self.w += self.mu * z * e
        return StepResult(y, e)

    def run(self, x, d, boundaries=()):
        d = np.asarray(d, dtype=complex)
        Z = rfk_features(self.fmap, delay_line_windows(x, self.taps))
        if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(d))):
            raise NumericFault("non-finite kernel input")
        y_hat = np.zeros(d.size, dtype=complex)
        e = np.zeros(d.size, dtype=complex)
        for n in range(d.size):
            r = self._update(Z[n], d[n])
            y_hat[n], e[n] = r.y_hat, r.e
        return y_hat, e
