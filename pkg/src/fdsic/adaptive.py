"""
Model-based adaptive cancellers
===============================

Four online polynomial cancellers sharing one LMS core:

* ``WHLMS``      - raw Hammerstein branches.
* ``WHRLSOrth``  - Hammerstein branches whitened by an offline covariance
                   eigendecomposition.
* ``WIHLMS``     - closed-form Ito-Hermite branches for Gaussian input.
* ``AOPLMS``     - orthonormal branches rebuilt from estimated moments at
                   every distribution change.

Step size convention: every canceller uses the same normalized step ``mu``.
Each branch group is scaled to unit running power (bias-corrected EMA) and
the update is NLMS on that scaled regressor,
``w += mu * g * u * conj(e) / sum(g |u|^2)`` with ``g = 1 / P_branch``.
For orthonormal regressors this is plain NLMS with average step ``mu / 63``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import (
    DEFAULT_TAPS,
    N_BRANCHES,
    BasisMatrix,
    apply_basis,
    delay_line_windows,
    estimate_moments,
    gram_schmidt,
    ihp_matrix,
)
from .canceller import Canceller, StepResult
from .errors import (
    ConfigurationError,
    DegenerateDistributionError,
    InsufficientDataError,
    NumericFault,
)

DEFAULT_MU = 0.5
DIVERGENCE_NORM = 1e6
EIG_CLAMP = 1e-8
MOMENT_WINDOW = 1000


@dataclass
class LinearFilterState:
    """Weights and step-size bookkeeping of one linear-in-parameters filter.

    ``normalized=False`` gives textbook LMS, ``w += mu u conj(e)``.
    """

    w: np.ndarray
    mu: float = DEFAULT_MU
    B: BasisMatrix = field(default_factory=BasisMatrix.identity)
    whitener: np.ndarray | None = None
    n_groups: int = N_BRANCHES
    normalized: bool = True
    forgetting: float = 0.99
    power: np.ndarray | None = None
    power_weight: float = 0.0
    frozen: bool = False

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=complex).copy()
        if not self.mu > 0:
            raise ConfigurationError(f"mu must be positive, got {self.mu}")
        if self.w.size % self.n_groups:
            raise ConfigurationError("weight length must be a multiple of n_groups")
        if self.power is None:
            self.power = np.zeros(self.n_groups)

    @classmethod
    def zeros(cls, size, **kwargs):
        return cls(np.zeros(size, dtype=complex), **kwargs)

    def reset_power(self):
        self.power[:] = 0.0
        self.power_weight = 0.0


def lms_step(state, u, d):
    """One LMS update with ``y_hat = w^H u`` and ``e = d - y_hat``."""
    if state.frozen:
        raise NumericFault("filter is frozen after an earlier fault")
    u = np.asarray(u, dtype=complex)
    if not (np.all(np.isfinite(u)) and np.isfinite(d)):
        state.frozen = True
        raise NumericFault("non-finite regressor or desired sample")
    y = complex(np.vdot(state.w, u))
    e = complex(d) - y
    if state.normalized:
        p = u.real ** 2 + u.imag ** 2
        group = p.reshape(state.n_groups, -1).mean(axis=1)
        f = state.forgetting
        state.power = f * state.power + (1.0 - f) * group
        state.power_weight = f * state.power_weight + (1.0 - f)
        est = state.power / state.power_weight
        g = np.divide(1.0, est, out=np.zeros_like(est), where=est > 0)
        g = np.repeat(g, u.size // state.n_groups)
        denom = float(g @ p)
        if denom > 0:
            state.w += (state.mu / denom) * g * u * np.conj(e)
    else:
        state.w += state.mu * u * np.conj(e)
    if np.linalg.norm(state.w) > DIVERGENCE_NORM:
        state.frozen = True
        raise NumericFault(f"weight norm exceeded {DIVERGENCE_NORM:g}")
    return StepResult(y, e)


def wh_rls_orth_prepare(training_regressors, min_factor=10, clamp=EIG_CLAMP):
    """Whitening transform from the sample covariance of training regressors.

    ``R = mean(u u^H) = Q diag(lam) Q^H`` and ``T = diag(lam)^(-1/2) Q^H``.
    Eigenvalues below ``clamp * lam.max()`` get a zero row, removing those
    directions from adaptation instead of amplifying noise.
    """
    U = np.asarray(training_regressors, dtype=complex)
    n, dim = U.shape
    if n < min_factor * dim:
        raise InsufficientDataError(f"need at least {min_factor * dim} regressors, got {n}")
    R = U.T @ U.conj() / n
    lam, Q = np.linalg.eigh(R)
    keep = lam > clamp * lam.max()
    T = np.zeros((dim, dim), dtype=complex)
    T[keep] = (Q[:, keep] / np.sqrt(lam[keep])).conj().T
    return T


class LinearBasisCanceller(Canceller):
    """LMS on ``apply_basis(window, B)``, optionally followed by a whitener."""

    name = "linear_basis"

    def __init__(self, basis=None, taps=DEFAULT_TAPS, mu=DEFAULT_MU, whitener=None):
        self.taps = taps
        groups = 1 if whitener is not None else N_BRANCHES
        self.state = LinearFilterState.zeros(
            N_BRANCHES * taps,
            mu=mu,
            B=basis if basis is not None else BasisMatrix.identity(),
            whitener=whitener,
            n_groups=groups,
        )

    @property
    def param_count(self):
        return self.state.w.size

    def regressor(self, window):
        u = apply_basis(window, self.state.B)
        if self.state.whitener is not None:
            u = self.state.whitener @ u
        return u

    def step(self, window, d, boundary=False, upcoming=None):
        return lms_step(self.state, self.regressor(window), d)


class WHLMS(LinearBasisCanceller):
    name = "wh_lms"

    def __init__(self, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
        super().__init__(BasisMatrix.identity(), taps, mu)


class WHRLSOrth(LinearBasisCanceller):
    """Hammerstein LMS on regressors whitened by a fixed offline transform."""

    name = "wh_rls_orth"

    def __init__(self, whitener, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
        super().__init__(BasisMatrix.identity(), taps, mu, whitener=np.asarray(whitener, dtype=complex))

    @classmethod
    def from_training(cls, x_train, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
        """Fit the whitener on the regressors generated by transmit samples ``x_train``."""
        U = apply_basis(delay_line_windows(x_train, taps), BasisMatrix.identity())
        return cls(wh_rls_orth_prepare(U), taps, mu)


class WIHLMS(LinearBasisCanceller):
    """Fixed Ito-Hermite basis matched to a nominal Gaussian input power."""

    name = "wih_lms"

    def __init__(self, sigma2_nominal, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
        super().__init__(ihp_matrix(sigma2_nominal), taps, mu)
        self.sigma2_nominal = float(sigma2_nominal)


def wih_lms_make(sigma2_nominal, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
    return WIHLMS(sigma2_nominal, taps, mu)


def reexpress_weights(w, B_old, B_new):
    """Weights giving the same ``w^H apply_basis(.)`` output under ``B_new``.

    With ``u = B m`` per tap, the output depends on ``B^T w_tap`` only, so
    ``w_new_tap = B_new^-T B_old^T w_tap`` keeps the estimated SI function.
    """
    W = np.asarray(w, dtype=complex).reshape(N_BRANCHES, -1)
    V = B_old.coeff.T @ W
    return solve_triangular(B_new.coeff.T, V, lower=False).ravel()


class AOPLMS(LinearBasisCanceller):
    """LMS on an orthonormal basis re-estimated at distribution changes.

    Parameters
    ----------
    n_est: int
        Transmit samples used per moment estimate.
    lookahead: bool
        If True (default) the estimate at a boundary uses the next ``n_est``
        transmit samples, which the transmitter already holds, and the new
        basis applies from the boundary on. If False the samples are
        buffered as they are sent and the previous basis stays active until
        the buffer is full.
    """

    name = "aop_lms"

    def __init__(self, taps=DEFAULT_TAPS, mu=DEFAULT_MU, n_est=MOMENT_WINDOW, lookahead=True):
        super().__init__(BasisMatrix.identity(), taps, mu)
        self.n_est = n_est
        self.lookahead = lookahead
        self._buffer = None
        self.swaps = []
        self.warnings = []

    def _reestimate(self, samples):
        try:
            B_new = gram_schmidt(estimate_moments(samples))
        except (DegenerateDistributionError, InsufficientDataError) as err:
            msg = f"basis re-estimation failed, keeping previous basis: {err}"
            self.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            return
        st = self.state
        st.w = reexpress_weights(st.w, st.B, B_new)
        st.B = B_new
        st.reset_power()
        self.swaps.append(B_new)

    def step(self, window, d, boundary=False, upcoming=None):
        if boundary:
            if self.lookahead:
                if upcoming is None:
                    raise ConfigurationError("lookahead AOP-LMS needs the upcoming transmit samples")
                self._reestimate(np.asarray(upcoming)[: self.n_est])
            else:
                self._buffer = []
        if self._buffer is not None:
            self._buffer.append(window[0])
            if len(self._buffer) == self.n_est:
                samples, self._buffer = np.array(self._buffer), None
                self._reestimate(samples)
        return lms_step(self.state, self.regressor(window), d)


def aop_lms_step(canceller, window, d, boundary_flag, upcoming=None):
    return canceller.step(window, d, boundary_flag, upcoming)


class LinearChannelEstimator:
    """Length-``taps`` linear-branch NLMS tracking the SI channel seen from ``x``."""

    def __init__(self, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
        self.state = LinearFilterState.zeros(taps, mu=mu, n_groups=1)

    @property
    def h_est(self):
        return self.state.w

    def step(self, window, d):
        return lms_step(self.state, window, d)
