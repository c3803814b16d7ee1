"""
Nonlinear regressor bases
=========================

Odd-order Hammerstein monomials ``[x, x|x|^2, x|x|^4]`` and the triangular
matrices that turn them into orthonormal branches: closed-form Ito-Hermite
polynomials for circular Gaussian input, or a data-driven basis obtained by
Gram-Schmidt on estimated even moments.

A basis matrix ``B`` maps the monomial vector ``m(x)`` to ``b(x) = B @ m(x)``.
Under the moment-implied inner product
``<x|x|^(2a), x|x|^(2b)> = E|x|^(2(a+b+1))`` the monomial Gram matrix is
``G[a, b] = mu[a + b]`` (with ``mu = [E|x|^2, E|x|^4, ...]``) and an
orthonormal basis satisfies ``B G B^T = I``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from math import factorial

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateDistributionError,
    DegenerateInputError,
    InsufficientDataError,
)

N_BRANCHES = 3
DEFAULT_TAPS = 21
MIN_MOMENT_SAMPLES = 100
PIVOT_TOL = 1e-12
COND_LIMIT = 1e10


class BasisKind(str, Enum):
    HP_IDENTITY = "hp_identity"
    IHP_CLOSED_FORM = "ihp_closed_form"
    AOP_ESTIMATED = "aop_estimated"


@dataclass(frozen=True)
class MomentSet:
    """Even absolute moments ``mu[m-1] = E|x|^(2m)`` for ``m = 1..5``."""

    mu: np.ndarray
    sample_count: int = 0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (5,):
            raise ConfigurationError(f"expected 5 even moments (orders 2..10), got shape {mu.shape}")
        if mu[0] <= 0:
            raise DegenerateInputError("second moment must be positive")
        # relative slack for rounding in sample estimates of equality cases
        slack = 1e-9
        if mu[1] < mu[0] ** 2 * (1 - slack) or mu[2] * mu[0] < mu[1] ** 2 * (1 - slack):
            raise ConfigurationError("moments violate moment-matrix positivity")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def monomial_gram(self):
        return monomial_gram(self.mu)


@dataclass(frozen=True)
class BasisMatrix:
    """Lower-triangular real ``3 x 3`` map from monomial to orthonormal branches."""

    coeff: np.ndarray
    kind: BasisKind = BasisKind.HP_IDENTITY

    def __post_init__(self):
        c = np.array(self.coeff, dtype=float)
        if c.shape != (N_BRANCHES, N_BRANCHES):
            raise ConfigurationError(f"basis matrix must be {N_BRANCHES}x{N_BRANCHES}")
        if np.any(np.triu(c, 1)):
            raise ConfigurationError("basis matrix must be lower-triangular")
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "kind", BasisKind(self.kind))

    @classmethod
    def identity(cls):
        return cls(np.eye(N_BRANCHES), BasisKind.HP_IDENTITY)


def hp_branches(x):
    """Hammerstein monomials ``[x, x|x|^2, x|x|^4]`` stacked on a new last axis."""
    x = np.asarray(x, dtype=complex)
    p = x.real ** 2 + x.imag ** 2
    return np.stack([x, x * p, x * p * p], axis=-1)


def gaussian_moments(sigma2):
    """Even moments of CN(0, sigma2): ``E|x|^(2m) = m! sigma2^m``."""
    return np.array([factorial(m) * sigma2 ** m for m in range(1, 6)], dtype=float)


def monomial_gram(mu):
    mu = np.asarray(mu, dtype=float)
    idx = np.add.outer(np.arange(N_BRANCHES), np.arange(N_BRANCHES))
    return mu[idx]


def ihp_matrix(sigma2):
    """Closed-form Ito-Hermite basis for CN(0, sigma2) input.

    Rows are ``x``, ``x(|x|^2 - 2 s)`` and ``x(|x|^4 - 6 s |x|^2 + 6 s^2)``
    (``s = sigma2``), each scaled to unit second moment; the squared norms are
    ``s``, ``2 s^3`` and ``12 s^5``.
    """
    if not sigma2 > 0:
        raise ConfigurationError(f"sigma2 must be positive, got {sigma2}")
    s = float(sigma2)
    raw = np.array([
        [1.0, 0.0, 0.0],
        [-2.0 * s, 1.0, 0.0],
        [6.0 * s * s, -6.0 * s, 1.0],
    ])
    norms = np.sqrt([s, 2.0 * s ** 3, 12.0 * s ** 5])
    return BasisMatrix(raw / norms[:, None], BasisKind.IHP_CLOSED_FORM)


def estimate_moments(samples, max_even_order=10, min_samples=MIN_MOMENT_SAMPLES):
    """Sample-mean estimates of ``E|x|^2, E|x|^4, ..., E|x|^max_even_order``."""
    if max_even_order != 10:
        raise ConfigurationError("only moments up to order 10 are supported")
    x = np.asarray(samples, dtype=complex).ravel()
    if x.size < min_samples:
        raise InsufficientDataError(f"need at least {min_samples} samples, got {x.size}")
    p = x.real ** 2 + x.imag ** 2
    if not np.any(p):
        raise DegenerateInputError("all-zero input has no usable moments")
    mu = np.empty(5)
    acc = np.ones_like(p)
    for m in range(5):
        acc = acc * p
        mu[m] = acc.mean()
    return MomentSet(mu, x.size)


def gram_schmidt(moments, on_degenerate="raise"):
    """Orthonormalize the monomial branches under the moment inner product.

    Modified Gram-Schmidt on coefficient vectors with ``<p, q> = p G q^T``.
    A branch whose residual norm falls below ``PIVOT_TOL`` of its own norm,
    or a correlation matrix with condition number above ``COND_LIMIT``, is
    degenerate. With ``on_degenerate="raise"`` that is an error; with
    ``"drop"`` the branch gets a zero row (reduced order) and a warning.
    """
    if on_degenerate not in ("raise", "drop"):
        raise ConfigurationError("on_degenerate must be 'raise' or 'drop'")
    mu = moments.mu if isinstance(moments, MomentSet) else MomentSet(moments).mu
    G = monomial_gram(mu)

    d = 1.0 / np.sqrt(np.diag(G))
    corr = G * np.outer(d, d)
    with np.errstate(divide="ignore"):
        cond = np.linalg.cond(corr)

    rows = []
    rel_pivots = []
    for k in range(N_BRANCHES):
        v = np.zeros(N_BRANCHES)
        v[k] = 1.0
        for q in rows:
            if q is not None:
                v = v - (v @ G @ q) * q
        nrm2 = v @ G @ v
        rel = nrm2 / G[k, k]
        rel_pivots.append(rel)
        if rel < PIVOT_TOL:
            if on_degenerate == "raise":
                raise DegenerateDistributionError(k + 1)
            warnings.warn(f"dropping degenerate branch {k + 1}", RuntimeWarning, stacklevel=2)
            rows.append(None)
            continue
        rows.append(v / np.sqrt(nrm2))

    if not cond < COND_LIMIT and all(r is not None for r in rows):
        k = int(np.argmin(rel_pivots))
        if on_degenerate == "raise":
            raise DegenerateDistributionError(k + 1, f"moment matrix condition number {cond:.3g} too large")
        warnings.warn(f"dropping ill-conditioned branch {k + 1}", RuntimeWarning, stacklevel=2)
        rows[k] = None

    B = np.array([np.zeros(N_BRANCHES) if r is None else r for r in rows])
    # rounding can leave ~1e-17 above the diagonal
    return BasisMatrix(np.tril(B), BasisKind.AOP_ESTIMATED)


class RegressorWindow:
    """Newest-first delay line of the last ``length`` transmit samples."""

    def __init__(self, length=DEFAULT_TAPS):
        self.length = length
        self.taps = np.zeros(length, dtype=complex)

    def push(self, sample):
        self.taps[1:] = self.taps[:-1]
        self.taps[0] = sample
        return self.taps

    def reset(self):
        self.taps[:] = 0


def delay_line_windows(x, length=DEFAULT_TAPS):
    """All regressor windows of a stream as an ``(N, length)`` array, newest first.

    Row ``n`` is ``[x[n], x[n-1], ..., x[n-length+1]]`` with zeros before ``x[0]``.
    """
    x = np.asarray(x, dtype=complex)
    padded = np.concatenate([np.zeros(length - 1, dtype=complex), x])
    view = np.lib.stride_tricks.sliding_window_view(padded, length)
    return np.ascontiguousarray(view[:, ::-1])


def apply_basis(window, B):
    """Stack the basis branches of every tap branch-major into a ``3L`` vector.

    Accepts a single window ``(L,)`` or a batch ``(N, L)``.
    """
    coeff = B.coeff if isinstance(B, BasisMatrix) else np.asarray(B)
    m = hp_branches(window)                  # (..., L, 3)
    b = m @ coeff.T                          # (..., L, 3)
    b = np.swapaxes(b, -1, -2)               # (..., 3, L)
    return b.reshape(b.shape[:-2] + (-1,))
