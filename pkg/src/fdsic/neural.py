"""
Neural-network cancellers
=========================

A single-hidden-layer ReLU perceptron written directly in numpy, trained
with mini-batch Adam, and two cancellers built on it:

* ``StaticDNNCanceller``   - input is the 21-tap transmit window (42 reals).
* ``AdaptiveDNNCanceller`` - input is the window plus a linear channel
  estimate tracked online by NLMS (84 reals); network weights stay frozen.

Parameters live in one flat buffer so that Adam runs as a handful of fused
vector operations; ``W1``, ``b1``, ``W2`` and ``b2`` are views into it.

Parameter files
---------------
:func:`save_params` writes a text record::

    # fdsic-mlp variant=<name> sizes=<in>,<hidden>,<out> seed=<int> dtype=<float32|float64>
    <W1 row-major, one value per line>
    <b1>
    <W2 row-major>
    <b2>

Values use ``%.17g``/``%.9g`` so a reload is bit-exact.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .adaptive import DEFAULT_MU, LinearChannelEstimator
from .basis import DEFAULT_TAPS, delay_line_windows
from .canceller import Canceller, StepResult
from .errors import ConfigurationError, NumericFault
from .kernel import real_view

log = logging.getLogger(__name__)

STATIC_SIZES = (42, 200, 2)
ADAPTIVE_SIZES = (84, 300, 2)
BATCH_SIZE = 64


class MlpParams:
    """Weights of an ``in -> hidden (ReLU) -> out`` perceptron in one flat buffer."""

    def __init__(self, sizes, theta=None, dtype=np.float64):
        n_in, n_hidden, n_out = (int(s) for s in sizes)
        if min(n_in, n_hidden, n_out) < 1:
            raise ConfigurationError(f"layer sizes must be positive, got {sizes}")
        self.sizes = (n_in, n_hidden, n_out)
        count = n_hidden * n_in + n_hidden + n_out * n_hidden + n_out
        if theta is None:
            theta = np.zeros(count, dtype=dtype)
        theta = np.asarray(theta)
        if theta.shape != (count,):
            raise ConfigurationError(f"flat parameter vector must have {count} entries, got {theta.shape}")
        self.theta = theta
        o1 = n_hidden * n_in
        o2 = o1 + n_hidden
        o3 = o2 + n_out * n_hidden
        self.W1 = theta[:o1].reshape(n_hidden, n_in)
        self.b1 = theta[o1:o2]
        self.W2 = theta[o2:o3].reshape(n_out, n_hidden)
        self.b2 = theta[o3:]

    @classmethod
    def init(cls, n_in, n_hidden, n_out, rng, dtype=np.float64):
        """Glorot-uniform weights, zero biases."""
        p = cls((n_in, n_hidden, n_out), dtype=dtype)
        a1 = np.sqrt(6.0 / (n_in + n_hidden))
        a2 = np.sqrt(6.0 / (n_hidden + n_out))
        p.W1[:] = rng.uniform(-a1, a1, p.W1.shape)
        p.W2[:] = rng.uniform(-a2, a2, p.W2.shape)
        return p

    @property
    def count(self):
        return self.theta.size

    @property
    def n_weights(self):
        return self.W1.size + self.W2.size

    @property
    def n_biases(self):
        return self.b1.size + self.b2.size

    def copy(self):
        return MlpParams(self.sizes, self.theta.copy())

    def astype(self, dtype):
        return MlpParams(self.sizes, self.theta.astype(dtype))

    def zeros_like(self):
        return MlpParams(self.sizes, np.zeros_like(self.theta))


def _check_input(params, x):
    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[-1] != params.sizes[0]:
        raise ConfigurationError(f"input width {x.shape[-1] if x.ndim else 0} does not match {params.sizes[0]}")
    return x


def mlp_forward(params, x):
    """Network output for one input ``(in,)`` or a batch ``(N, in)``."""
    x = _check_input(params, x)
    h = np.maximum(x @ params.W1.T + params.b1, 0.0)
    return h @ params.W2.T + params.b2


def mlp_backward(params, x, target):
    """Gradient of ``0.5 * ||y - target||^2`` (averaged over a batch).

    Returns
    -------
    grad: MlpParams
        Same layout as ``params``.
    loss: float
        Batch-mean loss at ``params``.
    """
    x = _check_input(params, x)
    target = np.asarray(target)
    single = x.ndim == 1
    if single:
        x, target = x[None], target[None]
    if target.shape != (x.shape[0], params.sizes[2]):
        raise ConfigurationError(f"target shape {target.shape} does not match output width {params.sizes[2]}")
    z = x @ params.W1.T + params.b1
    h = np.maximum(z, 0.0)
    err = h @ params.W2.T + params.b2 - target
    n = x.shape[0]
    grad = params.zeros_like()
    g = err / n
    np.matmul(g.T, h, out=grad.W2)
    grad.b2[:] = g.sum(axis=0)
    gh = g @ params.W2
    gh *= z > 0
    np.matmul(gh.T, x, out=grad.W1)
    grad.b1[:] = gh.sum(axis=0)
    loss = 0.5 * float(np.sum(err * err)) / n
    return grad, loss


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, **kwargs):
        return cls(np.zeros_like(params.theta), np.zeros_like(params.theta), **kwargs)


def adam_update(state, params, grad):
    """One bias-corrected Adam step applied in place; returns ``params``."""
    g = grad.theta if isinstance(grad, MlpParams) else np.asarray(grad)
    if g.shape != params.theta.shape or state.m.shape != g.shape:
        raise ConfigurationError("gradient, moment and parameter shapes differ")
    b1, b2 = state.beta1, state.beta2
    state.t += 1
    state.m *= b1
    state.m += (1.0 - b1) * g
    state.v *= b2
    state.v += (1.0 - b2) * (g * g)
    # folded bias correction: alpha * m_hat / (sqrt(v_hat) + eps)
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    step = state.alpha * np.sqrt(c2) / c1
    params.theta -= step * state.m / (np.sqrt(state.v) + state.eps * np.sqrt(c2))
    return params


def train_mlp(params, X, Y, epochs, seed, batch_size=BATCH_SIZE, adam=None, log_every=0):
    """Mini-batch Adam over ``epochs`` shuffled passes.

    Training runs in the dtype of ``params``. Returns ``(params, losses)``
    where ``losses[k]`` is the mean batch loss during epoch ``k``.
    """
    X = np.asarray(X, dtype=params.theta.dtype)
    Y = np.asarray(Y, dtype=params.theta.dtype)
    if X.shape[0] == 0:
        raise ConfigurationError("training set is empty")
    if X.shape[0] != Y.shape[0]:
        raise ConfigurationError("inputs and targets have different lengths")
    adam = adam or AdamState.for_params(params)
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    losses = np.zeros(epochs)
    for epoch in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        n_batches = 0
        for i in range(0, n, batch_size):
            idx = perm[i:i + batch_size]
            grad, loss = mlp_backward(params, X[idx], Y[idx])
            adam_update(adam, params, grad)
            total += loss
            n_batches += 1
        losses[epoch] = total / n_batches
        if not np.isfinite(losses[epoch]):
            raise NumericFault(f"training loss became non-finite in epoch {epoch}")
        if log_every and (epoch + 1) % log_every == 0:
            log.info("epoch %d/%d loss %.4g", epoch + 1, epochs, losses[epoch])
    return params, losses


def complex_to_pair(z):
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1)


def train_static(windows_real, targets, epochs, seed=0, dtype=np.float32, sizes=STATIC_SIZES):
    """Train the static network on ``(42-real window, complex target)`` pairs.

    ``targets`` are received samples already divided by the receive scale.
    """
    X = np.asarray(windows_real, dtype=float)
    if X.shape[0] == 0:
        raise ConfigurationError("static training set is empty")
    rng = np.random.default_rng(seed)
    params = MlpParams.init(*sizes, rng, dtype=dtype)
    params, losses = train_mlp(params, X, complex_to_pair(targets), epochs, rng.integers(2 ** 63))
    return params, losses


def estimator_trace(x, d, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
    """Run the NLMS channel estimator over a stream.

    Row ``n`` of the result is the estimate available *before* sample ``n``
    is used for adaptation, i.e. what a canceller sees at time ``n``.
    """
    est = LinearChannelEstimator(taps, mu)
    W = delay_line_windows(x, taps)
    d = np.asarray(d, dtype=complex)
    H = np.zeros((d.size, taps), dtype=complex)
    for n in range(d.size):
        H[n] = est.h_est
        est.step(W[n], d[n])
    return H


def adaptive_inputs(x, d, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
    """84-real network inputs ``[window reals, channel-estimate reals]`` for a stream."""
    W = delay_line_windows(x, taps)
    return np.concatenate([real_view(W), real_view(estimator_trace(x, d, taps, mu))], axis=1)


def train_adaptive(x, d, epochs, seed=0, dtype=np.float32, sizes=ADAPTIVE_SIZES, taps=DEFAULT_TAPS, mu=DEFAULT_MU):
    """Pretrain the adaptive network on a transmit stream ``x`` and scaled receive ``d``.

    The stream should cover several channel realizations so that the network
    learns to use the channel-estimate half of its input.
    """
    X = adaptive_inputs(x, d, taps, mu)
    rng = np.random.default_rng(seed)
    params = MlpParams.init(*sizes, rng, dtype=dtype)
    params, losses = train_mlp(params, X, complex_to_pair(d), epochs, rng.integers(2 ** 63))
    return params, losses


def _as_complex(out):
    out = np.asarray(out, dtype=float)
    return out[..., 0] + 1j * out[..., 1]


class StaticDNNCanceller(Canceller):
    """Frozen static network; ``rx_scale`` maps network units back to the receive level."""

    name = "static_dnn"

    def __init__(self, params, rx_scale, taps=DEFAULT_TAPS):
        if params.sizes[0] != 2 * taps:
            raise ConfigurationError(f"static network expects {params.sizes[0]} inputs, window gives {2 * taps}")
        self.params = params
        self.rx_scale = float(rx_scale)
        self.taps = taps

    @property
    def param_count(self):
        return self.params.count

    def step(self, window, d, boundary=False, upcoming=None):
        y = self.rx_scale * complex(_as_complex(mlp_forward(self.params, real_view(window))))
        return StepResult(y, complex(d) - y)

    def run(self, x, d, boundaries=()):
        d = np.asarray(d, dtype=complex)
        X = real_view(delay_line_windows(x, self.taps)).astype(self.params.theta.dtype)
        y = self.rx_scale * _as_complex(mlp_forward(self.params, X))
        return y, d - y


def adaptive_dnn_step(params, rx_scale, estimator, u_window, d):
    """Estimate SI from the window and the current channel estimate, then adapt the estimate.

    Only ``estimator`` changes; ``params`` is read-only here.
    """
    if estimator is None:
        raise ConfigurationError("adaptive network needs a linear channel estimator")
    h = estimator.h_est
    if h.size != u_window.size:
        raise ConfigurationError(f"channel estimate has {h.size} taps, window has {u_window.size}")
    inp = np.concatenate([real_view(u_window), real_view(h)])
    y = rx_scale * complex(_as_complex(mlp_forward(params, inp)))
    estimator.step(u_window, complex(d) / rx_scale)
    return StepResult(y, complex(d) - y)


class AdaptiveDNNCanceller(Canceller):
    """Frozen network fed with the transmit window and an online channel estimate."""

    name = "adaptive_dnn"

    def __init__(self, params, rx_scale, taps=DEFAULT_TAPS, mu=DEFAULT_MU, estimator=None):
        if params.sizes[0] != 4 * taps:
            raise ConfigurationError(f"adaptive network expects {params.sizes[0]} inputs, got {4 * taps}")
        self.params = params
        self.rx_scale = float(rx_scale)
        self.taps = taps
        self.estimator = estimator if estimator is not None else LinearChannelEstimator(taps, mu)

    @property
    def param_count(self):
        return self.params.count

    def step(self, window, d, boundary=False, upcoming=None):
        return adaptive_dnn_step(self.params, self.rx_scale, self.estimator, np.asarray(window), d)


def save_params(path, params, variant, seed):
    """Write ``params`` as the documented text record."""
    dtype = params.theta.dtype
    fmt = "%.9g" if dtype == np.float32 else "%.17g"
    sizes = ",".join(str(s) for s in params.sizes)
    header = f"fdsic-mlp variant={variant} sizes={sizes} seed={int(seed)} dtype={dtype.name}"
    np.savetxt(path, params.theta, fmt=fmt, header=header)


def load_params(path):
    """Read a record written by :func:`save_params`; returns ``(params, variant, seed)``."""
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# fdsic-mlp "):
        raise ConfigurationError(f"{path}: not an fdsic parameter file")
    fields = dict(item.split("=", 1) for item in first[len("# fdsic-mlp "):].split())
    try:
        sizes = tuple(int(s) for s in fields["sizes"].split(","))
        dtype = np.dtype(fields.get("dtype", "float64"))
        variant, seed = fields["variant"], int(fields["seed"])
    except (KeyError, ValueError) as err:
        raise ConfigurationError(f"{path}: malformed header ({err})") from err
    theta = np.atleast_1d(np.loadtxt(path, dtype=dtype))
    return MlpParams(sizes, theta), variant, seed
