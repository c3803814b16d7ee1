"""Common step interface shared by every canceller."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import DEFAULT_TAPS, delay_line_windows
from .errors import NumericFault


@dataclass(frozen=True)
class StepResult:
    """SI estimate and residual of one step; ``y_hat + e == d`` exactly."""

    y_hat: complex
    e: complex


class Canceller:
    """Base class: consume ``(transmit window, received sample)``, emit a StepResult.

    Subclasses implement :meth:`step`. :meth:`run` drives a whole stream and
    may be overridden when a batch formulation is cheaper.
    """

    name = "canceller"
    taps = DEFAULT_TAPS

    @property
    def param_count(self):
        return 0

    def step(self, window, d, boundary=False, upcoming=None):
        raise NotImplementedError

    def run(self, x, d, boundaries=()):
        """Process a full stream.

        Parameters
        ----------
        x: array of complex
            Transmit samples at unit drive.
        d: array of complex
            Received samples, same length as ``x``.
        boundaries: iterable of int
            Sample indices where the transmit distribution changes.

        Returns
        -------
        y_hat, e: arrays of complex

        Raises
        ------
        NumericFault
            With ``.y_hat`` and ``.residual`` holding the samples produced
            before the fault.
        """
        x = np.asarray(x, dtype=complex)
        d = np.asarray(d, dtype=complex)
        windows = delay_line_windows(x, self.taps)
        marks = set(int(b) for b in boundaries)
        y_hat = np.zeros(d.size, dtype=complex)
        e = np.zeros(d.size, dtype=complex)
        for n in range(d.size):
            boundary = n in marks
            try:
                r = self.step(windows[n], d[n], boundary, x[n:] if boundary else None)
            except NumericFault as fault:
                fault.y_hat = y_hat[:n]
                fault.residual = e[:n]
                raise
            y_hat[n] = r.y_hat
            e[n] = r.e
        return y_hat, e


class PassThrough(Canceller):
    """No cancellation: ``y_hat = 0``."""

    name = "none"

    def step(self, window, d, boundary=False, upcoming=None):
        return StepResult(0j, complex(d))


class OracleCanceller(Canceller):
    """Test-only canceller that subtracts the true noise-free SI."""

    name = "oracle"

    def __init__(self, si):
        self.si = np.asarray(si, dtype=complex)
        self.n = 0

    def step(self, window, d, boundary=False, upcoming=None):
        y = complex(self.si[self.n])
        self.n += 1
        return StepResult(y, complex(d) - y)
