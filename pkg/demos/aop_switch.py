#!/usr/bin/env python3
"""Follow the moment-based canceller through a waveform switch.

The stream switches from OFDM to single-carrier 1024-QAM at sample 4000 and
the SI channel is redrawn at the same moment, so both cancellers have to
adapt again on the new waveform. The fixed Ito-Hermite canceller keeps its
Gaussian basis, whose branches are now correlated, and re-converges slowly.
The moment-based canceller re-estimates its basis from the next 1000
transmit samples and carries its weights over through the change of
coordinates.

With a fixed channel both would stay converged: a basis only matters while
the weights are still moving.
"""
import numpy as np

from fdsic.adaptive import AOPLMS, WIHLMS
from fdsic.harness import moving_power_dbm
from fdsic.si_channel import ChannelSchedule, default_pa, make_received
from fdsic.signal_gen import ModulationSpec, generate_tx

segments = [(ModulationSpec("ofdm", 1024), 4000), (ModulationSpec("single_carrier", 1024), 4000)]
tx = generate_tx(segments, 20.0, seed=7)
frame = make_received(tx.samples, default_pa(), ChannelSchedule.draw(2, 19, 4000, seed=8), -50.0, -90.0, seed=9)
x = tx.samples / np.sqrt(0.1)   # unit drive

for canceller in (WIHLMS(1.0), AOPLMS()):
    _, e = canceller.run(x, frame.rx, boundaries=[0, 4000])
    tr = moving_power_dbm(e, 200)
    marks = ", ".join(f"{n}: {tr[n]:.1f}" for n in (1000, 3999, 4500, 5000, 6000, 7999))
    print(f"{canceller.name:<8} residual dBm at sample {marks}")

aop = canceller
print("\nbasis rows after the switch:")
print(np.array2string(aop.swaps[-1].coeff, precision=3, suppress_small=True))
