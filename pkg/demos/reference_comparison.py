#!/usr/bin/env python3
"""Run the bundled reference scenario and print a coarse residual-power plot.

Network training is scaled down (``EPOCH_SCALE``) so the script finishes in
a few minutes; pass a larger value for runs closer to full training.
"""
import sys

import numpy as np

from fdsic.harness import bundled_scenario, format_table, load_config, run_scenario, write_outputs

EPOCH_SCALE = float(sys.argv[1]) if len(sys.argv) > 1 else 0.02
OUT_DIR = "reference_out"

cfg = load_config(bundled_scenario("reference")).with_overrides(epoch_scale=EPOCH_SCALE)
result = run_scenario(cfg)
write_outputs(result.traces, result.summaries, OUT_DIR)
print(format_table(result.summaries))

# one character per 200 symbols: residual level in 5 dB steps from -50 (9) to -90 (1)
print("\nresidual power, one column per 200 symbols ('|' marks a channel change)")
for name, trace in result.traces.items():
    coarse = trace.residual_dbm[199::200]
    levels = np.clip(np.round((coarse + 95) / 5), 0, 9).astype(int)
    cells = []
    for k, level in enumerate(levels):
        if k and (k * 200) % cfg.channel_change_interval == 0:
            cells.append("|")
        cells.append(str(level))
    print(f"{name:<14}{''.join(cells)}")
print(f"\nCSV traces written to ./{OUT_DIR}")
