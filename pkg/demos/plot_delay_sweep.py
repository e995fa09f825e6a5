"""
How communication delay hurts tracking
======================================

Run the Camshift baseline and the GT oracle over a grid of communication
delays and print the resulting tables.
"""

import tempfile
from pathlib import Path

from vptz.evaluator import format_table
from vptz.harness import RunConfig, emit_reports, run_sweep
from vptz.panorama import SyntheticPathSpec, generate_synthetic_scenario

##############################################################################
# Two scenarios
# -------------
#
# An easy one on a checkerboard and a faster one over noise.  Tags group the
# rows of the tables, one row per difficulty.

work = Path(tempfile.mkdtemp())
specs = [
    SyntheticPathSpec(omega_deg_s=20.0, duration_s=6.0, name="easy", tags=("CB",)),
    SyntheticPathSpec(omega_deg_s=45.0, heading_deg=25.0, background="noise", seed=2, duration_s=6.0,
                      name="fast", tags=("FM",)),
]
for s in specs:
    generate_synthetic_scenario(s, work / s.name)

##############################################################################
# The sweep
# ---------
#
# Each scenario runs once per delay.  While the camera is blind the target
# keeps moving, so the next observation finds it further from the centre.

configs = [RunConfig(work / s.name, tracker="camshift", width=320, height=240) for s in specs]
results, failures = run_sweep(configs, jobs=2)
print("failures:", failures)
pooled = emit_reports(results, Path("demo_output") / "sweep")
for metric in ("tce", "or", "tf"):
    print(format_table(pooled, metric))

##############################################################################
# The oracle for comparison
# -------------------------
#
# The oracle knows the future GT and steers ahead of the target, so its
# errors stay near zero whatever the delay.

oracle = [RunConfig(work / s.name, tracker="oracle", width=320, height=240) for s in specs]
results, _ = run_sweep(oracle, jobs=2)
print(format_table(emit_reports(results, Path("demo_output") / "oracle"), "tce"))
