"""
Rendering viewports from a panorama
===================================

Generate a synthetic moving-disc scenario and look at it through the
virtual camera.
"""

import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from vptz.geometry import CameraIntrinsics, Direction
from vptz.groundtruth import read_vgt
from vptz.panorama import Scenario, SyntheticPathSpec, generate_synthetic_scenario, render_viewport

out = Path("demo_output")
out.mkdir(exist_ok=True)

##############################################################################
# A synthetic scenario
# --------------------
#
# A red geodesic disc of 5 degrees radius drifts along a great circle over a
# checkerboard.  Frames are equirectangular PNGs next to a small JSON
# manifest and a basic GT file.

spec = SyntheticPathSpec(omega_deg_s=30.0, heading_deg=15.0, duration_s=2.0, fps=8.0, pano_width=1024, name="drift")
root = Path(tempfile.mkdtemp())
manifest, records = generate_synthetic_scenario(spec, root)
scen = Scenario(root)
print(manifest)

##############################################################################
# Looking at the target
# ---------------------
#
# Aim the camera at the GT direction of a few frames and render 320x240
# views.  The disc stays in the middle of each view.

intr = CameraIntrinsics.from_degrees(60, 320, 240)
gt = read_vgt(root / "gt.vgt")
views = [render_viewport(scen.frame(i), gt.get(i).direction, intr) for i in (0, 5, 10, 15)]
Image.fromarray(np.concatenate(views, axis=1)).save(out / "tracking_views.png")

##############################################################################
# A fixed camera
# --------------
#
# With the camera held at the start direction the disc walks out of view.

fixed = Direction.from_degrees(90.0, 0.0)
strip = [render_viewport(scen.frame(i), fixed, intr) for i in (0, 5, 10, 15)]
Image.fromarray(np.concatenate(strip, axis=1)).save(out / "fixed_views.png")

##############################################################################
# The panorama itself, for reference.

Image.fromarray(scen.frame(0).pixels).save(out / "panorama_0.png")
print("wrote", sorted(p.name for p in out.glob("*.png")))
