"""
The projection pipeline
=======================

How a world direction reaches a pixel of the virtual camera, and back.
"""

import math

import numpy as np

from vptz.camera import DelayConfig, PtzState, RecenterOnPixel, execute
from vptz.geometry import (
    CameraIntrinsics,
    Direction,
    ImagePoint,
    project_world_point,
    unproject_image_point,
    view_matrix,
)

##############################################################################
# Directions on the panorama sphere
# ---------------------------------
#
# A :class:`~vptz.geometry.Direction` holds the polar angle ``theta``
# (measured from +Z, so 90 degrees is the horizon) and the azimuth ``phi``.
# The same pair aims the camera and locates a target.

pose = Direction.from_degrees(80.0, 30.0)
target = Direction.from_degrees(75.0, 22.0)
print("camera pose (tilt, pan) deg:", pose.degrees())
print("target unit vector:", np.round(target.unit_vector(), 4))

##############################################################################
# The view matrix
# ---------------
#
# The world-to-camera rotation sends the pose axis to -Z.  The camera never
# rolls, so +Y in the image stays in the vertical plane through the axis.

m = view_matrix(pose)
print(np.round(m @ pose.unit_vector(), 12))

##############################################################################
# Forward and inverse projection
# ------------------------------
#
# Image coordinates grow right and UP from the bottom-left corner.  Pan
# grows to the left, so the target, at a smaller pan and a higher elevation
# than the axis, shows up right of and above the centre.

intr = CameraIntrinsics.from_degrees(90, 640, 480)
p = project_world_point(target.unit_vector(), pose, intr)
print("target pixel:", p)

back = unproject_image_point(p, pose, intr)
print("unprojected (tilt, pan):", np.round(back.degrees(), 9))

##############################################################################
# Recentering
# -----------
#
# ``RecenterOnPixel`` turns the camera so that whatever was under a pixel
# lands on the image centre.  The cost is the time the motors need.

state = PtzState(pose, intr, fps=16.0, frame_count=1000)
moved = execute(RecenterOnPixel(p.u, p.v), state, DelayConfig())
print("new pixel of target:", project_world_point(target.unit_vector(), moved.pose, intr))
print(f"motion took {moved.clock_s * 1000:.1f} ms -> frame {moved.current_frame}")

##############################################################################
# Zoom
# ----
#
# Halving the field of view roughly doubles how far the target sits from
# the centre, in pixels.

tele = intr.with_vfov(math.radians(45))
q = project_world_point(target.unit_vector(), pose, tele)
c = intr.center
print(f"offset at 90 deg: {math.hypot(p.u - c.u, p.v - c.v):.1f} px, at 45 deg: {math.hypot(q.u - c.u, q.v - c.v):.1f} px")
