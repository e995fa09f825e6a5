"""
Adjusting ground truth to the camera
====================================

Basic GT stores where an annotation camera pointed and how big the box was
there.  The evaluator needs that box in whatever view the tracker has now.
"""

import math

from vptz.geometry import CameraIntrinsics, Direction, ImagePoint, unproject_image_point
from vptz.groundtruth import AnnotationCameraParams, BasicGtRecord, adjust_bbox, project_corners

ann = AnnotationCameraParams(90.0, 640, 480)
rec = BasicGtRecord(frame_index=0, pan=20.0, tilt=85.0, bbox_w=60.0, bbox_h=90.0)

##############################################################################
# Same camera as the annotator
# ----------------------------
#
# Aiming the tracker exactly like the annotation camera gives back the
# annotated box, centred.

print(adjust_bbox(rec, ann, rec.direction, ann.intrinsics()))

##############################################################################
# Zooming in
# ----------
#
# A narrower field of view magnifies the box by the ratio of the
# half-angle tangents.

tele = CameraIntrinsics.from_degrees(45, 640, 480)
adj = adjust_bbox(rec, ann, rec.direction, tele)
print(f"zoomed box {adj.bbox.w:.1f} x {adj.bbox.h:.1f}, expected scale {math.tan(math.radians(45)) / math.tan(math.radians(22.5)):.3f}")

##############################################################################
# Off-axis views
# --------------
#
# Seen off-axis, the four corners no longer form a rectangle.  Rectification
# averages each pair of corners sharing a side.

trk = CameraIntrinsics.from_degrees(90, 640, 480)
pose = unproject_image_point(ImagePoint(130, 380), rec.direction, trk)
for name, p in project_corners(rec, ann, pose, trk).items():
    print(f"{name:>12}: ({p.u:7.2f}, {p.v:7.2f})")
print("rectified:", adjust_bbox(rec, ann, pose, trk).bbox)

##############################################################################
# Out of view
# -----------
#
# Behind the camera there is nothing to score; the sample becomes invalid.

print(adjust_bbox(rec, ann, Direction(rec.direction.theta, rec.direction.phi + math.pi), trk))
