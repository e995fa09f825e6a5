"""Basic ground truth (spherical annotations) and its adjustment to a live camera.

A basic GT record stores the pan/tilt that centres the target in a fixed
annotation camera plus the box size seen by that camera.  Adjusting it to
the tracker's camera moves the four box corners through the inverse
pipeline of the annotation camera and the forward pipeline of the tracker
camera, then rectifies the resulting quadrilateral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .geometry import (
    BehindCamera,
    CameraIntrinsics,
    Direction,
    ImagePoint,
    project_world_point,
    unproject_image_point,
)

VGT_MAGIC = "vgt"
VGT_VERSION = "1"


class GtParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box in image coordinates; ``(x, y)`` is the bottom-left corner."""

    x: float
    y: float
    w: float
    h: float

    @classmethod
    def from_edges(cls, left: float, bottom: float, right: float, top: float) -> "Rect":
        return cls(left, bottom, right - left, top - bottom)

    @classmethod
    def centered(cls, c: ImagePoint, w: float, h: float) -> "Rect":
        return cls(c[0] - 0.5 * w, c[1] - 0.5 * h, w, h)

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def top(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return max(self.w, 0.0) * max(self.h, 0.0)

    @property
    def center(self) -> ImagePoint:
        return ImagePoint(self.x + 0.5 * self.w, self.y + 0.5 * self.h)

    def clip(self, width: float, height: float) -> "Rect":
        left, bottom = max(self.x, 0.0), max(self.y, 0.0)
        right, top = min(self.right, width), min(self.top, height)
        return Rect(left, bottom, max(right - left, 0.0), max(top - bottom, 0.0))

    def intersection_area(self, other: "Rect") -> float:
        iw = min(self.right, other.right) - max(self.x, other.x)
        ih = min(self.top, other.top) - max(self.y, other.y)
        if iw <= 0.0 or ih <= 0.0:
            return 0.0
        return iw * ih


@dataclass(frozen=True)
class BasicGtRecord:
    frame_index: int
    pan: float  # degrees
    tilt: float  # degrees, polar angle from +Z
    bbox_w: float
    bbox_h: float

    def __post_init__(self):
        if not (self.bbox_w > 0 and self.bbox_h > 0):
            raise ValueError("GT box dimensions must be positive")
        if not (math.isfinite(self.pan) and math.isfinite(self.tilt)):
            raise ValueError("GT angles must be finite")

    @property
    def direction(self) -> Direction:
        return Direction.from_degrees(self.tilt, self.pan)


@dataclass(frozen=True)
class AnnotationCameraParams:
    vfov: float  # degrees
    width: int
    height: int

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.from_degrees(self.vfov, self.width, self.height)


@dataclass(frozen=True)
class AdjustedGt:
    """GT for one frame in the tracker's current view.

    ``center`` and ``bbox`` are ``None`` when the target is out of view.
    ``degenerate`` marks a centre that is visible while the box collapsed.
    """

    center: ImagePoint | None
    bbox: Rect | None
    degenerate: bool = False

    @property
    def in_view(self) -> bool:
        return self.center is not None and self.bbox is not None


OUT_OF_VIEW = AdjustedGt(None, None)


class GtTable:
    """Basic GT for one sequence: the annotation camera plus per-frame records."""

    def __init__(self, annotation: AnnotationCameraParams, records: Iterable[BasicGtRecord]):
        self.annotation = annotation
        self.records = {r.frame_index: r for r in records}

    def __len__(self):
        return len(self.records)

    def __contains__(self, frame_index: int) -> bool:
        return frame_index in self.records

    def get(self, frame_index: int) -> BasicGtRecord | None:
        return self.records.get(frame_index)

    @property
    def frames(self) -> list[int]:
        return sorted(self.records)

    def nearest_at_or_before(self, frame_index: int) -> BasicGtRecord | None:
        candidates = [i for i in self.records if i <= frame_index]
        return self.records[max(candidates)] if candidates else None


def read_vgt(path: str | Path) -> GtTable:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise GtParseError(path, 1, "missing 'vgt 1 <vfov_deg> <width> <height>' header")
    head = lines[0].split()
    if len(head) != 5 or head[0] != VGT_MAGIC or head[1] != VGT_VERSION:
        raise GtParseError(path, 1, f"bad header {lines[0]!r}")
    try:
        ann = AnnotationCameraParams(float(head[2]), int(head[3]), int(head[4]))
        ann.intrinsics()
    except ValueError as exc:
        raise GtParseError(path, 1, str(exc)) from None

    records = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 5:
            raise GtParseError(path, lineno, f"expected 5 fields, got {len(parts)}")
        try:
            rec = BasicGtRecord(int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
        except ValueError as exc:
            raise GtParseError(path, lineno, str(exc)) from None
        if rec.frame_index < 0 or rec.frame_index in seen:
            raise GtParseError(path, lineno, f"invalid or duplicate frame index {rec.frame_index}")
        seen.add(rec.frame_index)
        records.append(rec)
    return GtTable(ann, records)


def format_vgt(table: GtTable) -> str:
    ann = table.annotation
    out = [f"{VGT_MAGIC} {VGT_VERSION} {ann.vfov:.6f} {ann.width} {ann.height}"]
    for i in table.frames:
        r = table.records[i]
        out.append(f"{r.frame_index} {r.pan:.6f} {r.tilt:.6f} {r.bbox_w:.6f} {r.bbox_h:.6f}")
    return "\n".join(out) + "\n"


def write_vgt(path: str | Path, table: GtTable) -> None:
    Path(path).write_text(format_vgt(table), encoding="utf-8")


def adjust_center(rec: BasicGtRecord, tracker_pose: Direction, tracker_intr: CameraIntrinsics) -> ImagePoint | None:
    """Target centre in the tracker image, or ``None`` when out of view."""
    try:
        p = project_world_point(rec.direction.unit_vector(), tracker_pose, tracker_intr)
    except BehindCamera:
        return None
    return p if tracker_intr.contains(p) else None


def annotation_corners(rec: BasicGtRecord, ann: CameraIntrinsics) -> dict[str, ImagePoint]:
    cx, cy = ann.center
    hw, hh = 0.5 * rec.bbox_w, 0.5 * rec.bbox_h
    return {
        "tl": ImagePoint(cx - hw, cy + hh),
        "tr": ImagePoint(cx + hw, cy + hh),
        "br": ImagePoint(cx + hw, cy - hh),
        "bl": ImagePoint(cx - hw, cy - hh),
    }


def rectify(corners: dict[str, ImagePoint]) -> Rect:
    """Axis-aligned box from the per-side means of a projected quadrilateral."""
    left = 0.5 * (corners["tl"].u + corners["bl"].u)
    right = 0.5 * (corners["tr"].u + corners["br"].u)
    top = 0.5 * (corners["tl"].v + corners["tr"].v)
    bottom = 0.5 * (corners["bl"].v + corners["br"].v)
    return Rect.from_edges(left, bottom, right, top)


def project_corners(
    rec: BasicGtRecord, ann: AnnotationCameraParams, tracker_pose: Direction, tracker_intr: CameraIntrinsics
) -> dict[str, ImagePoint]:
    """Box corners carried from the annotation camera into the tracker image.

    Raises ``BehindCamera`` when a corner ends up behind the tracker camera.
    """
    ann_intr = ann.intrinsics()
    ann_pose = rec.direction
    out = {}
    for name, p in annotation_corners(rec, ann_intr).items():
        d = unproject_image_point(p, ann_pose, ann_intr)
        out[name] = project_world_point(d.unit_vector(), tracker_pose, tracker_intr)
    return out


def adjust_bbox(
    rec: BasicGtRecord, ann: AnnotationCameraParams, tracker_pose: Direction, tracker_intr: CameraIntrinsics
) -> AdjustedGt:
    center = adjust_center(rec, tracker_pose, tracker_intr)
    if center is None:
        return OUT_OF_VIEW
    try:
        box = rectify(project_corners(rec, ann, tracker_pose, tracker_intr))
    except BehindCamera:
        return AdjustedGt(None, None, degenerate=True)
    if not (box.w > 0.0 and box.h > 0.0) or not np.isfinite([box.x, box.y, box.w, box.h]).all():
        return AdjustedGt(None, None, degenerate=True)
    return AdjustedGt(center, box)


def adjust(table: GtTable, frame_index: int, tracker_pose: Direction, tracker_intr: CameraIntrinsics) -> AdjustedGt | None:
    """Adjusted GT for a frame, or ``None`` when the frame is not annotated."""
    rec = table.get(frame_index)
    if rec is None:
        return None
    return adjust_bbox(rec, table.annotation, tracker_pose, tracker_intr)
