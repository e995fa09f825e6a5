"""Equirectangular panoramas: loading, viewport rendering and synthetic scenarios.

Pano pixel convention: column ``x = (phi mod 2pi) / 2pi * W`` wraps
horizontally, row ``y = theta / pi * H`` counts down from the +Z pole.
Pixel ``(i, j)`` covers ``[i, i+1) x [j, j+1)`` so its centre sits at a
half-integer offset.
"""

from __future__ import annotations

import json
import logging
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import (
    TWO_PI,
    CameraIntrinsics,
    Direction,
    directions_from_points,
    image_to_camera,
    view_matrix,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "scenario.json"
SEQUENCE_META_NAME = "sequence.json"
GT_NAME = "gt.vgt"


@dataclass(frozen=True)
class PanoramaFrame:
    index: int
    pixels: np.ndarray  # (H, W, C), rows top-down

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("frame index must be non-negative")
        h, w = self.pixels.shape[:2]
        if w != 2 * h:
            raise ValueError(f"equirectangular frames need width == 2*height, got {w}x{h}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ScenarioManifest:
    frame_count: int
    fps: float
    pano_width: int
    pano_height: int
    frame_path_pattern: str = "frames/frame_%05d.png"

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.frame_count < 1:
            raise ValueError("a scenario needs at least one frame")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            frame_count=int(data["frame_count"]),
            fps=float(data["fps"]),
            pano_width=int(data["pano_width"]),
            pano_height=int(data["pano_height"]),
            frame_path_pattern=str(data["frame_path_pattern"]),
        )


def direction_to_pano_pixel(theta, phi, pano_w: int, pano_h: int):
    """Continuous equirectangular coordinates of a direction (scalars or arrays)."""
    x = np.mod(phi, TWO_PI) / TWO_PI * pano_w
    x = np.where(x >= pano_w, 0.0, x)  # mod can round up to exactly 2pi
    y = np.clip(np.asarray(theta, dtype=float) / math.pi * pano_h, 0.0, np.nextafter(pano_h, 0))
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def sample_bilinear(pixels: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear lookup at continuous pano coordinates.

    Wraps horizontally and clamps vertically.  Integer inputs are rounded back
    to their dtype; float inputs stay float.
    """
    h, w = pixels.shape[:2]
    fx = x - 0.5
    fy = np.clip(y - 0.5, 0.0, h - 1.0)
    x0 = np.floor(fx)
    y0 = np.floor(fy)
    ax = fx - x0
    ay = fy - y0
    bx = 1.0 - ax
    by = 1.0 - ay
    x0 = x0.astype(np.intp)
    x0 %= w
    x1 = x0 + 1
    x1[x1 == w] = 0
    row0 = y0.astype(np.intp)
    row1 = np.minimum(row0 + 1, h - 1)
    row0 *= w
    row1 *= w
    taps = ((row0 + x0, bx * by), (row0 + x1, ax * by), (row1 + x0, bx * ay), (row1 + x1, ax * ay))

    # per-channel planes and in-place accumulation: broadcasting over a
    # trailing axis of 3 is several times slower
    n_ch = 1 if pixels.ndim == 2 else pixels.shape[2]
    is_int = np.issubdtype(pixels.dtype, np.integer)
    out = np.empty(x.shape + (n_ch,), dtype=pixels.dtype if is_int else np.float64)
    acc = np.empty(x.shape)
    tmp = np.empty(x.shape)
    for c in range(n_ch):
        plane = np.ascontiguousarray(pixels if pixels.ndim == 2 else pixels[..., c]).ravel()
        acc.fill(0.0)
        for idx, weight in taps:
            np.multiply(plane.take(idx), weight, out=tmp)
            acc += tmp
        if is_int:
            info = np.iinfo(pixels.dtype)
            np.clip(np.rint(acc, out=acc), info.min, info.max, out=acc)
        out[..., c] = acc
    return out[..., 0] if pixels.ndim == 2 else out


@lru_cache(maxsize=16)
def _camera_rays(intr: CameraIntrinsics) -> np.ndarray:
    """Near-plane points for every output pixel centre, raster order."""
    rows = np.arange(intr.height, dtype=float)
    cols = np.arange(intr.width, dtype=float)
    v = intr.height - rows - 0.5  # bottom-up coordinate of each raster row centre
    u = cols + 0.5
    uu, vv = np.meshgrid(u, v)
    rays = image_to_camera(uu, vv, intr)
    rays.setflags(write=False)
    return rays


def viewport_directions(pose: Direction, intr: CameraIntrinsics):
    """World direction ``(theta, phi)`` seen through every viewport pixel centre."""
    world = _camera_rays(intr) @ view_matrix(pose)  # row-vector form of M^T @ p
    return directions_from_points(world)


def render_viewport(frame: PanoramaFrame | np.ndarray, pose: Direction, intr: CameraIntrinsics) -> np.ndarray:
    """Rectilinear (h, w, C) view of the panorama, rows top-down."""
    pixels = frame.pixels if isinstance(frame, PanoramaFrame) else frame
    theta, phi = viewport_directions(pose, intr)
    x, y = direction_to_pano_pixel(theta, phi, pixels.shape[1], pixels.shape[0])
    return sample_bilinear(pixels, x, y)


class Scenario:
    """A panorama sequence on disk described by ``scenario.json``.

    Frames are decoded lazily and a handful are kept in memory.
    """

    def __init__(self, root: str | Path, cache_size: int = 4):
        root = Path(root)
        if root.is_file():
            self.manifest_path = root
            root = root.parent
        else:
            self.manifest_path = root / MANIFEST_NAME
        self.root = root
        self.manifest = ScenarioManifest.load(self.manifest_path)
        self.meta = load_sequence_meta(root)
        self._cache: OrderedDict[int, PanoramaFrame] = OrderedDict()
        self._cache_size = cache_size

    @property
    def name(self) -> str:
        return self.meta.get("name") or self.root.name

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(self.meta.get("tags", ()))

    @property
    def fps(self) -> float:
        return self.manifest.fps

    @property
    def frame_count(self) -> int:
        return self.manifest.frame_count

    def frame_path(self, index: int) -> Path:
        return self.root / (self.manifest.frame_path_pattern % index)

    def frame(self, index: int) -> PanoramaFrame:
        if not 0 <= index < self.frame_count:
            raise IndexError(f"frame {index} outside scenario of {self.frame_count} frames")
        if index in self._cache:
            self._cache.move_to_end(index)
            return self._cache[index]
        with Image.open(self.frame_path(index)) as img:
            pixels = np.asarray(img.convert("RGB"))
        frame = PanoramaFrame(index, pixels)
        self._cache[index] = frame
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return frame


def load_sequence_meta(root: Path) -> dict:
    path = Path(root) / SEQUENCE_META_NAME
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


# --- synthetic scenarios -----------------------------------------------------


@dataclass(frozen=True)
class SyntheticPathSpec:
    """A coloured geodesic disc travelling along a great circle.

    The disc starts at ``(start_tilt_deg, start_pan_deg)`` and heads off in
    the direction ``heading_deg`` (0 = toward decreasing pan, i.e. to the
    right in the image; 90 = up toward the +Z pole), advanced by
    ``phase_deg`` along the circle at ``t = 0``.
    """

    start_tilt_deg: float = 90.0
    start_pan_deg: float = 0.0
    heading_deg: float = 0.0
    omega_deg_s: float = 20.0
    phase_deg: float = 0.0
    radius_deg: float = 5.0
    color: tuple[int, int, int] = (220, 30, 30)
    background: str = "checker"
    duration_s: float = 10.0
    fps: float = 16.0
    pano_width: int = 1024
    seed: int = 0
    ann_vfov_deg: float = 90.0
    ann_width: int = 640
    ann_height: int = 480
    name: str = "synthetic"
    tags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 < self.radius_deg < 45.0:
            raise ValueError("disc angular radius must lie in (0, 45) degrees")
        if self.omega_deg_s < 0.0:
            raise ValueError("angular velocity must be non-negative")
        if self.fps <= 0.0 or self.duration_s <= 0.0:
            raise ValueError("fps and duration must be positive")
        if self.pano_width % 2:
            raise ValueError("pano width must be even")

    @property
    def frame_count(self) -> int:
        return max(1, int(round(self.duration_s * self.fps)))

    @property
    def pano_height(self) -> int:
        return self.pano_width // 2

    def center_at(self, t: float) -> np.ndarray:
        """Unit vector of the disc centre at time ``t`` seconds."""
        start = Direction.from_degrees(self.start_tilt_deg, self.start_pan_deg)
        p0 = start.unit_vector()
        # local tangent frame at the start point: "right" is decreasing pan,
        # "up" points toward the +Z pole
        right = np.array([math.sin(start.phi), -math.cos(start.phi), 0.0])
        up = np.cross(right, p0)
        h = math.radians(self.heading_deg)
        tangent = math.cos(h) * right + math.sin(h) * up
        ang = math.radians(self.phase_deg + self.omega_deg_s * t)
        return math.cos(ang) * p0 + math.sin(ang) * tangent


@lru_cache(maxsize=4)
def _pano_unit_vectors(width: int, height: int) -> np.ndarray:
    theta = (np.arange(height) + 0.5) / height * math.pi
    phi = (np.arange(width) + 0.5) / width * TWO_PI
    st = np.sin(theta)[:, None]
    vec = np.stack(
        [st * np.cos(phi)[None, :], st * np.sin(phi)[None, :], np.broadcast_to(np.cos(theta)[:, None], (height, width))],
        axis=-1,
    )
    vec.setflags(write=False)
    return vec


def make_background(style: str, width: int, height: int, seed: int = 0) -> np.ndarray:
    """Low-saturation backdrop so colour trackers see only the target."""
    if style == "uniform":
        return np.full((height, width, 3), 110, dtype=np.uint8)
    if style == "checker":
        cell = max(1, width // 64)
        jj, ii = np.meshgrid(np.arange(width) // cell, np.arange(height) // cell)
        level = np.where((ii + jj) % 2 == 0, 90, 150).astype(np.uint8)
        return np.repeat(level[..., None], 3, axis=2)
    if style == "noise":
        rng = np.random.default_rng(seed)
        level = rng.integers(60, 180, size=(height, width), dtype=np.uint8)
        return np.repeat(level[..., None], 3, axis=2)
    if style == "gradient":
        # encodes direction: R ~ azimuth, G ~ polar angle, B constant
        x = np.linspace(0, 255, width)[None, :].repeat(height, 0)
        y = np.linspace(0, 255, height)[:, None].repeat(width, 1)
        return np.stack([x, y, np.full_like(x, 128)], axis=-1).round().astype(np.uint8)
    raise ValueError(f"unknown background style {style!r}")


def disc_mask(center: np.ndarray, radius_deg: float, width: int, height: int) -> np.ndarray:
    cos_r = math.cos(math.radians(radius_deg))
    return _pano_unit_vectors(width, height) @ center >= cos_r


def analytic_bbox_size(radius_deg: float, ann: CameraIntrinsics) -> tuple[float, float]:
    """Image extent of a geodesic disc seen head-on: a circle of radius f*tan(r)."""
    d = 2.0 * ann.focal_px * math.tan(math.radians(radius_deg))
    return d, d


def render_synthetic_frame(spec: SyntheticPathSpec, index: int, background: np.ndarray | None = None) -> np.ndarray:
    w, h = spec.pano_width, spec.pano_height
    if background is None:
        background = make_background(spec.background, w, h, spec.seed)
    frame = background.copy()
    mask = disc_mask(spec.center_at(index / spec.fps), spec.radius_deg, w, h)
    frame[mask] = np.asarray(spec.color, dtype=np.uint8)
    return frame


def generate_synthetic_scenario(spec: SyntheticPathSpec, out_dir: str | Path):
    """Write frames, manifest, sequence metadata and basic GT for ``spec``.

    Returns ``(manifest, records)``.
    """
    from .groundtruth import AnnotationCameraParams, BasicGtRecord, GtTable, write_vgt

    out = Path(out_dir)
    manifest = ScenarioManifest(spec.frame_count, spec.fps, spec.pano_width, spec.pano_height)
    (out / Path(manifest.frame_path_pattern).parent).mkdir(parents=True, exist_ok=True)

    ann = AnnotationCameraParams(spec.ann_vfov_deg, spec.ann_width, spec.ann_height)
    bw, bh = analytic_bbox_size(spec.radius_deg, ann.intrinsics())
    background = make_background(spec.background, spec.pano_width, spec.pano_height, spec.seed)
    records = []
    for i in range(spec.frame_count):
        pixels = render_synthetic_frame(spec, i, background)
        Image.fromarray(pixels).save(out / (manifest.frame_path_pattern % i), compress_level=1)
        x, y, z = spec.center_at(i / spec.fps)
        theta = math.acos(max(-1.0, min(1.0, z)))
        phi = math.atan2(y, x)
        # round to file precision so the returned records equal the parsed file
        records.append(
            BasicGtRecord(i, round(math.degrees(phi), 6), round(math.degrees(theta), 6), round(bw, 6), round(bh, 6))
        )

    (out / MANIFEST_NAME).write_text(manifest.to_json(), encoding="utf-8")
    meta = {"name": spec.name, "tags": list(spec.tags), "synthetic": _spec_to_dict(spec)}
    (out / SEQUENCE_META_NAME).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_vgt(out / GT_NAME, GtTable(ann, records))
    logger.info("wrote %d synthetic frames to %s", spec.frame_count, out)
    return manifest, records


def _spec_to_dict(spec: SyntheticPathSpec) -> dict:
    d = asdict(spec)
    d["color"] = list(d["color"])
    d["tags"] = list(d["tags"])
    return d
