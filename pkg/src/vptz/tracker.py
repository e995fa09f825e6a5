"""Tracker interface plus the baseline trackers.

``camshift`` is a small hue-histogram Camshift that always recentres the
camera on the target position it just measured.  ``oracle`` reads the
ground truth and is used to validate the harness; ``static`` never moves.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from PIL import Image

from .camera import (
    DelayConfig,
    GoToAngles,
    Hold,
    RecenterOnPixel,
    CameraCommand,
    motion_delay,
)
from .geometry import BehindCamera, CameraIntrinsics, Direction, ImagePoint, project_world_point, unproject_image_point
from .groundtruth import GtTable, Rect, adjust_bbox

logger = logging.getLogger(__name__)


class EmptyModel(ValueError):
    """No pixel of the initialisation box passed the colour gates."""


@dataclass(frozen=True)
class TrackerObservation:
    image: np.ndarray  # (h, w, 3) uint8, rows top-down
    pose: Direction
    intr: CameraIntrinsics
    clock_s: float

    def __post_init__(self):
        if self.image.shape[:2] != (self.intr.height, self.intr.width):
            raise ValueError("observation image does not match the intrinsics")


@dataclass(frozen=True)
class TrackerDecision:
    predicted_box: Rect
    predicted_center: ImagePoint
    camera_command: CameraCommand
    lost: bool = False


class Tracker(Protocol):
    def init(self, obs: TrackerObservation, init_box: Rect) -> None: ...

    def step(self, obs: TrackerObservation) -> TrackerDecision: ...


@dataclass
class TrackerContext:
    """What the harness knows about a run; only the oracle reads the GT."""

    gt: GtTable | None = None
    fps: float = 16.0
    delays: DelayConfig = DelayConfig()
    max_speed: float = 300.0


# --- colour model --------------------------------------------------------------


def to_hsv(image: np.ndarray) -> np.ndarray:
    """8-bit HSV planes (hue spans 0..255)."""
    return np.asarray(Image.fromarray(np.ascontiguousarray(image), "RGB").convert("HSV"))


@dataclass
class ColorModel:
    hist: np.ndarray
    s_min: int = 60
    v_min: int = 32
    v_max: int = 255

    @property
    def bins(self) -> int:
        return len(self.hist)

    def gate(self, hsv: np.ndarray) -> np.ndarray:
        s, v = hsv[..., 1], hsv[..., 2]
        return (s >= self.s_min) & (v >= self.v_min) & (v <= self.v_max)

    @classmethod
    def build(cls, hsv_patch: np.ndarray, bins: int = 16, **gates) -> "ColorModel":
        model = cls(np.zeros(bins), **gates)
        mask = model.gate(hsv_patch)
        if not mask.any():
            raise EmptyModel("no pixel in the initial box passes the saturation/value gates")
        idx = hsv_patch[..., 0][mask].astype(np.int64) * bins // 256
        hist = np.bincount(idx, minlength=bins).astype(float)
        model.hist = hist / hist.max()
        return model

    def back_project(self, hsv: np.ndarray) -> np.ndarray:
        idx = hsv[..., 0].astype(np.int64) * self.bins // 256
        return np.where(self.gate(hsv), self.hist[idx], 0.0)


# --- mean shift --------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Search window in raster coordinates (x right, y down), float centre."""

    cx: float
    cy: float
    w: float
    h: float

    def index_range(self, shape) -> tuple[slice, slice]:
        # pixels whose centres fall inside the window
        rows, cols = shape[:2]
        c0 = min(max(math.ceil(self.cx - 0.5 * self.w - 0.5), 0), cols)
        c1 = min(max(math.ceil(self.cx + 0.5 * self.w - 0.5), 0), cols)
        r0 = min(max(math.ceil(self.cy - 0.5 * self.h - 0.5), 0), rows)
        r1 = min(max(math.ceil(self.cy + 0.5 * self.h - 0.5), 0), rows)
        return slice(r0, r1), slice(c0, c1)

    def moved(self, cx: float, cy: float) -> "Window":
        return Window(cx, cy, self.w, self.h)


@dataclass(frozen=True)
class Moments:
    m00: float
    cx: float
    cy: float
    var_x: float
    var_y: float
    area: int


def window_moments(weights: np.ndarray, win: Window) -> Moments:
    rs, cs = win.index_range(weights.shape)
    patch = weights[rs, cs]
    area = patch.size
    m00 = float(patch.sum())
    if m00 <= 0.0:
        return Moments(0.0, win.cx, win.cy, 0.0, 0.0, area)
    ys = np.arange(rs.start, rs.stop) + 0.5
    xs = np.arange(cs.start, cs.stop) + 0.5
    col_mass = patch.sum(axis=0)
    row_mass = patch.sum(axis=1)
    cx = float(col_mass @ xs) / m00
    cy = float(row_mass @ ys) / m00
    var_x = max(float(col_mass @ (xs - cx) ** 2) / m00, 0.0)
    var_y = max(float(row_mass @ (ys - cy) ** 2) / m00, 0.0)
    return Moments(m00, cx, cy, var_x, var_y, area)


def mean_shift(weights: np.ndarray, win: Window, max_iter: int = 20, eps: float = 1.0):
    """Move ``win`` to the local centroid of ``weights``.

    Returns the final window and the list of window centres visited.
    """
    path = [(win.cx, win.cy)]
    for _ in range(max_iter):
        m = window_moments(weights, win)
        if m.m00 <= 0.0:
            break
        shift = math.hypot(m.cx - win.cx, m.cy - win.cy)
        win = win.moved(m.cx, m.cy)
        path.append((win.cx, win.cy))
        if shift < eps:
            break
    return win, path


class CamshiftTracker:
    """Hue back-projection + mean shift + zeroth-moment window adaptation."""

    name = "camshift"

    def __init__(self, bins: int = 16, s_min: int = 60, v_min: int = 32, lost_threshold: float = 0.05,
                 max_iter: int = 20, eps: float = 1.0, min_window: float = 8.0):
        self.bins = bins
        self.gates = {"s_min": s_min, "v_min": v_min}
        self.lost_threshold = lost_threshold
        self.max_iter = max_iter
        self.eps = eps
        self.min_window = min_window
        self.model: ColorModel | None = None
        self._window: Window | None = None
        self._target: Direction | None = None
        self._last: tuple[Rect, ImagePoint] | None = None

    def init(self, obs: TrackerObservation, init_box: Rect) -> None:
        h = obs.intr.height
        win = Window(init_box.center.u, h - init_box.center.v, init_box.w, init_box.h)
        rs, cs = win.index_range(obs.image.shape)
        self.model = ColorModel.build(to_hsv(obs.image)[rs, cs], self.bins, **self.gates)
        self._window = win
        self._target = unproject_image_point(init_box.center, obs.pose, obs.intr)
        self._last = (init_box, init_box.center)

    def _seed_window(self, obs: TrackerObservation) -> Window:
        # the previous target position, seen through the camera's new pose
        try:
            p = project_world_point(self._target.unit_vector(), obs.pose, obs.intr)
        except BehindCamera:
            p = obs.intr.center
        return self._window.moved(p.u, obs.intr.height - p.v)

    def step(self, obs: TrackerObservation) -> TrackerDecision:
        if self.model is None:
            raise RuntimeError("tracker used before init()")
        width, height = obs.intr.width, obs.intr.height
        weights = self.model.back_project(to_hsv(obs.image))
        win, _ = mean_shift(weights, self._seed_window(obs), self.max_iter, self.eps)
        m = window_moments(weights, win)

        if m.area == 0 or m.m00 / m.area < self.lost_threshold:
            box, center = self._last
            self._window = win
            return TrackerDecision(box, center, Hold(), lost=True)

        # Camshift size rule, aspect taken from the second moments
        side = 2.0 * math.sqrt(m.m00)
        sx, sy = math.sqrt(m.var_x) + 1e-9, math.sqrt(m.var_y) + 1e-9
        ratio = math.sqrt(sx / sy)
        ww = min(max(side * ratio, self.min_window), width)
        wh = min(max(side / ratio, self.min_window), height)
        self._window = Window(m.cx, m.cy, ww, wh)

        center = ImagePoint(m.cx, height - m.cy)
        box = Rect.centered(center, max(4.0 * sx, 1.0), max(4.0 * sy, 1.0))
        self._target = unproject_image_point(center, obs.pose, obs.intr)
        self._last = (box, center)
        return TrackerDecision(box, center, RecenterOnPixel(center.u, center.v))


class OracleTracker:
    """Reports the adjusted GT and steers the camera with GT knowledge.

    With ``lookahead`` the camera is pointed at the GT direction of the frame
    it will observe next, found by iterating the delay model; otherwise it
    recentres on the current GT centre.
    """

    name = "oracle"

    def __init__(self, context: TrackerContext, lookahead: bool = True):
        if context.gt is None:
            raise ValueError("the oracle tracker needs ground truth")
        self.ctx = context
        self.lookahead = lookahead
        self._last: tuple[Rect, ImagePoint] | None = None

    def init(self, obs: TrackerObservation, init_box: Rect) -> None:
        self._last = (init_box, init_box.center)

    def _frame(self, clock_s: float) -> int:
        return int(math.floor(clock_s * self.ctx.fps + 1e-9))

    def _gt_direction(self, frame: int) -> Direction | None:
        rec = self.ctx.gt.nearest_at_or_before(frame)
        return None if rec is None else rec.direction

    def _next_direction(self, obs: TrackerObservation, frame: int) -> Direction | None:
        ctx = self.ctx
        fixed = ctx.delays.processing(0.0) + ctx.delays.tau_c
        nxt = frame + 1
        for _ in range(8):
            d = self._gt_direction(nxt)
            if d is None:
                return None
            clock = obs.clock_s + motion_delay(obs.pose, d, ctx.max_speed) + fixed
            guess = max(self._frame(clock), frame + 1)
            if guess == nxt:
                break
            nxt = guess
        return self._gt_direction(nxt)

    def step(self, obs: TrackerObservation) -> TrackerDecision:
        frame = self._frame(obs.clock_s)
        rec = self.ctx.gt.get(frame)
        adj = adjust_bbox(rec, self.ctx.gt.annotation, obs.pose, obs.intr) if rec else None
        lost = adj is None or not adj.in_view
        if not lost:
            box = adj.bbox.clip(obs.intr.width, obs.intr.height)
            self._last = (box, adj.center)
        box, center = self._last

        if self.lookahead:
            d = self._next_direction(obs, frame)
            cmd = Hold() if d is None else GoToAngles(d.phi, d.theta)
        elif not lost:
            cmd = RecenterOnPixel(center.u, center.v)
        else:
            d = self._gt_direction(frame)
            cmd = Hold() if d is None else GoToAngles(d.phi, d.theta)
        return TrackerDecision(box, center, cmd, lost)


class StaticTracker:
    """Keeps the camera still and reports the initial box forever."""

    name = "static"

    def init(self, obs: TrackerObservation, init_box: Rect) -> None:
        self._box = init_box

    def step(self, obs: TrackerObservation) -> TrackerDecision:
        return TrackerDecision(self._box, self._box.center, Hold())


TRACKERS: dict[str, Callable[[TrackerContext], Tracker]] = {
    "camshift": lambda ctx: CamshiftTracker(),
    "oracle": lambda ctx: OracleTracker(ctx),
    "oracle-recenter": lambda ctx: OracleTracker(ctx, lookahead=False),
    "static": lambda ctx: StaticTracker(),
}


def make_tracker(name: str, context: TrackerContext | None = None) -> Tracker:
    try:
        factory = TRACKERS[name]
    except KeyError:
        raise ValueError(f"unknown tracker {name!r}; choose from {', '.join(sorted(TRACKERS))}") from None
    return factory(context or TrackerContext())
