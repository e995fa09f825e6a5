"""Virtual PTZ camera: commands, motor delay and frame skipping.

Scenario time is a continuous clock.  Every command advances it by the
motor, processing and communication delays; the observed frame is
``floor(clock * fps)``.  Frames that fall inside the blind interval are
simply never shown to the tracker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .geometry import CameraIntrinsics, Direction, ImagePoint, unproject_image_point, wrap_angle

DEFAULT_SPEED_DEG_S = 300.0
DEFAULT_ZOOM_LIMITS_DEG = (10.0, 120.0)
# guards floor() against k/fps landing a hair below k
_FRAME_EPS = 1e-9


class EndOfScenario(Exception):
    pass


@dataclass(frozen=True)
class GoToAngles:
    pan: float  # radians (azimuth)
    tilt: float  # radians (polar angle)


@dataclass(frozen=True)
class RecenterOnPixel:
    u: float
    v: float


@dataclass(frozen=True)
class SetZoom:
    vfov: float  # radians


@dataclass(frozen=True)
class Hold:
    pass


CameraCommand = Union[GoToAngles, RecenterOnPixel, SetZoom, Hold]


@dataclass(frozen=True)
class DelayConfig:
    """Communication delay plus processing-delay policy, in seconds.

    ``tau_p`` is used when ``measured`` is False; otherwise the harness
    passes the wall-clock time of the tracker call.
    """

    tau_c: float = 0.0
    tau_p: float = 0.0
    measured: bool = False

    def __post_init__(self):
        if self.tau_c < 0.0 or self.tau_p < 0.0:
            raise ValueError("delays must be non-negative")

    @classmethod
    def parse_tau_p(cls, text: str, tau_c: float = 0.0) -> "DelayConfig":
        """Build from a CLI ``--tau-p`` value: ``fixed:<seconds>`` or ``measured``."""
        if text == "measured":
            return cls(tau_c, 0.0, True)
        if text.startswith("fixed:"):
            return cls(tau_c, float(text.split(":", 1)[1]), False)
        raise ValueError(f"--tau-p expects 'fixed:<seconds>' or 'measured', got {text!r}")

    def processing(self, tau_p_measured: float | None = None) -> float:
        if self.measured:
            return max(0.0, tau_p_measured or 0.0)
        return self.tau_p


@dataclass(frozen=True)
class PtzState:
    pose: Direction
    intr: CameraIntrinsics
    fps: float
    frame_count: int
    clock_s: float = 0.0
    max_speed: float = DEFAULT_SPEED_DEG_S
    zoom_limits: tuple[float, float] = tuple(math.radians(a) for a in DEFAULT_ZOOM_LIMITS_DEG)

    def __post_init__(self):
        if self.max_speed <= 0.0:
            raise ValueError("camera speed must be positive")
        lo, hi = self.zoom_limits
        if not lo - 1e-12 <= self.intr.vfov <= hi + 1e-12:
            raise ValueError(
                f"vfov {math.degrees(self.intr.vfov):.3f} deg outside zoom limits "
                f"[{math.degrees(lo):g}, {math.degrees(hi):g}]"
            )

    @classmethod
    def at_frame(cls, pose: Direction, intr: CameraIntrinsics, fps: float, frame_count: int, frame: int = 0, **kw):
        return cls(pose.normalized(), intr, fps, frame_count, clock_s=frame / fps, **kw)

    @property
    def raw_frame(self) -> int:
        return int(math.floor(self.clock_s * self.fps + _FRAME_EPS))

    @property
    def current_frame(self) -> int:
        return min(max(self.raw_frame, 0), self.frame_count - 1)

    @property
    def finished(self) -> bool:
        return self.raw_frame >= self.frame_count


def _pan_delta_deg(a: Direction, b: Direction) -> float:
    return abs(math.degrees(wrap_angle(b.phi - a.phi)))


def motion_delay(src: Direction, dst: Direction, max_speed: float = DEFAULT_SPEED_DEG_S) -> float:
    """Seconds needed to slew from ``src`` to ``dst``; both axes move at once."""
    if max_speed <= 0.0:
        raise ValueError("camera speed must be positive")
    d_pan = _pan_delta_deg(src, dst)
    d_tilt = abs(math.degrees(dst.theta - src.theta))
    return max(d_pan, d_tilt) / max_speed


def target_pose(cmd: CameraCommand, state: PtzState) -> Direction:
    if isinstance(cmd, GoToAngles):
        return Direction(cmd.tilt, cmd.pan).normalized()
    if isinstance(cmd, RecenterOnPixel):
        return unproject_image_point(ImagePoint(cmd.u, cmd.v), state.pose, state.intr).normalized()
    return state.pose


def execute(cmd: CameraCommand, state: PtzState, delays: DelayConfig, tau_p_measured: float | None = None) -> PtzState:
    """Apply ``cmd`` and advance the clock by motor + processing + communication delay.

    Raises ``EndOfScenario`` once the clock passes the last frame.
    """
    intr = state.intr
    if isinstance(cmd, SetZoom):
        lo, hi = state.zoom_limits
        if not lo <= cmd.vfov <= hi:
            raise ValueError(f"zoom {math.degrees(cmd.vfov):.3f} deg outside limits")
        intr = intr.with_vfov(cmd.vfov)
    elif not isinstance(cmd, (GoToAngles, RecenterOnPixel, Hold)):
        raise TypeError(f"unknown camera command {cmd!r}")

    pose = target_pose(cmd, state)
    tau = motion_delay(state.pose, pose, state.max_speed) + delays.processing(tau_p_measured) + delays.tau_c
    new = replace(state, pose=pose, intr=intr, clock_s=state.clock_s + tau)
    if new.finished:
        raise EndOfScenario(f"clock {new.clock_s:.4f} s passed the last frame")
    return new


def advance_past(state: PtzState, frame: int) -> PtzState:
    """Guarantee the next observation comes after ``frame``.

    A physical camera cannot observe the same instant twice, so a cycle
    whose delays fit inside one frame period still moves on to the next.
    """
    if state.raw_frame > frame:
        return state
    new = replace(state, clock_s=(frame + 1) / state.fps)
    if new.finished:
        raise EndOfScenario(f"no frame after {frame}")
    return new


def acquire(state: PtzState, scenario):
    """Render the current viewport; the camera is always still when this runs."""
    from .panorama import render_viewport

    if state.finished:
        raise EndOfScenario("scenario exhausted")
    return render_viewport(scenario.frame(state.current_frame), state.pose, state.intr)
