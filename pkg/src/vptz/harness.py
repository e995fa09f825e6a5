"""Acquire -> track -> score -> command loop over scenarios and delay grids."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw

from .camera import DEFAULT_ZOOM_LIMITS_DEG, DelayConfig, EndOfScenario, PtzState, acquire, advance_past, execute
from .evaluator import (
    METRICS,
    EvalReport,
    MetricSample,
    aggregate,
    aggregate_runs,
    format_table,
    sample_metrics,
    samples_to_csv,
    summary_json,
    table_to_csv,
)
from .geometry import CameraIntrinsics, Direction
from .groundtruth import GtParseError, Rect, adjust, read_vgt
from .panorama import GT_NAME, Scenario
from .tracker import EmptyModel, TrackerContext, TrackerObservation, make_tracker

logger = logging.getLogger(__name__)

DEFAULT_TAU_C = (0.0, 0.125, 0.25, 0.5)


class InitializationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: Path
    gt: Path | None = None
    tracker: str = "camshift"
    width: int = 640
    height: int = 480
    vfov_deg: float = 90.0
    tau_c: tuple[float, ...] = DEFAULT_TAU_C
    tau_p: str = "fixed:0"
    speed: float = 300.0
    initial_pose: str = "gt"
    out_dir: Path | None = None
    seed: int = 0
    dump_overlays: bool = False

    def __post_init__(self):
        if any(t < 0 for t in self.tau_c):
            raise ValueError("communication delays must be non-negative")
        DelayConfig.parse_tau_p(self.tau_p)
        lo, hi = DEFAULT_ZOOM_LIMITS_DEG
        if not lo <= self.vfov_deg <= hi:
            raise ValueError(f"vfov {self.vfov_deg} deg outside the camera zoom range [{lo:g}, {hi:g}]")
        if self.speed <= 0:
            raise ValueError("camera speed must be positive")
        self.intrinsics()

    @property
    def gt_path(self) -> Path:
        if self.gt is not None:
            return Path(self.gt)
        root = Path(self.scenario)
        return (root.parent if root.is_file() else root) / GT_NAME

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.from_degrees(self.vfov_deg, self.width, self.height)


@dataclass
class SequenceResult:
    name: str
    tags: tuple[str, ...]
    tau_c: float
    samples: list[MetricSample]
    report: EvalReport
    config: dict
    overlays: list[tuple[int, np.ndarray]] = field(default_factory=list, repr=False)


def initial_pose(policy: str, gt_direction: Direction, seed: int) -> Direction:
    """``gt`` aims at the first GT direction; ``gt-jitter:<deg>`` perturbs it."""
    if policy == "gt":
        return gt_direction
    if policy.startswith("gt-jitter:"):
        amp = math.radians(float(policy.split(":", 1)[1]))
        rng = np.random.default_rng(seed)
        dt, dp = rng.uniform(-amp, amp, size=2)
        return Direction(gt_direction.theta + dt, gt_direction.phi + dp).normalized()
    raise ValueError(f"unknown initial pose policy {policy!r}")


def draw_overlay(image: np.ndarray, gt_box: Rect | None, pred_box: Rect | None) -> np.ndarray:
    """GT box in green, prediction in red, FOV centre cross in white."""
    h, w = image.shape[:2]
    img = Image.fromarray(image)
    draw = ImageDraw.Draw(img)

    def raster(r: Rect):
        return [r.x, h - r.top, r.right, h - r.y]

    if gt_box is not None:
        draw.rectangle(raster(gt_box), outline=(0, 255, 0), width=2)
    if pred_box is not None:
        draw.rectangle(raster(pred_box), outline=(255, 0, 0), width=2)
    cx, cy = w / 2, h / 2
    draw.line([cx - 8, cy, cx + 8, cy], fill=(255, 255, 255))
    draw.line([cx, cy - 8, cx, cy + 8], fill=(255, 255, 255))
    return np.asarray(img)


def run_sequence(cfg: RunConfig, tau_c: float | None = None) -> SequenceResult:
    """Run one scenario at one communication delay and score it online."""
    tau_c = cfg.tau_c[0] if tau_c is None else tau_c
    scenario = Scenario(cfg.scenario)
    gt = read_vgt(cfg.gt_path)
    if len(gt) == 0:
        raise GtParseError(cfg.gt_path, 2, "no annotated frames")

    first = gt.frames[0]
    if first >= scenario.frame_count:
        raise GtParseError(cfg.gt_path, 2, f"first annotated frame {first} beyond scenario end")
    pose0 = initial_pose(cfg.initial_pose, gt.get(first).direction, cfg.seed)
    state = PtzState.at_frame(pose0, cfg.intrinsics(), scenario.fps, scenario.frame_count, first, max_speed=cfg.speed)
    delays = DelayConfig.parse_tau_p(cfg.tau_p, tau_c)
    tracker = make_tracker(cfg.tracker, TrackerContext(gt, scenario.fps, delays, cfg.speed))

    samples: list[MetricSample] = []
    overlays = []
    initialised = False
    while True:
        frame = state.current_frame
        image = acquire(state, scenario)
        obs = TrackerObservation(image, state.pose, state.intr, state.clock_s)
        adj = adjust(gt, frame, state.pose, state.intr)
        if not initialised:
            if adj is None or not adj.in_view:
                raise InitializationFailed(f"{scenario.name}: target not visible in the first frame {frame}")
            try:
                tracker.init(obs, adj.bbox.clip(state.intr.width, state.intr.height))
            except EmptyModel as exc:
                raise InitializationFailed(f"{scenario.name}: {exc}") from exc
            initialised = True

        t0 = time.perf_counter()
        decision = tracker.step(obs)
        tau_p = time.perf_counter() - t0

        if adj is not None:
            samples.append(
                sample_metrics(frame, adj, decision.predicted_center, decision.predicted_box, state.intr, decision.lost)
            )
        if cfg.dump_overlays:
            overlays.append((frame, draw_overlay(image, adj.bbox if adj else None, decision.predicted_box)))

        try:
            state = execute(decision.camera_command, state, delays, tau_p)
            state = advance_past(state, frame)
        except EndOfScenario:
            break

    config = {
        "scenario": scenario.name,
        "tracker": cfg.tracker,
        "tau_c": tau_c,
        "tau_p": cfg.tau_p,
        "width": cfg.width,
        "height": cfg.height,
        "vfov_deg": cfg.vfov_deg,
        "speed_deg_s": cfg.speed,
        "seed": cfg.seed,
        "initial_pose_policy": cfg.initial_pose,
        "initial_pose_deg": {"tilt": math.degrees(pose0.theta), "pan": math.degrees(pose0.phi)},
        "fps": scenario.fps,
        "tags": list(scenario.tags),
    }
    report = aggregate(samples, scenario.tags)
    logger.info(
        "%s tau_c=%g: %d frames, OR=%.3f TF=%.3f", scenario.name, tau_c, report.processed_frames,
        report.mean_or, report.tf_ratio,
    )
    return SequenceResult(scenario.name, scenario.tags, tau_c, samples, report, config, overlays)


def _job(args):
    cfg, tau_c = args
    try:
        return run_sequence(cfg, tau_c), None
    except Exception as exc:  # reported per job, the sweep carries on
        logger.debug("job failed", exc_info=True)
        return None, f"{cfg.scenario} (tau_c={tau_c:g}): {type(exc).__name__}: {exc}"


def run_sweep(configs: Sequence[RunConfig], jobs: int = 1):
    """Run every (scenario, tau_c) pair; returns ``(results, failures)`` in input order."""
    work = [(cfg, t) for cfg in configs for t in cfg.tau_c]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_job, work))
    else:
        outcomes = [_job(w) for w in work]
    results = [r for r, err in outcomes if r is not None]
    failures = [err for r, err in outcomes if err is not None]
    return results, failures


def _tau_dir(tau: float) -> str:
    return f"tau_c_{tau:g}"


def emit_reports(results: Sequence[SequenceResult], out_dir: str | Path) -> dict[float, EvalReport]:
    """Write per-run CSV/JSON, the tag x tau_c tables and optional overlays.

    Returns the pooled report for each tau_c.
    """
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    for r in results:
        run_dir = out / r.name / _tau_dir(r.tau_c)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "frames.csv").write_text(samples_to_csv(r.samples), encoding="utf-8")
        (run_dir / "summary.json").write_text(summary_json(r.report, r.config), encoding="utf-8")
        if r.overlays:
            ov_dir = run_dir / "overlays"
            ov_dir.mkdir(exist_ok=True)
            for frame, img in r.overlays:
                Image.fromarray(img).save(ov_dir / f"frame_{frame:05d}.png")

    by_tau: dict[float, list[SequenceResult]] = {}
    for r in results:
        by_tau.setdefault(r.tau_c, []).append(r)
    pooled = {t: aggregate_runs([(r.samples, r.tags) for r in rs]) for t, rs in sorted(by_tau.items())}
    tables = "\n".join(format_table(pooled, m) for m in METRICS)
    (out / "tables.txt").write_text(tables, encoding="utf-8")
    (out / "aggregate.csv").write_text(table_to_csv(pooled), encoding="utf-8")
    return pooled
