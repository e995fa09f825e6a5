"""Command line entry point: ``vptz run`` and ``vptz synth``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .harness import DEFAULT_TAU_C, RunConfig, emit_reports, run_sweep
from .panorama import SyntheticPathSpec, generate_synthetic_scenario
from .tracker import TRACKERS

logger = logging.getLogger("vptz")


def _setup_logging():
    name = os.environ.get("VPTZ_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    # the package logger carries the level so an existing root handler does not mask it
    logger.setLevel(level)


def _color(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
        raise argparse.ArgumentTypeError("color must be R,G,B with 0..255 components")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vptz", description="Virtual PTZ tracking simulator and evaluator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a tracker on one or more scenarios")
    run.add_argument("--scenario", action="append", required=True, type=Path,
                     help="scenario directory or scenario.json; repeat for several sequences")
    run.add_argument("--gt", action="append", type=Path,
                     help="GT file per scenario (default: <scenario>/gt.vgt)")
    run.add_argument("--tracker", default="camshift", choices=sorted(TRACKERS))
    run.add_argument("--tau-c", action="append", type=float, dest="tau_c",
                     help="communication delay in seconds; repeat for a grid (default 0 1/8 1/4 1/2)")
    run.add_argument("--tau-p", default="fixed:0", help="'fixed:<seconds>' or 'measured'")
    run.add_argument("--width", type=int, default=640)
    run.add_argument("--height", type=int, default=480)
    run.add_argument("--vfov", type=float, default=90.0, help="vertical FOV in degrees")
    run.add_argument("--speed", type=float, default=300.0, help="max pan/tilt speed in deg/s")
    run.add_argument("--initial-pose", default="gt", help="'gt' or 'gt-jitter:<deg>'")
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--dump-overlays", action="store_true")

    synth = sub.add_parser("synth", help="generate a synthetic moving-disc scenario")
    synth.add_argument("--duration", type=float, default=10.0)
    synth.add_argument("--fps", type=float, default=16.0)
    synth.add_argument("--radius-deg", type=float, default=5.0)
    synth.add_argument("--omega-deg-s", type=float, default=20.0)
    synth.add_argument("--heading-deg", type=float, default=0.0)
    synth.add_argument("--phase-deg", type=float, default=0.0)
    synth.add_argument("--start-pan", type=float, default=0.0, help="degrees")
    synth.add_argument("--start-tilt", type=float, default=90.0, help="polar angle in degrees")
    synth.add_argument("--color", type=_color, default=(220, 30, 30))
    synth.add_argument("--background", default="checker", choices=["uniform", "checker", "noise", "gradient"])
    synth.add_argument("--pano-width", type=int, default=1024)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--name", default=None)
    synth.add_argument("--tags", default="", help="comma-separated difficulty tags, e.g. FM,CB")
    synth.add_argument("--out", type=Path, required=True)
    return parser


def cmd_run(args) -> int:
    gts = args.gt or []
    if gts and len(gts) != len(args.scenario):
        print("error: give one --gt per --scenario or none", file=sys.stderr)
        return 2
    configs = []
    for i, scen in enumerate(args.scenario):
        try:
            configs.append(RunConfig(
                scenario=scen,
                gt=gts[i] if gts else None,
                tracker=args.tracker,
                width=args.width,
                height=args.height,
                vfov_deg=args.vfov,
                tau_c=tuple(args.tau_c) if args.tau_c else DEFAULT_TAU_C,
                tau_p=args.tau_p,
                speed=args.speed,
                initial_pose=args.initial_pose,
                out_dir=args.out,
                seed=args.seed,
                dump_overlays=args.dump_overlays,
            ))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2

    results, failures = run_sweep(configs, jobs=max(1, args.jobs))
    if results:
        emit_reports(results, args.out)
        print((args.out / "tables.txt").read_text(encoding="utf-8"))
    if failures:
        print(f"{len(failures)} sequence run(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticPathSpec(
        start_tilt_deg=args.start_tilt,
        start_pan_deg=args.start_pan,
        heading_deg=args.heading_deg,
        omega_deg_s=args.omega_deg_s,
        phase_deg=args.phase_deg,
        radius_deg=args.radius_deg,
        color=args.color,
        background=args.background,
        duration_s=args.duration,
        fps=args.fps,
        pano_width=args.pano_width,
        seed=args.seed,
        name=args.name or args.out.name,
        tags=tuple(t for t in args.tags.split(",") if t),
    )
    manifest, records = generate_synthetic_scenario(spec, args.out)
    print(f"wrote {manifest.frame_count} frames and {len(records)} GT records to {args.out}")
    return 0


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return cmd_run(args) if args.command == "run" else cmd_synth(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
