"""Per-frame CLE / OR / TCE / TF metrics and their aggregation into reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .geometry import CameraIntrinsics, ImagePoint
from .groundtruth import AdjustedGt, Rect

INVALID = -1.0
FULL_DATASET = "full dataset"
METRICS = ("cle", "tce", "or", "tf")
METRIC_TITLES = {
    "cle": "Center Location Error (CLE) in pixels",
    "tce": "Target to Center Error (TCE) in pixels",
    "or": "Overlap Ratio (OR)",
    "tf": "Track Fragmentation (TF)",
}


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class MetricSample:
    frame_index: int
    cle: float
    or_: float
    tce: float
    tf: int

    @property
    def valid(self) -> bool:
        return self.tf == 0


def overlap_ratio(a: Rect, b: Rect) -> float:
    """Intersection over union; 0 when the union is empty."""
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def sample_metrics(
    frame_index: int,
    gt: AdjustedGt,
    predicted_center: ImagePoint,
    predicted_box: Rect,
    intr: CameraIntrinsics,
    lost: bool = False,
) -> MetricSample:
    """Score one frame.

    The GT box is clipped to the image before computing OR.  A tracker that
    declared the target lost still supplies its last centre for CLE and
    scores OR = 0.
    """
    if not gt.in_view:
        return MetricSample(frame_index, INVALID, 0.0, INVALID, 1)
    c_gt = gt.center
    cle = math.hypot(c_gt.u - predicted_center[0], c_gt.v - predicted_center[1])
    c_fov = intr.center
    tce = math.hypot(c_fov.u - c_gt.u, c_fov.v - c_gt.v)
    or_ = 0.0 if lost else overlap_ratio(gt.bbox.clip(intr.width, intr.height), predicted_box)
    return MetricSample(frame_index, cle, min(max(or_, 0.0), 1.0), tce, 0)


@dataclass(frozen=True)
class Aggregates:
    mean_cle: float | None
    mean_or: float
    mean_tce: float | None
    tf_ratio: float
    processed_frames: int

    def value(self, metric: str) -> float | None:
        return {"cle": self.mean_cle, "or": self.mean_or, "tce": self.mean_tce, "tf": self.tf_ratio}[metric]


def _aggregate(samples: Sequence[MetricSample]) -> Aggregates:
    if not samples:
        raise EmptyInput("cannot aggregate zero samples")
    valid = [s for s in samples if s.valid]
    n = len(samples)
    # fsum keeps the means independent of sample order
    mean_cle = math.fsum(s.cle for s in valid) / len(valid) if valid else None
    mean_tce = math.fsum(s.tce for s in valid) / len(valid) if valid else None
    mean_or = math.fsum(s.or_ for s in samples) / n
    # same value as sum(tf) / n, written so it equals 1 - valid/n bit for bit
    tf_ratio = 1.0 - len(valid) / n
    return Aggregates(mean_cle, mean_or, mean_tce, tf_ratio, n)


@dataclass(frozen=True)
class EvalReport:
    overall: Aggregates
    by_tag: dict[str, Aggregates] = field(default_factory=dict)

    @property
    def mean_cle(self):
        return self.overall.mean_cle

    @property
    def mean_or(self):
        return self.overall.mean_or

    @property
    def mean_tce(self):
        return self.overall.mean_tce

    @property
    def tf_ratio(self):
        return self.overall.tf_ratio

    @property
    def processed_frames(self):
        return self.overall.processed_frames

    def to_dict(self) -> dict:
        return {
            **asdict(self.overall),
            "by_tag": {tag: asdict(agg) for tag, agg in sorted(self.by_tag.items())},
        }


def aggregate(samples: Sequence[MetricSample], difficulty_tags: Iterable[str] = ()) -> EvalReport:
    """Report for a single sequence; every tag receives the sequence aggregates."""
    return aggregate_runs([(samples, tuple(difficulty_tags))])


def aggregate_runs(runs: Sequence[tuple[Sequence[MetricSample], Iterable[str]]]) -> EvalReport:
    """Pool frames across sequences, overall and per difficulty tag."""
    pooled: list[MetricSample] = []
    per_tag: dict[str, list[MetricSample]] = {}
    for samples, tags in runs:
        pooled.extend(samples)
        for tag in tags:
            per_tag.setdefault(tag, []).extend(samples)
    overall = _aggregate(pooled)
    return EvalReport(overall, {tag: _aggregate(s) for tag, s in per_tag.items()})


class OnlineEvaluator:
    """Accumulates samples for one sequence run as the harness advances."""

    def __init__(self, intr: CameraIntrinsics, tags: Iterable[str] = ()):
        self.intr = intr
        self.tags = tuple(tags)
        self.samples: list[MetricSample] = []

    def record(self, frame_index, gt, predicted_center, predicted_box, lost=False) -> MetricSample:
        s = sample_metrics(frame_index, gt, predicted_center, predicted_box, self.intr, lost)
        self.samples.append(s)
        return s

    def report(self) -> EvalReport:
        return aggregate(self.samples, self.tags)


# --- serialisation -----------------------------------------------------------


def _fmt(x: float) -> str:
    if x == INVALID:
        return "-1"
    return f"{x:.6f}"


def samples_to_csv(samples: Sequence[MetricSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frame", "cle", "or", "tce", "tf"])
    for s in samples:
        w.writerow([s.frame_index, _fmt(s.cle), f"{s.or_:.6f}", _fmt(s.tce), s.tf])
    return buf.getvalue()


def samples_from_csv(text: str) -> list[MetricSample]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        MetricSample(int(r["frame"]), float(r["cle"]), float(r["or"]), float(r["tce"]), int(r["tf"])) for r in rows
    ]


def summary_json(report: EvalReport, config: Mapping) -> str:
    payload = {"report": report.to_dict(), "config": dict(config)}
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _row_labels(reports: Mapping[float, EvalReport]) -> list[str]:
    tags = sorted({t for r in reports.values() for t in r.by_tag})
    return tags + [FULL_DATASET]


def _cell(report: EvalReport, label: str, metric: str) -> float | None:
    agg = report.overall if label == FULL_DATASET else report.by_tag.get(label)
    return None if agg is None else agg.value(metric)


def _tau_label(tau: float) -> str:
    frac = {0.0: "0", 0.125: "1/8", 0.25: "1/4", 0.5: "1/2"}.get(tau)
    return f"tau_c={frac if frac is not None else f'{tau:g}'}"


def format_table(reports: Mapping[float, EvalReport], metric: str) -> str:
    """Difficulty tag x tau_c table for one metric, full-dataset row last."""
    taus = sorted(reports)
    digits = 1 if metric in ("cle", "tce") else 3
    labels = _row_labels(reports)
    width = max(len(s) for s in labels + ["tau_c=1/8"]) + 2
    lines = [METRIC_TITLES[metric] + " by communication delay tau_c (s)"]
    lines.append("".ljust(width) + "".join(_tau_label(t).rjust(12) for t in taus))
    for label in labels:
        if label == FULL_DATASET:
            lines.append("-" * (width + 12 * len(taus)))
        cells = []
        for t in taus:
            v = _cell(reports[t], label, metric)
            cells.append(("n/a" if v is None else f"{v:.{digits}f}").rjust(12))
        lines.append(label.ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"


def table_to_csv(reports: Mapping[float, EvalReport]) -> str:
    """Long-form aggregate table: one row per metric x difficulty tag x tau_c."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "tag", "tau_c", "value", "processed_frames"])
    for metric in METRICS:
        for label in _row_labels(reports):
            for t in sorted(reports):
                agg = reports[t].overall if label == FULL_DATASET else reports[t].by_tag.get(label)
                if agg is None:
                    continue
                v = agg.value(metric)
                w.writerow([metric, label, f"{t:g}", "" if v is None else f"{v:.6f}", agg.processed_frames])
    return buf.getvalue()
