"""Virtual PTZ camera simulation and online tracking evaluation."""

from .camera import DelayConfig, EndOfScenario, PtzState, execute, motion_delay
from .evaluator import EvalReport, MetricSample, aggregate, sample_metrics
from .geometry import (
    CameraIntrinsics,
    Direction,
    ImagePoint,
    direction_from_point,
    project_camera_point,
    project_world_point,
    project_world_points,
    unproject_image_point,
    unproject_image_points,
    view_matrices,
    view_matrix,
)
from .groundtruth import AdjustedGt, BasicGtRecord, GtTable, Rect, adjust_bbox, adjust_center, read_vgt, write_vgt
from .harness import RunConfig, emit_reports, run_sequence, run_sweep
from .panorama import Scenario, SyntheticPathSpec, generate_synthetic_scenario, render_viewport

__version__ = "0.1.0"
