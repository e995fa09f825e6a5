import json
import logging
import math

import pytest

from vptz.cli import main
from vptz.groundtruth import GtParseError
from vptz.harness import (
    InitializationFailed,
    RunConfig,
    emit_reports,
    initial_pose,
    run_sequence,
    run_sweep,
)
from vptz.geometry import Direction
from vptz.panorama import Scenario

SMALL = dict(width=160, height=120)


def test_zero_delay_run_processes_every_frame(short_scenario):
    n = Scenario(short_scenario).frame_count
    res = run_sequence(RunConfig(short_scenario, tracker="static", tau_c=(0.0,), **SMALL))
    assert res.report.processed_frames == n
    assert [s.frame_index for s in res.samples] == list(range(n))


def test_delay_skips_frames(short_scenario):
    res = run_sequence(RunConfig(short_scenario, tracker="static", tau_c=(0.25,), **SMALL))
    # Hold costs exactly tau_c = 4 frames at 16 fps
    assert [s.frame_index for s in res.samples] == list(range(0, 32, 4))


def test_oracle_tracks_short_scenario(short_scenario):
    res = run_sequence(RunConfig(short_scenario, tracker="oracle", tau_c=(0.125,), **SMALL))
    assert res.report.tf_ratio == 0.0
    assert res.report.mean_or >= 0.95


def test_config_recorded(short_scenario):
    res = run_sequence(RunConfig(short_scenario, tracker="static", tau_c=(0.5,), seed=7, **SMALL))
    cfg = res.config
    assert cfg["tau_c"] == 0.5 and cfg["seed"] == 7 and cfg["tracker"] == "static"
    assert cfg["initial_pose_policy"] == "gt" and set(cfg["initial_pose_deg"]) == {"tilt", "pan"}


def test_initial_pose_policies():
    d = Direction(1.4, 0.3)
    assert initial_pose("gt", d, 0) == d
    a = initial_pose("gt-jitter:2", d, 5)
    assert a == initial_pose("gt-jitter:2", d, 5) != d
    assert abs(a.theta - d.theta) <= math.radians(2) and abs(a.phi - d.phi) <= math.radians(2)
    with pytest.raises(ValueError):
        initial_pose("random", d, 0)


def test_run_config_validation(short_scenario):
    with pytest.raises(ValueError):
        RunConfig(short_scenario, tau_c=(-0.1,))
    with pytest.raises(ValueError):
        RunConfig(short_scenario, tau_p="sometimes")
    with pytest.raises(ValueError):
        RunConfig(short_scenario, vfov_deg=170)


def test_empty_gt_names_line_one(short_scenario, tmp_path):
    gt = tmp_path / "empty.vgt"
    gt.write_text("")
    with pytest.raises(GtParseError) as err:
        run_sequence(RunConfig(short_scenario, gt=gt, **SMALL))
    assert err.value.line == 1 and "empty.vgt:1:" in str(err.value)


def test_target_outside_first_view_fails_init(short_scenario):
    with pytest.raises(InitializationFailed):
        run_sequence(RunConfig(short_scenario, initial_pose="gt-jitter:170", seed=1, vfov_deg=20, **SMALL))


def test_emit_reports_layout(short_scenario, tmp_path):
    results, failures = run_sweep([RunConfig(short_scenario, tracker="static", tau_c=(0.0, 0.5), **SMALL)])
    assert not failures
    pooled = emit_reports(results, tmp_path)
    assert sorted(pooled) == [0.0, 0.5]
    for tau in ("0", "0.5"):
        run_dir = tmp_path / "short" / f"tau_c_{tau}"
        rows = (run_dir / "frames.csv").read_text().splitlines()
        summary = json.loads((run_dir / "summary.json").read_text())
        assert len(rows) - 1 == summary["report"]["processed_frames"]
        assert summary["config"]["scenario"] == "short"
    tables = (tmp_path / "tables.txt").read_text()
    assert "LR" in tables and "full dataset" in tables
    assert (tmp_path / "aggregate.csv").exists()


def _outputs(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.suffix in (".csv", ".json", ".txt")}


def test_cli_run_is_deterministic(short_scenario, tmp_path, capsys):
    args = ["run", "--scenario", str(short_scenario), "--tracker", "camshift", "--width", "160", "--height", "120",
            "--tau-c", "0", "--tau-c", "0.25", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    a, b = _outputs(tmp_path / "a"), _outputs(tmp_path / "b")
    assert a and a == b
    assert "Overlap Ratio" in capsys.readouterr().out


def test_cli_overlays(short_scenario, tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--scenario", str(short_scenario), "--tracker", "static", "--width", "160", "--height", "120",
                 "--tau-c", "0.5", "--dump-overlays", "--out", str(out)]) == 0
    pngs = sorted((out / "short" / "tau_c_0.5" / "overlays").glob("*.png"))
    assert len(pngs) == 4


def test_cli_measured_processing_delay(short_scenario, tmp_path):
    out = tmp_path / "m"
    assert main(["run", "--scenario", str(short_scenario), "--width", "160", "--height", "120",
                 "--tau-c", "0", "--tau-p", "measured", "--out", str(out)]) == 0
    rows = (out / "short" / "tau_c_0" / "frames.csv").read_text().splitlines()
    assert 1 < len(rows) <= 33


def test_cli_partial_failure_exit_code(short_scenario, tmp_path, capsys):
    bad = tmp_path / "bad.vgt"
    bad.write_text("")
    code = main(["run", "--scenario", str(short_scenario), "--scenario", str(short_scenario),
                 "--gt", str(short_scenario / "gt.vgt"), "--gt", str(bad), "--tracker", "static",
                 "--width", "160", "--height", "120", "--tau-c", "0", "--out", str(tmp_path / "r")])
    assert code == 1
    err = capsys.readouterr().err
    assert "1 sequence run(s) failed" in err and "bad.vgt:1:" in err


def test_cli_config_errors(short_scenario, tmp_path):
    assert main(["run", "--scenario", str(short_scenario), "--tau-c", "-1", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", str(short_scenario), "--tracker", "nope", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_cli_synth(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["synth", "--duration", "0.5", "--fps", "8", "--radius-deg", "4", "--omega-deg-s", "10",
                 "--pano-width", "128", "--tags", "FM,CB", "--out", str(out)]) == 0
    scen = Scenario(out)
    assert scen.frame_count == 4 and scen.tags == ("FM", "CB") and scen.name == "s"
    assert "wrote 4 frames" in capsys.readouterr().out


def test_log_level_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("VPTZ_LOG", "debug")
    main(["synth", "--duration", "0.25", "--fps", "4", "--pano-width", "64", "--out", str(tmp_path / "x")])
    assert logging.getLogger("vptz").level == logging.DEBUG
    monkeypatch.setenv("VPTZ_LOG", "bogus")
    main(["synth", "--duration", "0.25", "--fps", "4", "--pano-width", "64", "--out", str(tmp_path / "y")])
    assert logging.getLogger("vptz").level == logging.WARNING
