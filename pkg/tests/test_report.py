import csv
import json

import pytest

from eigenwkb.config import settings
from eigenwkb.services.report import load_config, run_all
from eigenwkb.utils.errors import ConfigError


def legendre_config(tmp_path, **overrides):
    config = {
        "bits": 128,
        "output_dir": str(tmp_path / "out"),
        "scenarios": [{
            "name": "legendre2",
            "n_grid": [4, 8],
            "z_grid": ["2,0", "1,1"],
            "experiments": ["ratio", "strong"],
        }],
    }
    config.update(overrides)
    return config


def test_empty_config_succeeds(tmp_path):
    report = run_all({"scenarios": []}, tmp_path)
    assert report.exit_code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["scenarios"] == []
    assert manifest["exit_code"] == 0


def test_suite_writes_csv_and_manifest(tmp_path):
    report = run_all(legendre_config(tmp_path))
    out = tmp_path / "out"
    assert report.exit_code == 0
    assert (out / "legendre2_ratio.csv").exists()
    assert (out / "legendre2_strong.csv").exists()
    with open(out / "legendre2_strong.csv", newline="") as f:
        reader = csv.DictReader(f)
        assert reader.fieldnames == settings.CSV_COLUMNS
        rows = list(reader)
    assert [(r["n"], r["z_re"], r["z_im"]) for r in rows] == [
        ("4", "1", "1"), ("4", "2", "0"), ("8", "1", "1"), ("8", "2", "0"),
    ]
    entry = report.manifest["scenarios"][0]
    assert entry["bits"] == 128
    assert len(entry["operator_hash"]) == 40
    assert entry["experiments"]["strong"]["rows"] == 4


def test_output_is_deterministic(tmp_path):
    first = run_all(legendre_config(tmp_path), tmp_path / "a")
    second = run_all(legendre_config(tmp_path), tmp_path / "b")
    assert first.exit_code == second.exit_code == 0
    for name in ("legendre2_ratio.csv", "legendre2_strong.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_threshold_violation_sets_exit_code(tmp_path):
    report = run_all(legendre_config(tmp_path, thresholds={"strong": 1e-30}))
    assert report.exit_code == 1
    assert report.manifest["violations"][0]["threshold"] == "strong"
    assert report.manifest["exit_code"] == 1


def test_duplicate_labels_get_suffixes(tmp_path):
    config = legendre_config(tmp_path)
    config["scenarios"].append(dict(config["scenarios"][0]))
    report = run_all(config)
    labels = [s["label"] for s in report.manifest["scenarios"]]
    assert labels == ["legendre2", "legendre21"]


def test_command_line_bits_win(tmp_path):
    report = run_all(legendre_config(tmp_path), bits=96)
    assert report.manifest["scenarios"][0]["bits"] == 96


def test_point_inside_hull_is_a_config_error(tmp_path):
    config = legendre_config(tmp_path)
    config["scenarios"][0]["z_grid"] = ["2,0", "0,0"]
    with pytest.raises(ConfigError) as info:
        run_all(config)
    assert info.value.field == "scenarios.0.z_grid.1"
    assert info.value.line is not None


def test_bad_json_reports_the_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "scenarios": [\n    {"name": "legendre2",}\n  ]\n}\n')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3


def test_unknown_scenario_reports_the_field(tmp_path):
    path = tmp_path / "unknown.json"
    path.write_text('{\n  "scenarios": [\n    {"name": "hermite"}\n  ]\n}\n')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.field == "scenarios.0.name"
    assert info.value.line == 3


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        load_config({"scenarios": [], "precision": 5})


def test_zeros_threshold_uses_the_hausdorff_distance(tmp_path):
    config = legendre_config(tmp_path, thresholds={"zeros": 0.01})
    config["scenarios"][0]["experiments"] = ["zeros"]
    report = run_all(config)
    assert report.exit_code == 1
    violation = report.manifest["violations"][0]
    assert violation["threshold"] == "zeros"
    # every zero of Q_8 lies on [-1, 1], but the largest is about 0.96
    assert violation["measured"] == pytest.approx(0.0397, abs=1e-3)
    summary = report.manifest["scenarios"][0]["experiments"]["zeros"]["summary"]
    assert summary["max_hull_distance"] < 1e-10
