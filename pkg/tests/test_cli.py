import json

import pytest

from artifact.cli import EXIT_CHECKS_FAILED, EXIT_ERROR, EXIT_OK, main
from artifact.suites import ExperimentManifest, ManifestError, run_suite


def test_chains_command_writes_report(tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"max_genus": 2, "max_punctures": 3, "schottky_ranks": [2]}))
    assert main(["--config", str(manifest), "--out", str(tmp_path / "o"), "chains"]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["pass"] and len(report["checks"]) >= 5
    assert (tmp_path / "o" / "tables" / "chains.csv").read_text().startswith("identity,g,n")


def test_unsupported_precision_is_an_error(tmp_path):
    assert main(["--precision", "100", "--out", str(tmp_path), "chains"]) == EXIT_ERROR


def test_unknown_manifest_key(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ManifestError):
        ExperimentManifest.load(path)
    assert main(["--config", str(path), "--out", str(tmp_path), "chains"]) == EXIT_ERROR


def test_invalid_moduli_point():
    with pytest.raises(ManifestError):
        ExperimentManifest(points=[[1.0]])


def test_toml_and_json_manifests_agree(tmp_path):
    (tmp_path / "m.toml").write_text('name = "t"\npoints = [["0.3+0.2j"]]\nseed = 7\n')
    (tmp_path / "m.json").write_text(json.dumps({"name": "t", "points": [[[0.3, 0.2]]], "seed": 7}))
    a = ExperimentManifest.load(tmp_path / "m.toml")
    b = ExperimentManifest.load(tmp_path / "m.json")
    assert a.to_json() == b.to_json()
    assert a.configs[0].finite_punctures == (0.3 + 0.2j,)


def test_solve_command(tmp_path):
    code = main(["--out", str(tmp_path), "solve", "--point", "0.3"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["pass"] and abs(report["c"][0][1]) < 1e-8


def test_failed_computation_exits_one(tmp_path):
    # a point too close to a puncture for the monodromy integrator
    code = main(["--out", str(tmp_path), "solve", "--point", "1e-9"])
    assert code in (EXIT_CHECKS_FAILED, EXIT_ERROR)


def test_baseline_suite_rows_anchored_and_deterministic():
    m = ExperimentManifest(name="b", points=[[0.5]])
    a = run_suite("gamma2-baseline", m).to_json()
    b = run_suite("gamma2-baseline", m).to_json()
    assert a["pass"]
    assert all(r["anchor"] for r in a["checks"])
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
