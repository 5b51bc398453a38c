import json

import pytest

from caplap.config import ConfigError, apply_overrides
from caplap.scenarios import (EXACT_SOLUTIONS, convergence_table, get_scenario, list_scenarios,
                              run_scenario)

NAMES = [n for n, _ in list_scenarios()]


def test_registry():
    assert len(NAMES) >= 10
    assert {"long_time_slope", "barrier_verify", "convolution_props"} <= set(NAMES)
    with pytest.raises(ConfigError):
        get_scenario("nope")


@pytest.mark.parametrize("name", NAMES)
def test_scenario_defaults_pass(name, tmp_path):
    status, outcome = run_scenario(name, out_dir=tmp_path)
    assert status == 0, [r.as_record() for r in outcome.reports if not r.passed]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["exit_status"] == 0 and summary["scenario"] == name
    verify = json.loads((tmp_path / "verify.json").read_text())
    assert all(r["status"] in ("pass", "untested") for r in verify)
    for f in tmp_path.glob("*.csv"):
        assert "nan" not in f.read_text().lower()


def test_bad_override_writes_nothing(tmp_path):
    cfg = get_scenario("ut_bound").config()
    cfg = apply_overrides(cfg, "[problem]\np = 0.5\n")
    status, outcome = run_scenario("ut_bound", cfg, tmp_path / "out")
    assert status == 2 and outcome is None
    assert not (tmp_path / "out").exists()


def test_convergence_table_shape():
    rows = convergence_table("affine_steady", (16, 32))
    assert [r["N"] for r in rows] == [16, 32]
    assert rows[-1]["order"] is None and rows[1]["error"] < 1e-12
    assert set(EXACT_SOLUTIONS) == {"manufactured_plap", "heat_mode", "affine_steady"}
    with pytest.raises(KeyError):
        convergence_table("unknown")
