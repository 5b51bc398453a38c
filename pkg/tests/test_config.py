import numpy as np
import pytest

from caplap.config import ConfigError, RunConfig, apply_overrides, dump_config, load_config
from caplap.geometry import RadialAnnulus


def test_defaults_build():
    cfg = RunConfig()
    grid = cfg.make_grid()
    assert grid.N == cfg.grid.N
    cfg.problem_spec()
    cfg.solver_config()


def test_round_trip(tmp_path):
    cfg = apply_overrides(RunConfig(), "[problem]\np = 1.5\n[bc]\nphi = 0.2, 0.4\n"
                                       "[domain]\nkind = annulus\n")
    path = tmp_path / "run.ini"
    path.write_text(dump_config(cfg))
    back = load_config(path)
    assert dump_config(back) == dump_config(cfg)
    assert back.problem.p == 1.5 and back.phi_bdry() == (0.2, 0.4)
    assert isinstance(back.make_grid().domain, RadialAnnulus)


@pytest.mark.parametrize("text", ["[problem]\nbogus = 1\n", "[nowhere]\nx = 1\n",
                                  "[grid]\nN = many\n", "not an ini file"])
def test_strict_parsing(text):
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), text)


@pytest.mark.parametrize("text", ["[problem]\np = 0.9\n", "[domain]\nkind = torus\n",
                                  "[solver]\ndt = -1\n", "[bc]\nq = 0\nphi = 1.5\n"])
def test_invalid_values_rejected_by_builders(text):
    cfg = apply_overrides(RunConfig(), text)
    with pytest.raises(ValueError):
        cfg.make_grid()
        cfg.problem_spec()
        cfg.solver_config()


def test_keys_are_case_sensitive():
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), "[grid]\nn = 10\n")


def test_random_rhs_is_seeded():
    a = apply_overrides(RunConfig(), "[problem]\nphi_rhs = random\n[run]\nseed = 3\n")
    b = a.copy()
    grid = a.make_grid()
    assert np.array_equal(a.problem_spec().rhs_values(grid), b.problem_spec().rhs_values(grid))
    c = apply_overrides(a, "[run]\nseed = 4\n")
    assert not np.array_equal(a.problem_spec().rhs_values(grid),
                              c.problem_spec().rhs_values(grid))
