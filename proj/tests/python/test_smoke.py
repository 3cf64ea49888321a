import json
import math

import pytest

regsub = pytest.importorskip("regsub")


def unit():
    return regsub.DomainSpec(0.0, 1.0, 0.0, 1.0)


def test_set_op_and_measure():
    d = unit()
    assert regsub.set_op([(0.0, 0.5)], [(0.25, 1.0)], "intersect", d) == [(0.25, 0.5)]
    s = regsub.ScaleFunction.identity(0.0, 1.0, 0.5)
    assert regsub.stieltjes_measure(s, [(0.0, 0.3)]) == pytest.approx(0.3)
    sub = regsub.derive_subscale(s, [(0.0, 0.2), (0.4, 1.0)], 0.5)
    assert not sub.strict
    assert sub(0.1) == pytest.approx(-0.2)


def test_heat_semigroup():
    d = regsub.DomainSpec(0.0, math.pi, 0.0, math.pi)
    s = regsub.ScaleFunction.identity(0.0, math.pi, math.pi / 2)
    grid = regsub.build_grid(d, s, regsub.SpeedMeasure.uniform(1.0), 200)
    form = regsub.assemble_form(grid, "dirichlet", "dirichlet")
    f = [math.sin(x) for x in grid.points]
    tf = regsub.SemigroupEvolver(form).evolve(f, 1.0)
    assert max(abs(a - math.exp(-0.5) * b) for a, b in zip(tf, f)) < 5e-3


def test_energy_of_coordinate():
    s = regsub.ScaleFunction.identity(0.0, 1.0, 0.5)
    grid = regsub.build_grid(unit(), s, regsub.SpeedMeasure.uniform(1.0), 50)
    form = regsub.assemble_form(grid)
    assert regsub.energy(form, grid.points, grid.points) == pytest.approx(0.5)
    assert regsub.l2m_distance([1.0, 4.0], [1.0, 1.0], [0.0, 0.0]) == pytest.approx(math.sqrt(5))


def test_mosco_increasing_family():
    s = regsub.ScaleFunction.identity(0.0, 1.0, 0.5)
    fam = regsub.single_removed_interval_family(unit(), 0.5, 0.1, [1, 2, 4, 8], "increasing")
    ok, final_max, dist = regsub.mosco_distances(fam, unit(), s, regsub.SpeedMeasure.uniform(1.0), 100, 0.5)
    assert ok
    assert final_max < 1e-2
    assert len(dist) == 4


def test_ks_and_modulus():
    stat, crit = regsub.ks_two_sample([0.1, 0.2], [0.5, 0.6, 0.7])
    assert stat == 1.0
    assert crit > 0
    s = regsub.ScaleFunction.identity(0.0, 1.0, 0.5)
    form = regsub.assemble_form(regsub.build_grid(unit(), s, regsub.SpeedMeasure.uniform(1.0), 30))
    p = regsub.modulus_statistic(form, 0.5, 1.0, 50, 7, 0.05, 0.3)
    assert 0.0 <= p <= 1.0
    assert regsub.brownian_modulus_bound(1.0, 1.0, 0.05, 10.0, 200, 3) == 0.0


def test_config_validation():
    cfg = {"domain": {"a": 0, "b": 1}, "family": {"kind": "example26", "K": 8, "n_list": [1, 2]}}
    normalized = json.loads(regsub.validate_config(json.dumps(cfg)))
    assert normalized["grid_N"] == 400
    cfg["grid_N"] = 2
    with pytest.raises(regsub.ConfigError, match="grid_N"):
        regsub.validate_config(json.dumps(cfg))


def test_run_scenario(tmp_path):
    cfg = {
        "domain": {"a": 0, "b": 1},
        "family": {"kind": "single_removed_interval", "center": 0.5, "width": 0.1, "n_list": [2, 4]},
        "direction": "decreasing",
        "grid_N": 60,
        "output_dir": str(tmp_path),
    }
    code, suites = regsub.run_scenario(json.dumps(cfg), "mosco")
    assert code in (0, 2)
    assert any(name == "mosco" for name, _, _ in suites)
    assert (tmp_path / "mosco_report.csv").exists()
    assert (tmp_path / "manifest.json").exists()
