import json
import math

import numpy as np
import pytest

from steklov_lab import shells
from steklov_lab.errors import InvalidEnclosure, InvalidSpec, ScheduleTooCoarse
from steklov_lab.experiments import (
    FAIL,
    PASS,
    AsymptoticsReport,
    ExperimentPlan,
    Resolution,
    _interpolate,
    check_schedule_resolution,
    default_corrector_schedule,
    friedrich_trial_check,
    parallel_map,
    run_corrector_check,
    run_boundary_integral_check,
    run_plan,
    run_shell_validation,
    run_shrinking_hole,
    solve_schedule,
    worker_count,
)
from steklov_lab.geometry import Disk, DomainSpec, Ellipse, build_polar_mesh

COARSE = Resolution(64, 24, 0.85)
ELLIPSE = DomainSpec(Ellipse(1.2, 5 / 6))


def test_resolution_ladder_round_trips():
    r = Resolution(64, 16, 0.7225)
    assert r.refined().coarsened() == Resolution(64, 16, pytest.approx(0.7225))
    assert r.refined().n_rays == 128 and r.refined().grading == pytest.approx(0.85)


@pytest.mark.parametrize(
    "schedule",
    [(), (0.1, 0.2), (0.1, -0.05), (0.9, 0.1)],
)
def test_invalid_plans(schedule):
    with pytest.raises(InvalidSpec):
        ExperimentPlan(ELLIPSE, schedule).validate()


def test_unknown_check_name():
    with pytest.raises(InvalidSpec):
        ExperimentPlan(ELLIPSE, (0.1,), checks=("NOPE",)).validate()


def test_schedule_too_coarse():
    with pytest.raises(ScheduleTooCoarse):
        check_schedule_resolution(ExperimentPlan(ELLIPSE, (0.1, 0.001), Resolution(32, 4, 1.0)))
    check_schedule_resolution(ExperimentPlan(ELLIPSE, (0.2, 0.1, 0.05, 0.02)))


def test_csv_formatting_and_summary():
    rep = AsymptoticsReport("t", ["a", "b", "c"], [{"a": 0.1, "b": True, "c": "x"}, {"a": 1 / 3, "b": False}])
    rep.verdicts["v"] = PASS
    assert rep.to_csv() == "a,b,c\n0.10000000000000001,true,x\n0.33333333333333331,false,\n"
    assert rep.passed
    rep.verdicts["w"] = FAIL
    assert not rep.passed
    assert json.loads(rep.to_json())["verdicts"] == {"v": PASS, "w": FAIL}


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("STEKLOV_THREADS", "3")
    assert worker_count() == 3
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_interpolation_is_exact_for_linear_fields():
    mesh = build_polar_mesh(ELLIPSE, 32, 8)
    x, y = mesh.vertices.T
    f = 1.5 * x - 0.5 * y + 2
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.5, 0.5, (50, 2))
    vals, grad = _interpolate(mesh, f, pts)
    assert np.allclose(vals, 1.5 * pts[:, 0] - 0.5 * pts[:, 1] + 2, atol=1e-12)
    assert np.allclose(grad, [1.5, -0.5], atol=1e-12)


def test_shell_validation_converges():
    ladder = [Resolution(32, 8, 0.85**4), Resolution(64, 16, 0.85**2), Resolution(128, 32, 0.85)]
    rep = run_shell_validation(ladder, shells.ShellSpec(2, 0.5, 1.0))
    assert rep.verdicts["sigma1_convergence"] == PASS
    assert rep.verdicts["sigma2_multiplicity"] == PASS
    assert rep.verdicts["nodal"] == PASS
    errs = rep.column("sigma1_rel_err")
    assert errs[0] > errs[1] > errs[2]


def test_disk_sweep_agrees_with_closed_forms_on_a_coarse_mesh():
    plan = ExperimentPlan(DomainSpec(Disk(1.0)), (0.2, 0.1), COARSE, tolerances={"eigenvalue_rel": 0.02})
    rep = run_shrinking_hole(plan)
    for key in ("disk_sigma1_closed_form", "disk_sigma2_closed_form", "disk_sigmabar1", "sigma2_gap_decreasing", "nodal"):
        assert rep.verdicts[key] == PASS
    assert rep.globals["c_omega0"] == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_large_holes_fail_the_final_gap():
    plan = ExperimentPlan(DomainSpec(Disk(1.0)), (0.6, 0.5), COARSE)
    assert run_shrinking_hole(plan).verdicts["sigma2_gap_final"] == FAIL


def test_schedule_solution_is_reused():
    plan = ExperimentPlan(ELLIPSE, (0.2, 0.1), COARSE)
    sol = solve_schedule(plan)
    assert len(sol.per_radius) == 2
    assert sol.steklov.mesh.hole_radius == 0
    assert [m.mesh.hole_radius for m in sol.per_radius] == [0.2, 0.1]


def test_boundary_integral_on_the_disk_is_exact():
    rep = run_boundary_integral_check(DomainSpec(Disk(1.3)), (0.2, 0.1))
    assert max(rep.column("abs_error")) < 1e-12
    assert rep.verdicts["boundary_integral_monotone_error"] == PASS


def test_boundary_integral_rejects_small_enclosures():
    with pytest.raises(InvalidEnclosure):
        run_boundary_integral_check(ELLIPSE, (0.1,), enclosure_factor=1.0)


def test_corrector_report():
    rep = run_corrector_check([c for c in default_corrector_schedule() if c.n == 2], 3.0)
    assert all(v == PASS for v in rep.verdicts.values())
    assert rep.column("gradL2_sq") == pytest.approx(rep.column("gradL2_sq_exact"), abs=1e-10)


def test_friedrich_trial_check_detects_too_small_constants():
    mesh = build_polar_mesh(ELLIPSE.with_hole(0.1), 32, 8)
    assert not friedrich_trial_check(mesh, 1e-3, trials=5)


def test_run_plan_rejects_shell_validation_off_the_disk():
    with pytest.raises(InvalidSpec):
        run_plan(ExperimentPlan(ELLIPSE, (0.1,), COARSE, checks=("SHELL_VALIDATION",)))
