import json

import pytest

from steklov_lab.cli import canonical_config, dispatch, main, parse_config
from steklov_lab.errors import ParseError, ValidationError
from steklov_lab.experiments import DEFAULT_TOLERANCES
from steklov_lab.geometry import Disk, Ellipse, read_mesh_text

ELLIPSE_CONFIG = {
    "domain": {"ellipse": [1.2, 0.8333333333333334]},
    "resolution": {"n_rays": 64, "n_radial": 24, "grading": 0.85},
    "schedule": [0.2, 0.1],
    "checks": ["SHRINKING_HOLE", "ISOPERIMETRIC_M", "ISOPERIMETRIC_P", "NODAL"],
    "tolerances": {"final_gap_rel": 0.05},
    "output_dir": "out",
}


def write(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return path


def test_minimal_config_gets_defaults():
    cfg = parse_config('{"domain": {"disk": 1.0}}')
    assert cfg.domain.outer == Disk(1.0)
    assert (cfg.resolution.n_rays, cfg.resolution.n_radial, cfg.resolution.grading) == (256, 64, 0.85)
    assert cfg.tolerances == DEFAULT_TOLERANCES


def test_every_violation_is_listed():
    with pytest.raises(ValidationError) as exc:
        parse_config('{"domain": {"disk": 1.0}, "schedule": [0.1, 0.2], "bogus": 1, "tolerances": {"x": 1}}')
    problems = exc.value.problems
    assert any("decreasing" in p for p in problems)
    assert any("bogus" in p for p in problems)
    assert any("'x'" in p for p in problems)


@pytest.mark.parametrize(
    "doc",
    [
        {"schedule": [0.1]},
        {"domain": {"disk": 1.0, "ellipse": [1, 1]}},
        {"domain": {"disk": 1.0, "hole_radius": 1.5}},
        {"domain": {"disk": 1.0}, "resolution": {"n_rays": 2}},
        {"domain": {"disk": 1.0}, "checks": ["NOPE"]},
        {"domain": {"disk": 1.0}, "schedule": [2.0]},
    ],
)
def test_invalid_configs(doc):
    with pytest.raises(ValidationError):
        parse_config(json.dumps(doc))


def test_parse_error_reports_position():
    with pytest.raises(ParseError, match="line 2, column"):
        parse_config('{"domain":\n  {"disk": 1.0,}}')


def test_canonical_form_round_trips():
    cfg = parse_config(json.dumps(ELLIPSE_CONFIG))
    text = canonical_config(cfg)
    again = parse_config(text)
    assert canonical_config(again) == text
    assert again.domain.outer == Ellipse(1.2, 0.8333333333333334)
    assert again.tolerances["final_gap_rel"] == 0.05


def test_star_domain_round_trips():
    doc = {"domain": {"star": {"c0": 1.0, "a": [0.1, 0.0], "b": [0.05]}, "hole_radius": 0.1}}
    cfg = parse_config(json.dumps(doc))
    assert parse_config(canonical_config(cfg)).domain == cfg.domain


def test_shell_table(tmp_path, capsys):
    path = write(tmp_path, {"domain": {"disk": 1.0}, "schedule": [0.5, 0.25], "output_dir": str(tmp_path / "new" / "dir")})
    assert main(["shell", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "r,sigma1,sigma2,dsigma2_dr"
    assert out.splitlines()[1].startswith("0.5,1.4426950408889634,1.6666666666666667,")
    assert (tmp_path / "new" / "dir" / "report.csv").read_text() == out


def test_shell_table_in_three_dimensions(capsys, tmp_path):
    cfg = parse_config(json.dumps({"domain": {"disk": 1.0}, "schedule": [0.5], "dimension": 3}), subcommand="shell")
    cfg.output_dir = tmp_path
    assert dispatch(cfg) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("0.5,1,")


def test_solve_writes_mesh_and_fields(tmp_path):
    doc = {"domain": {"ellipse": [1.2, 0.8333333333333334], "hole_radius": 0.1}, "resolution": {"n_rays": 32, "n_radial": 8}, "n_eigs": 4}
    path = write(tmp_path, doc)
    assert main(["solve", str(path), "--output-dir", str(tmp_path / "o")]) == 0
    mesh = read_mesh_text(tmp_path / "o" / "mesh.txt")
    fields = (tmp_path / "o" / "fields.txt").read_text().splitlines()
    assert fields[0] == "# vertex u1 u2 u3 u4"
    assert len(fields) == 1 + mesh.n_vertices
    rows = (tmp_path / "o" / "report.csv").read_text().splitlines()
    assert rows[0] == "index,eigenvalue,cluster,cluster_size" and len(rows) == 5


def test_mesh_subcommand(tmp_path, capsys):
    path = write(tmp_path, {"domain": {"disk": 1.0, "hole_radius": 0.5}, "resolution": {"n_rays": 8, "n_radial": 2}})
    assert main(["mesh", str(path), "--output-dir", str(tmp_path)]) == 0
    assert read_mesh_text(tmp_path / "mesh.txt").n_vertices == 24
    assert capsys.readouterr().out.splitlines()[1].startswith("24,32,8,8,")


def test_experiment_outputs_and_exit_codes(tmp_path, capsys):
    path = write(tmp_path, {**ELLIPSE_CONFIG, "output_dir": str(tmp_path / "a")})
    assert main(["experiment", str(path), "--plots", "--format", "json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["passed"]
    out = tmp_path / "a"
    for name in ("report_shrinking_hole.csv", "report_isoperimetric.csv", "summary.json", "fig_sigma_vs_r.svg", "fig_error_vs_r.svg", "run.log"):
        assert (out / name).exists()

    big = write(tmp_path, {**ELLIPSE_CONFIG, "schedule": [0.6, 0.5], "tolerances": {}, "output_dir": str(tmp_path / "b")}, "big.json")
    assert main(["experiment", str(big)]) == 2


def test_errors_exit_with_status_one(tmp_path, capsys):
    bad = write(tmp_path, "{not json")
    assert main(["experiment", str(bad)]) == 1
    assert "[cli]" in capsys.readouterr().err
    coarse = write(tmp_path, {"domain": {"disk": 1.0}, "schedule": [0.1, 0.001], "resolution": {"n_rays": 16, "n_radial": 4, "grading": 1.0}, "output_dir": str(tmp_path / "c")}, "c.json")
    assert main(["experiment", str(coarse)]) == 1
    assert "[experiments]" in capsys.readouterr().err
    assert main(["experiment", str(tmp_path / "missing.json")]) == 1
