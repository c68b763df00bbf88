"""Command-line front end.

    steklov-lab {mesh,shell,solve,experiment} CONFIG [--format csv|json] [--plots]

CONFIG is a JSON object with keys ``domain``, ``resolution``, ``schedule``,
``checks``, ``tolerances``, ``output_dir`` and optionally ``n_eigs`` and
``dimension``. Exit status is 0 when every verdict passes, 2 when any
verdict fails and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import shells
from .eigensolve import SpectralResult, solve_steklov, solve_steklov_dirichlet
from .errors import InvalidSpec, ParseError, SteklovError, ValidationError
from .experiments import (
    CHECKS,
    DEFAULT_TOLERANCES,
    AsymptoticsReport,
    ExperimentPlan,
    Resolution,
    run_plan,
)
from .geometry import (
    Disk,
    DomainSpec,
    Ellipse,
    Marker,
    Mesh,
    StarShaped,
    area,
    min_boundary_radius,
    perimeter,
    write_mesh_text,
)

SUBCOMMANDS = ("mesh", "shell", "solve", "experiment")
CONFIG_KEYS = {"domain", "resolution", "schedule", "checks", "tolerances", "output_dir", "n_eigs", "dimension"}
DEFAULT_SCHEDULE = (0.2, 0.1, 0.05, 0.02)
DEFAULT_CHECKS = ExperimentPlan.__dataclass_fields__["checks"].default
DEFAULT_OUTPUT_DIR = "steklov_out"

log = logging.getLogger("steklov_lab")


@dataclass
class RunConfig:
    domain: DomainSpec
    resolution: Resolution = Resolution()
    schedule: tuple[float, ...] = DEFAULT_SCHEDULE
    checks: tuple[str, ...] = DEFAULT_CHECKS
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR).resolve()
    n_eigs: int = 8
    dimension: int = 2
    subcommand: str = "experiment"
    config_path: Path | None = None
    format: str = "csv"
    plots: bool = False
    seedless: bool = True

    def plan(self) -> ExperimentPlan:
        return ExperimentPlan(self.domain, self.schedule, self.resolution, self.checks, dict(self.tolerances))


# ---------------------------------------------------------------- domain (de)serialization


def domain_to_dict(spec: DomainSpec) -> dict[str, Any]:
    o = spec.outer
    if isinstance(o, Disk):
        out: dict[str, Any] = {"disk": o.R}
    elif isinstance(o, Ellipse):
        out = {"ellipse": [o.a, o.b]}
    elif isinstance(o, StarShaped):
        out = {"star": {"c0": o.c0, "a": list(o.a), "b": list(o.b)}}
    else:
        raise InvalidSpec(f"cannot serialize outer boundary {o!r}")
    out["hole_radius"] = spec.hole_radius
    return out


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _domain_from_dict(d: Any, problems: list[str]) -> DomainSpec | None:
    if not isinstance(d, dict):
        problems.append("domain: expected an object")
        return None
    unknown = set(d) - {"disk", "ellipse", "star", "hole_radius"}
    if unknown:
        problems.append(f"domain: unknown keys {sorted(unknown)}")
    shapes = [k for k in ("disk", "ellipse", "star") if k in d]
    if len(shapes) != 1:
        problems.append("domain: exactly one of disk, ellipse, star is required")
        return None
    hole = d.get("hole_radius", 0.0)
    if not _is_number(hole) or hole < 0:
        problems.append("domain.hole_radius: expected a number >= 0")
        return None
    kind, value = shapes[0], d[shapes[0]]
    if kind == "disk":
        if not _is_number(value) or value <= 0:
            problems.append("domain.disk: expected a positive radius")
            return None
        outer = Disk(float(value))
    elif kind == "ellipse":
        if not (isinstance(value, list) and len(value) == 2 and all(_is_number(v) and v > 0 for v in value)):
            problems.append("domain.ellipse: expected [a, b] with positive semi-axes")
            return None
        outer = Ellipse(float(value[0]), float(value[1]))
    else:
        if not isinstance(value, dict) or set(value) - {"c0", "a", "b"} or "c0" not in value:
            problems.append("domain.star: expected {c0, a, b}")
            return None
        coeffs = [value.get("a", []), value.get("b", [])]
        if not _is_number(value["c0"]) or not all(isinstance(c, list) and all(_is_number(v) for v in c) for c in coeffs):
            problems.append("domain.star: c0 must be a number, a and b lists of numbers")
            return None
        outer = StarShaped(float(value["c0"]), tuple(coeffs[0]), tuple(coeffs[1]))
    spec = DomainSpec(outer, float(hole))
    try:
        spec.validate()
    except InvalidSpec as exc:
        problems.append(f"domain: {exc.args[0]}")
        return None
    return spec


# ---------------------------------------------------------------- config


def parse_config(text: str, *, subcommand: str = "experiment", config_path: str | Path | None = None) -> RunConfig:
    """Parse and validate a JSON config, filling defaults.

    Raises ParseError for malformed JSON and ValidationError listing every
    problem found in a well-formed document.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError("line 1, column 1: top level must be an object")

    problems: list[str] = []
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        problems.append(f"unknown keys {sorted(unknown)}")
    if subcommand not in SUBCOMMANDS:
        problems.append(f"unknown subcommand {subcommand!r}")
    if "domain" not in raw:
        problems.append("domain: required")
        domain = None
    else:
        domain = _domain_from_dict(raw["domain"], problems)

    res = raw.get("resolution", {})
    resolution = Resolution()
    if not isinstance(res, dict):
        problems.append("resolution: expected an object")
    else:
        bad = set(res) - {"n_rays", "n_radial", "grading"}
        if bad:
            problems.append(f"resolution: unknown keys {sorted(bad)}")
        n_rays = res.get("n_rays", resolution.n_rays)
        n_radial = res.get("n_radial", resolution.n_radial)
        grading = res.get("grading", resolution.grading)
        if not (isinstance(n_rays, int) and not isinstance(n_rays, bool) and n_rays >= 3):
            problems.append("resolution.n_rays: expected an integer >= 3")
        if not (isinstance(n_radial, int) and not isinstance(n_radial, bool) and n_radial >= 1):
            problems.append("resolution.n_radial: expected an integer >= 1")
        if not (_is_number(grading) and 0 < grading <= 1):
            problems.append("resolution.grading: expected a number in (0, 1]")
        if not any(p.startswith("resolution.") for p in problems):
            resolution = Resolution(n_rays, n_radial, float(grading))

    schedule = raw.get("schedule", list(DEFAULT_SCHEDULE))
    if not (isinstance(schedule, list) and schedule and all(_is_number(r) for r in schedule)):
        problems.append("schedule: expected a non-empty list of numbers")
        schedule = list(DEFAULT_SCHEDULE)
    else:
        if any(r <= 0 for r in schedule):
            problems.append("schedule: radii must be positive")
        if any(b >= a for a, b in zip(schedule, schedule[1:])):
            problems.append("schedule: radii must be strictly decreasing")
        if domain is not None and max(schedule) >= min_boundary_radius(domain):
            problems.append(f"schedule: radius {max(schedule)} does not fit inside the domain")

    checks = raw.get("checks", list(DEFAULT_CHECKS))
    if not (isinstance(checks, list) and all(isinstance(c, str) for c in checks)):
        problems.append("checks: expected a list of names")
        checks = list(DEFAULT_CHECKS)
    elif set(checks) - set(CHECKS):
        problems.append(f"checks: unknown names {sorted(set(checks) - set(CHECKS))}")
    elif len(set(checks)) != len(checks):
        problems.append("checks: duplicate names")

    tolerances = dict(DEFAULT_TOLERANCES)
    tol_raw = raw.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        problems.append("tolerances: expected an object")
    else:
        for key, value in tol_raw.items():
            if key not in DEFAULT_TOLERANCES:
                problems.append(f"tolerances: unknown key {key!r}")
            elif not (_is_number(value) and value > 0):
                problems.append(f"tolerances.{key}: expected a positive number")
            else:
                tolerances[key] = float(value)

    out = raw.get("output_dir", DEFAULT_OUTPUT_DIR)
    if not isinstance(out, str) or not out:
        problems.append("output_dir: expected a path string")
        out = DEFAULT_OUTPUT_DIR
    n_eigs = raw.get("n_eigs", 8)
    if not (isinstance(n_eigs, int) and not isinstance(n_eigs, bool) and 1 <= n_eigs <= 64):
        problems.append("n_eigs: expected an integer in [1, 64]")
    dimension = raw.get("dimension", 2)
    if not (isinstance(dimension, int) and not isinstance(dimension, bool) and dimension >= 2):
        problems.append("dimension: expected an integer >= 2")
    elif dimension != 2 and subcommand != "shell":
        problems.append("dimension: only the shell subcommand supports n != 2")
    if subcommand == "shell" and domain is not None and not isinstance(domain.outer, Disk):
        problems.append("shell: the domain must be a disk (its radius is the outer shell radius)")

    if problems:
        raise ValidationError(problems)
    return RunConfig(
        domain=domain,
        resolution=resolution,
        schedule=tuple(float(r) for r in schedule),
        checks=tuple(checks),
        tolerances=tolerances,
        output_dir=Path(out).expanduser().resolve(),
        n_eigs=n_eigs,
        dimension=dimension,
        subcommand=subcommand,
        config_path=Path(config_path).resolve() if config_path else None,
    )


def canonical_config(cfg: RunConfig) -> str:
    """Fully expanded config with sorted keys; parsing it gives back ``cfg``."""
    doc = {
        "domain": domain_to_dict(cfg.domain),
        "resolution": {"n_rays": cfg.resolution.n_rays, "n_radial": cfg.resolution.n_radial, "grading": cfg.resolution.grading},
        "schedule": list(cfg.schedule),
        "checks": list(cfg.checks),
        "tolerances": dict(cfg.tolerances),
        "output_dir": str(cfg.output_dir),
        "n_eigs": cfg.n_eigs,
        "dimension": cfg.dimension,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- subcommands


def write_field_text(mesh: Mesh, fields: np.ndarray, names: list[str], path: str | Path) -> None:
    """One line per vertex: ``index value_1 ... value_k`` (vertex order of the mesh file)."""
    lines = ["# vertex " + " ".join(names)]
    for i in range(mesh.n_vertices):
        lines.append(f"{i} " + " ".join(f"{float(v) + 0.0:.17g}" for v in fields[:, i]))
    Path(path).write_text("\n".join(lines) + "\n")


def shell_table(cfg: RunConfig) -> AsymptoticsReport:
    R = cfg.domain.outer.R
    rows = []
    for r in cfg.schedule:
        s = shells.ShellSpec(cfg.dimension, r, R)
        rows.append(
            {
                "r": r,
                "sigma1": shells.sigma1_shell(s),
                "sigma2": shells.sigma2_shell(s),
                "dsigma2_dr": shells.sigma2_shell_derivative(s),
            }
        )
    report = AsymptoticsReport("shell_table", ["r", "sigma1", "sigma2", "dsigma2_dr"], rows)
    report.globals.update({"n": cfg.dimension, "R": R})
    return report


def _mesh_report(mesh: Mesh) -> AsymptoticsReport:
    row = {
        "n_vertices": mesh.n_vertices,
        "n_triangles": len(mesh.triangles),
        "n_outer_edges": len(mesh.marked_edges(Marker.OUTER)),
        "n_inner_edges": len(mesh.marked_edges(Marker.INNER)),
        "area": area(mesh),
        "outer_perimeter": perimeter(mesh, Marker.OUTER),
    }
    return AsymptoticsReport("mesh", list(row), [row])


def _spectrum_report(result: SpectralResult) -> AsymptoticsReport:
    rows = []
    for c, cluster in enumerate(result.clusters):
        for i in cluster:
            rows.append({"index": i + 1, "eigenvalue": result.eigenvalues[i], "cluster": c, "cluster_size": len(cluster)})
    report = AsymptoticsReport("spectrum", ["index", "eigenvalue", "cluster", "cluster_size"], rows)
    report.globals["mode"] = result.mode.value
    return report


def _write_reports(cfg: RunConfig, reports: list[AsymptoticsReport]) -> None:
    out = cfg.output_dir
    if len(reports) == 1:
        (out / "report.csv").write_text(reports[0].to_csv())
    else:
        for rep in reports:
            (out / f"report_{rep.name}.csv").write_text(rep.to_csv())
    summary = {
        "passed": all(rep.passed for rep in reports),
        "reports": [rep.summary() for rep in reports],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if cfg.plots:
        from .plotting import plot_report

        for rep in reports:
            for path in plot_report(rep, out):
                log.info("wrote %s", path.name)


def _emit(cfg: RunConfig, reports: list[AsymptoticsReport], stream) -> None:
    if cfg.format == "json":
        stream.write((cfg.output_dir / "summary.json").read_text())
        return
    for k, rep in enumerate(reports):
        if len(reports) > 1:
            stream.write(("\n" if k else "") + f"# {rep.name}\n")
        stream.write(rep.to_csv())


def _run(cfg: RunConfig) -> list[AsymptoticsReport]:
    if cfg.subcommand == "mesh":
        mesh = cfg.resolution.mesh(cfg.domain)
        write_mesh_text(mesh, cfg.output_dir / "mesh.txt")
        return [_mesh_report(mesh)]
    if cfg.subcommand == "shell":
        return [shell_table(cfg)]
    if cfg.subcommand == "solve":
        mesh = cfg.resolution.mesh(cfg.domain)
        if cfg.domain.hole_radius > 0:
            result = solve_steklov_dirichlet(mesh, cfg.n_eigs)
        else:
            result = solve_steklov(mesh, cfg.n_eigs)
        write_mesh_text(mesh, cfg.output_dir / "mesh.txt")
        names = [f"u{i + 1}" for i in range(len(result.eigenvalues))]
        write_field_text(mesh, result.eigenfields, names, cfg.output_dir / "fields.txt")
        return [_spectrum_report(result)]
    return run_plan(cfg.plan())


def dispatch(cfg: RunConfig, stream=None) -> int:
    """Run the configured subcommand; 0 if all verdicts pass, 2 otherwise."""
    stream = stream or sys.stdout
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(cfg.output_dir / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    try:
        (cfg.output_dir / "config.json").write_text(canonical_config(cfg))
        log.info("start %s", cfg.subcommand)
        reports = _run(cfg)
        _write_reports(cfg, reports)
        _emit(cfg, reports, stream)
        ok = all(rep.passed for rep in reports)
        log.info("done: %s", "all verdicts pass" if ok else "some verdicts fail")
        return 0 if ok else 2
    finally:
        log.removeHandler(handler)
        handler.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steklov-lab", description="Steklov and Steklov-Dirichlet eigenvalue lab.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("config", type=Path, help="JSON config file")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="what to print on stdout")
    parser.add_argument("--plots", action="store_true", help="also write SVG charts")
    parser.add_argument("--seedless", action="store_true", help="accepted for compatibility; runs are always deterministic")
    parser.add_argument("--output-dir", type=Path, help="override output_dir from the config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text()
        cfg = parse_config(text, subcommand=args.subcommand, config_path=args.config)
        if args.output_dir is not None:
            cfg.output_dir = args.output_dir.expanduser().resolve()
        cfg.format = args.format
        cfg.plots = args.plots
        return dispatch(cfg)
    except SteklovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: [cli] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
