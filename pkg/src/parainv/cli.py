"""Scenario runner.

``parainv run <cfg>`` solves one scenario and writes ``<name>_trajectory.csv``
plus ``<name>_summary.json``; ``parainv validate <cfg>`` checks the schema
only; ``parainv list`` names the shipped scenarios.

A scenario is an INI file with the sections ``scenario``, ``space``,
``form``, ``rhs``, ``set``, ``initial``, ``grid``, ``checks`` and
``tolerances``. Unknown keys, keys that do not apply to the chosen mode or
kind, and out-of-range values are rejected with the offending
``section.key`` path. Exit codes: 0 when every requested check passes, 1
when one fails (the summary is still written), 2 for schema or input
errors.
"""

import argparse
import configparser
import json
import math
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .convex import Ball, Box, HalfSpace, NonnegCone, whole_space
from .exceptions import ParainvError, ValidationError
from .form import diffusion_form, matrix_form
from .invariance import (check_criterion_along, check_pointwise_criterion,
                         distance_monitor, ftc_identity_check)
from .lions import (ThetaStepper, TimeGrid, estimate_solution_norm, mr_norm,
                    solve_linear)
from .necessity import invariance_sampling_test, restart_probe
from .semilinear import (lipschitz_of_clamped, make_plan, scalar_nonlinearity,
                         solve_semilinear)
from .space import build_interval_space, matrix_space, row_quadratic

__all__ = ["SchemaError", "load_scenario", "run_scenario", "shipped_scenarios", "main"]

CHECKS = ("criterion", "pointwise", "distance", "ftc", "probe", "sampling")
EXIT_OK, EXIT_FAIL, EXIT_SCHEMA = 0, 1, 2


class SchemaError(ValidationError):
    """Scenario file violates the schema; ``path`` is ``section.key``."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


# --- value parsers -----------------------------------------------------------

def _float(text):
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("expected an integer")
    return int(value)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _vector(text):
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("empty vector")
    return np.array([_float(p) for p in parts])


def _matrix(text):
    rows = [_vector(r) for r in text.split(";") if r.strip()]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError("expected a square matrix written as 'a b; c d'")
    return np.array(rows)


def _name(text):
    text = text.strip()
    if not text or not all(c.isalnum() or c in "_-" for c in text):
        raise ValueError("use letters, digits, '_' and '-' only")
    return text


def _choice(*options):
    def parse(text):
        text = text.strip().lower()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _check_list(text):
    names = text.replace(",", " ").split()
    for n in names:
        if n not in CHECKS:
            raise ValueError(f"unknown check {n!r}; known: {', '.join(CHECKS)}")
    return list(dict.fromkeys(names))


REQUIRED = object()


@dataclass(frozen=True)
class Field:
    parse: object
    default: object = REQUIRED
    mode: str = None  # only valid in this mode
    when: tuple = None  # (key in same section, allowed values)
    check: object = None  # (predicate, message)


def _positive(x):
    return x > 0


SCHEMA = {
    "scenario": {
        "name": Field(_name),
        "mode": Field(_choice("fem", "matrix")),
        "seed": Field(_int, check=(lambda x: x >= 0, "must be nonnegative")),
        "description": Field(str, ""),
    },
    "space": {
        "cells": Field(_int, mode="fem", check=(lambda x: x >= 2, "must be at least 2")),
        "bc": Field(_choice("dirichlet", "neumann"), "dirichlet", mode="fem"),
        "lumped": Field(_bool, False, mode="fem"),
        "h_gram": Field(_matrix, mode="matrix"),
        "v_gram": Field(_matrix, mode="matrix"),
    },
    "form": {
        "coefficient": Field(_choice("constant", "affine_x", "sinusoidal"), "constant",
                             mode="fem"),
        "value": Field(_float, 1.0, mode="fem"),
        "slope": Field(_float, 0.0, mode="fem",
                       when=("coefficient", {"affine_x", "sinusoidal"})),
        "amplitude": Field(_float, 0.0, mode="fem", when=("coefficient", {"sinusoidal"})),
        "frequency": Field(_float, 1.0, mode="fem", when=("coefficient", {"sinusoidal"})),
        "phase": Field(_float, 0.0, mode="fem", when=("coefficient", {"sinusoidal"})),
        "operator": Field(_matrix, mode="matrix"),
        "growth": Field(_float, 0.0, mode="matrix"),
    },
    "rhs": {
        "kind": Field(_choice("none", "source", "semilinear"), "none"),
        "value": Field(_float, 0.0, when=("kind", {"source"})),
        "nonlinearity": Field(_choice("logistic"), "logistic", when=("kind", {"semilinear"})),
        "rate": Field(_float, 1.0, when=("kind", {"semilinear"})),
        "projected": Field(_bool, True, when=("kind", {"semilinear"})),
    },
    "set": {
        "kind": Field(_choice("box", "cone", "ball", "halfspace", "whole")),
        "lo": Field(_float, 0.0, when=("kind", {"box"})),
        "hi": Field(_float, 1.0, when=("kind", {"box"})),
        "center": Field(_vector, None, when=("kind", {"ball"})),
        "radius": Field(_float, 1.0, when=("kind", {"ball"}),
                        check=(_positive, "must be positive")),
        "normal": Field(_vector, when=("kind", {"halfspace"})),
        "offset": Field(_float, 0.0, when=("kind", {"halfspace"})),
    },
    "initial": {
        "kind": Field(_choice("sine", "constant", "uniform", "vector")),
        "amplitude": Field(_float, 1.0, when=("kind", {"sine"})),
        "value": Field(_float, 0.0, when=("kind", {"constant"})),
        "lo": Field(_float, 0.0, when=("kind", {"uniform"})),
        "hi": Field(_float, 1.0, when=("kind", {"uniform"})),
        "vector": Field(_vector, when=("kind", {"vector"})),
    },
    "grid": {
        "a": Field(_float, 0.0),
        "b": Field(_float, 1.0),
        "steps": Field(_int, check=(lambda x: x >= 1, "must be at least 1")),
        "theta": Field(_float, 1.0, check=(lambda x: 0.5 <= x <= 1.0, "must lie in [0.5, 1]")),
    },
    "checks": {
        "run": Field(_check_list, []),
        "probe_n": Field(_int, 4, check=(lambda x: x >= 1, "must be at least 1")),
        "sampling_starts": Field(_int, 8, check=(lambda x: x >= 1, "must be at least 1")),
        "pointwise_random": Field(_int, 100, check=(lambda x: x >= 0, "must be nonnegative")),
    },
    "tolerances": {
        "criterion": Field(_float, 1e-9, check=(lambda x: x >= 0, "must be nonnegative")),
        "pointwise": Field(_float, 1e-12, check=(lambda x: x >= 0, "must be nonnegative")),
        "distance_slack": Field(_float, 10.0, check=(lambda x: x >= 0, "must be nonnegative")),
        "sampling": Field(_float, None, check=(lambda x: x >= 0, "must be nonnegative")),
        "probe_slack": Field(_float, 10.0, check=(lambda x: x >= 0, "must be nonnegative")),
        "ftc": Field(_float, 10.0, check=(lambda x: x >= 0, "must be nonnegative")),
    },
}
OPTIONAL_SECTIONS = {"rhs", "checks", "tolerances"}


def _read_section(section, raw, mode):
    fields = SCHEMA[section]
    for key in raw:
        if key not in fields:
            raise SchemaError(f"{section}.{key}", "unknown key")
    out = {}
    # keys without a 'when' first, so selectors such as 'kind' are known
    for key, fld in sorted(fields.items(), key=lambda kv: kv[1].when is not None):
        path = f"{section}.{key}"
        applies = fld.mode is None or fld.mode == mode
        if applies and fld.when is not None:
            applies = out.get(fld.when[0]) in fld.when[1]
        if not applies:
            if key in raw:
                raise SchemaError(path, "not used by this mode or kind")
            continue
        if key not in raw:
            if fld.default is REQUIRED:
                raise SchemaError(path, "missing required key")
            out[key] = fld.default
            continue
        try:
            value = fld.parse(raw[key])
        except (ValueError, TypeError) as exc:
            raise SchemaError(path, str(exc)) from None
        if fld.check is not None and not fld.check[0](value):
            raise SchemaError(path, fld.check[1])
        out[key] = value
    return out


def _cross_check(cfg):
    mode = cfg["scenario"]["mode"]
    grid = cfg["grid"]
    if not grid["a"] < grid["b"]:
        raise SchemaError("grid.b", "must exceed grid.a")
    if mode == "fem":
        n, bc = cfg["space"]["cells"], cfg["space"]["bc"]
        dim = n - 1 if bc == "dirichlet" else n + 1
        diagonal = cfg["space"]["lumped"]
    else:
        h, v = cfg["space"]["h_gram"], cfg["space"]["v_gram"]
        if h.shape != v.shape:
            raise SchemaError("space.v_gram", "shape differs from space.h_gram")
        if cfg["form"]["operator"].shape != h.shape:
            raise SchemaError("form.operator", "shape differs from space.h_gram")
        dim = h.shape[0]
        diagonal = not np.any(h - np.diag(np.diag(h)))
    cset = cfg["set"]
    if cset["kind"] in ("box", "cone") and not diagonal:
        where = "space.lumped" if mode == "fem" else "space.h_gram"
        raise SchemaError(where, f"a {cset['kind']} set needs a diagonal (lumped) H-Gram matrix")
    if cset["kind"] == "box" and cset["lo"] > cset["hi"]:
        raise SchemaError("set.hi", "must be at least set.lo")
    for key in ("center", "normal"):
        vec = cset.get(key)
        if vec is not None and vec.size not in (1, dim):
            raise SchemaError(f"set.{key}", f"needs 1 or {dim} entries")
    init = cfg["initial"]
    if init["kind"] == "vector" and init["vector"].size != dim:
        raise SchemaError("initial.vector", f"needs {dim} entries")
    if init["kind"] == "sine" and mode != "fem":
        raise SchemaError("initial.kind", "sine needs fem mode")
    if init["kind"] == "uniform" and init["lo"] > init["hi"]:
        raise SchemaError("initial.hi", "must be at least initial.lo")
    rhs = cfg["rhs"]
    if rhs["kind"] == "semilinear":
        if not rhs["projected"]:
            raise SchemaError("rhs.projected", "the logistic term is only Lipschitz "
                                               "after clamping; use projected = true")
        if cset["kind"] != "box":
            raise SchemaError("set.kind", "a projected nonlinearity needs a box set")
    checks = cfg["checks"]
    if "probe" in checks["run"] and grid["steps"] % checks["probe_n"]:
        raise SchemaError("checks.probe_n", "must divide grid.steps")
    return cfg


def parse_config_text(text, source="<string>"):
    """Parse and validate scenario text; returns a nested dict of typed values."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise SchemaError("<file>", str(exc).splitlines()[0]) from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise SchemaError(section, "unknown section")
    for section in SCHEMA:
        if section not in parser and section not in OPTIONAL_SECTIONS:
            raise SchemaError(section, "missing section")
    cfg = {"scenario": _read_section("scenario", dict(parser["scenario"]), None)}
    mode = cfg["scenario"]["mode"]
    for section in SCHEMA:
        if section == "scenario":
            continue
        raw = dict(parser[section]) if section in parser else {}
        cfg[section] = _read_section(section, raw, mode)
    return _cross_check(cfg)


def shipped_scenarios():
    """``{name: path}`` of the scenario files bundled with the package."""
    root = resources.files("parainv").joinpath("scenarios")
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".cfg")}


def resolve_path(ref):
    path = Path(ref)
    if path.is_file():
        return path
    shipped = shipped_scenarios()
    if ref in shipped:
        return shipped[ref]
    raise SchemaError("<file>", f"no such scenario file or shipped name: {ref}")


def load_scenario(ref):
    """Read and validate a scenario file (or a shipped scenario name)."""
    path = resolve_path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError("<file>", str(exc)) from None
    return parse_config_text(text, str(path))


# --- building objects ----------------------------------------------------------

def _coefficient(form_cfg):
    kind, c0 = form_cfg["coefficient"], form_cfg["value"]
    if kind == "constant":
        return c0
    slope = form_cfg["slope"]
    if kind == "affine_x":
        return lambda t, x: c0 + slope * x
    amp, freq, phase = form_cfg["amplitude"], form_cfg["frequency"], form_cfg["phase"]
    return lambda t, x: c0 + amp * np.sin(2 * np.pi * freq * t + phase) * (1.0 + slope * x)


def build_problem(cfg):
    """Space, form, right-hand side, set, initial value and grid of a scenario."""
    mode = cfg["scenario"]["mode"]
    scfg, fcfg = cfg["space"], cfg["form"]
    grid_cfg = cfg["grid"]
    interval = (grid_cfg["a"], grid_cfg["b"])
    if mode == "fem":
        space = build_interval_space(scfg["cells"], scfg["bc"], scfg["lumped"])
        form = diffusion_form(space, _coefficient(fcfg), interval)
    else:
        space = matrix_space(scfg["h_gram"], scfg["v_gram"])
        op, growth = fcfg["operator"], fcfg["growth"]
        operator = op if growth == 0.0 else (lambda t: (1.0 + growth * t) * op)
        form = matrix_form(space, operator, interval)

    cset = cfg["set"]
    kind = cset["kind"]
    if kind == "box":
        convex = Box(space, cset["lo"], cset["hi"])
    elif kind == "cone":
        convex = NonnegCone(space)
    elif kind == "ball":
        center = None if cset["center"] is None else np.broadcast_to(
            cset["center"], (space.dim,))
        convex = Ball(space, center, cset["radius"])
    elif kind == "halfspace":
        convex = HalfSpace(space, np.broadcast_to(cset["normal"], (space.dim,)),
                           cset["offset"])
    else:
        convex = whole_space(space)

    rcfg = cfg["rhs"]
    rhs = None
    if rcfg["kind"] == "source":
        g = space.embed(np.full(space.dim, rcfg["value"]))
        rhs = lambda t: g  # noqa: E731
    elif rcfg["kind"] == "semilinear":
        rate = rcfg["rate"]
        fn = lambda u: rate * u * (1.0 - u)  # noqa: E731
        L = lipschitz_of_clamped(fn, cset["lo"], cset["hi"], space)
        rhs = scalar_nonlinearity(space, fn, L, projected=True,
                                  sample_range=(cset["lo"] - 1.0, cset["hi"] + 1.0),
                                  name="logistic")

    icfg = cfg["initial"]
    rng = np.random.default_rng(cfg["scenario"]["seed"])
    if icfg["kind"] == "sine":
        u0 = space.interpolate(lambda x: icfg["amplitude"] * np.sin(np.pi * x))
    elif icfg["kind"] == "constant":
        u0 = np.full(space.dim, icfg["value"])
    elif icfg["kind"] == "uniform":
        u0 = rng.uniform(icfg["lo"], icfg["hi"], space.dim)
    else:
        u0 = icfg["vector"].copy()

    grid = TimeGrid(grid_cfg["a"], grid_cfg["b"], grid_cfg["steps"])
    return space, form, rhs, convex, u0, grid


# --- running ----------------------------------------------------------------------

def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj) + 0.0  # drops the sign of -0.0
        return value if math.isfinite(value) else None
    return obj


def _write_csv(path, traj, distances, margins):
    states = traj.states
    h_norms = np.sqrt(np.maximum(row_quadratic(states, traj.space.h_gram), 0.0))
    cols = np.column_stack([traj.times, distances, margins, states.min(axis=1),
                            states.max(axis=1), h_norms])
    with open(path, "w", newline="\n") as fh:
        fh.write("t,distance,margin,min_nodal,max_nodal,h_norm\n")
        for row in cols:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _reference_error(cfg, space, traj):
    """Max nodal error against the decaying sine mode, when the scenario has one."""
    fcfg, icfg = cfg["form"], cfg["initial"]
    if (cfg["scenario"]["mode"] != "fem" or fcfg["coefficient"] != "constant"
            or icfg["kind"] != "sine" or cfg["rhs"]["kind"] != "none"
            or cfg["space"]["bc"] != "dirichlet"):
        return None
    t = traj.grid.b - traj.grid.a
    exact = icfg["amplitude"] * np.exp(-fcfg["value"] * np.pi ** 2 * t) * np.sin(np.pi * space.x)
    return float(np.abs(traj.final - exact).max())


def run_scenario(cfg, out_dir=".", seed_override=None, tol_scale=1.0):
    """Solve a validated scenario, run its checks and write the artifacts.

    Returns
    -------
    (int, dict)
        Exit status and the summary (``None`` when no checks were requested).
    """
    if not tol_scale > 0:
        raise SchemaError("--tol-scale", "must be positive")
    if seed_override is not None:
        cfg = {**cfg, "scenario": {**cfg["scenario"], "seed": int(seed_override)}}
    seed = cfg["scenario"]["seed"]
    name = cfg["scenario"]["name"]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    clock = time.perf_counter()

    space, form, rhs, convex, u0, grid = build_problem(cfg)
    theta = cfg["grid"]["theta"]
    tols = {k: (v * tol_scale if v is not None else None)
            for k, v in cfg["tolerances"].items()}
    constants = form.constants
    stepper = ThetaStepper(form, grid, theta)
    plan = None
    if rhs is not None and getattr(rhs, "state_dependent", False):
        plan = make_plan(form, rhs, grid, theta=theta, seed=seed)
        sol = solve_semilinear(form, rhs, u0, grid, plan, theta, convex,
                               stepper=stepper)
        traj = sol.trajectory
    else:
        traj = solve_linear(form, rhs, u0, grid, theta, stepper=stepper)
    timings["solve"] = time.perf_counter() - clock

    along = check_criterion_along(form, rhs, traj, convex, tols["criterion"])
    _write_csv(out / f"{name}_trajectory.csv", traj, along.distances, along.margins)
    requested = cfg["checks"]["run"]
    if not requested:
        return EXIT_OK, None

    results = {}
    for check in requested:
        clock = time.perf_counter()
        if check == "criterion":
            results[check] = {
                "passed": along.holds,
                "worst_margin": along.worst_margin,
                "first_failure": along.first_failure,
                "violation_density": along.violation_density,
                "tol": along.tol,
            }
        elif check == "pointwise":
            rep = check_pointwise_criterion(form, rhs, convex, tol=tols["pointwise"],
                                            n_random=cfg["checks"]["pointwise_random"],
                                            seed=seed)
            worst, t_worst, sample = rep.worst
            results[check] = {"passed": rep.holds, "worst_margin": worst,
                              "worst_time": t_worst, "worst_sample": sample,
                              "samples": int(rep.samples.shape[0]),
                              "times": int(rep.times.size), "tol": rep.tol}
        elif check == "distance":
            rep = distance_monitor(traj, convex, constants.omega_stab,
                                   c_slack=tols["distance_slack"])
            results[check] = {"passed": rep.holds, "max_excess": rep.max_excess,
                              "d0": rep.d0, "slack": rep.slack,
                              "max_distance": float(rep.distances.max()),
                              "final_distance": float(rep.distances[-1])}
        elif check == "ftc":
            residual = ftc_identity_check(traj, convex)
            tol = tols["ftc"] * grid.tau * (1.0 + mr_norm(traj) ** 2)
            results[check] = {"passed": residual <= tol, "residual": residual, "tol": tol}
        elif check == "probe":
            rep = restart_probe(form, rhs, convex, traj, cfg["checks"]["probe_n"], theta,
                                plan, slack=tols["probe_slack"])
            results[check] = {"passed": rep.necessity_consistent, "n": rep.n,
                              "max_integral": rep.max_integral, "tol_int": rep.tol_int,
                              "min_dominance": rep.min_dominance,
                              "max_restart_deviation": rep.max_restart_deviation,
                              "l2_deviation": rep.l2_deviation}
        elif check == "sampling":
            starts = [(0, u0)] if convex.contains(u0, 1e-12)[0] else []
            tol = tols["sampling"]
            if tol is None:
                tol = 10.0 * grid.tau * tol_scale
            rep = invariance_sampling_test(form, rhs, convex, cfg["checks"]["sampling_starts"],
                                           grid, theta, seed, tol, plan, starts)
            results[check] = {"passed": rep.passed, "worst_violation": rep.worst_violation,
                              "tol": rep.tol, "starts": len(rep.starts)}
        timings[check] = time.perf_counter() - clock

    q = plan.q if plan is not None else math.inf
    c_a = plan.c_a if plan is not None else estimate_solution_norm(form, grid, theta=theta,
                                                                    seed=seed)
    states = traj.states
    summary = {
        "scenario": name,
        "seed": seed,
        "tol_scale": tol_scale,
        "grid": {"a": grid.a, "b": grid.b, "steps": grid.steps, "tau": grid.tau,
                 "theta": theta},
        "constants": {"M": constants.m_bound, "alpha": constants.alpha,
                      "omega_ell": constants.omega_ell, "omega_stab": constants.omega_stab,
                      "c_a": c_a, "q": q},
        "checks": results,
        "worst_margins": {k: results[k]["worst_margin"] for k in ("criterion", "pointwise")
                          if k in results},
        "trajectory": {"min_nodal": float(states.min()), "max_nodal": float(states.max()),
                       "final_distance": float(along.distances[-1]),
                       "max_distance": float(along.distances.max()),
                       "mr_norm": mr_norm(traj)},
        "passed": all(r["passed"] for r in results.values()),
    }
    if plan is not None:
        summary["constants"]["L"] = plan.lipschitz
        summary["constants"]["slab_length"] = plan.slab_length
        summary["picard"] = {"slabs": len(sol.slabs), "max_ratio": sol.max_ratio,
                             "factor": plan.factor,
                             "max_iterations": max(s.iterations for s in sol.slabs)}
    ref = _reference_error(cfg, space, traj)
    if ref is not None:
        summary["trajectory"]["reference_error"] = ref

    with open(out / f"{name}_summary.json", "w", newline="\n") as fh:
        json.dump(_plain(summary), fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    # wall-clock times vary between runs, so they live apart from the summary
    with open(out / f"{name}_timings.json", "w", newline="\n") as fh:
        json.dump(_plain(timings), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return (EXIT_OK if summary["passed"] else EXIT_FAIL), summary


# --- command line -------------------------------------------------------------------

def _parser():
    parser = argparse.ArgumentParser(
        prog="parainv",
        description="Solve parabolic scenarios and check invariance of convex sets.")
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="solve a scenario and write CSV/JSON reports")
    run.add_argument("cfg", help="scenario file or shipped scenario name")
    run.add_argument("--out-dir", default=".", help="directory for the reports")
    run.add_argument("--seed-override", type=int, default=None,
                     help="replace scenario.seed")
    run.add_argument("--tol-scale", type=float, default=1.0,
                     help="multiply every tolerance by this factor")
    val = sub.add_parser("validate", help="check a scenario file against the schema")
    val.add_argument("cfg")
    sub.add_parser("list", help="list the shipped scenarios")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.verb == "list":
        for name, path in shipped_scenarios().items():
            desc = parse_config_text(path.read_text(), str(path))["scenario"]["description"]
            print(f"{name}\t{desc}" if desc else name)
        return EXIT_OK
    try:
        cfg = load_scenario(args.cfg)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.verb == "validate":
        print(f"ok: {cfg['scenario']['name']}")
        return EXIT_OK
    try:
        code, summary = run_scenario(cfg, args.out_dir, args.seed_override, args.tol_scale)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ParainvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    name = cfg["scenario"]["name"]
    if summary is None:
        print(f"{name}: trajectory written, no checks requested")
    else:
        for check, res in summary["checks"].items():
            print(f"{name}: {check:<10} {'PASS' if res['passed'] else 'FAIL'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
