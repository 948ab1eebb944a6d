"""``fp`` command-line front end.

Every command reads a JSON experiment config, runs one computation and writes
a CSV artifact plus a JSON sidecar into the output directory::

    fp linear --config ref.json --out results/
    fp rates --config ray.json --grid-size 400

Exit codes: 0 ok, 2 invalid config, 3 numerical failure. Errors are reported
on stderr as one line of JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import asymptotics, equilibrium, linear_fp, nonlinear_fp, orthopoly
from .errors import DEGREE_CEILING, ConfigError, DegreeCeilingError, DomainError, FPError
from .measures import AngelescoSystem, gauss_quadrature

COMMANDS = ("orthopoly", "linear", "nonlinear", "equilibrium", "zeros", "rates")

_MEASURE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["interval", "weight"],
    "properties": {
        "interval": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "weight": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["jacobi"],
                 "properties": {"jacobi": {"type": "array", "items": {"type": "number", "exclusiveMinimum": -1},
                                           "minItems": 2, "maxItems": 2}}},
                {"type": "object", "additionalProperties": False, "required": ["tabulated"],
                 "properties": {"tabulated": {
                     "type": "object", "additionalProperties": False, "required": ["grid", "samples"],
                     "properties": {"grid": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                                    "samples": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                                "minItems": 2}}}}},
            ]
        },
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sigma0", "sigmas"],
            "properties": {"sigma0": _MEASURE, "sigmas": {"type": "array", "items": _MEASURE, "minItems": 1}},
        },
        "measure": {"type": "integer", "minimum": 0},
        "degree": {"type": "integer", "minimum": 0},
        "multi_index": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "ray": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "kind": {"enum": ["linear", "nonlinear"]},
        "grid_size": {"type": "integer", "minimum": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "max_iter": {"type": "integer", "minimum": 1},
        "test_points": {"type": "array", "minItems": 1,
                        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
        "out_dir": {"type": "string"},
    },
}

_REQUIRED = {
    "orthopoly": ("degree",),
    "linear": ("multi_index",),
    "nonlinear": ("multi_index",),
    "equilibrium": ("ray", "kind"),
    "zeros": ("ray", "sizes", "kind"),
    "rates": ("ray", "sizes", "kind", "test_points"),
}


class Config(dict):
    """Validated config; ``system`` holds the constructed :class:`AngelescoSystem`."""

    system: AngelescoSystem


def parse_config(text: str, command: str | None = None) -> Config:
    """Parse and validate a JSON config, collecting every problem before failing."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    problems = []
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    for err in sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        problems.append(f"{where}: {err.message}")
    if problems or not isinstance(raw, dict):
        raise ConfigError("config failed schema validation", problems)

    cmd = command or raw.get("command")
    if cmd is None:
        problems.append("no command given")
    elif raw.get("command", cmd) != cmd:
        problems.append(f"config is for command {raw['command']!r}, invoked as {cmd!r}")
    else:
        for key in _REQUIRED[cmd]:
            if key not in raw:
                problems.append(f"{key}: required for command {cmd!r}")

    system = None
    try:
        system = AngelescoSystem.from_dict(raw["system"])
    except (ValueError, TypeError) as exc:
        problems.append(f"system: {exc}")

    m = system.m if system is not None else len(raw["system"]["sigmas"])
    if "multi_index" in raw:
        n = raw["multi_index"]
        if len(n) != m:
            problems.append(f"multi_index: has {len(n)} entries for {m} branches")
        if sum(n) > DEGREE_CEILING:
            problems.append(f"multi_index: |n| = {sum(n)} exceeds the degree ceiling {DEGREE_CEILING}")
    if "degree" in raw and raw["degree"] > 2 * DEGREE_CEILING:
        problems.append(f"degree: {raw['degree']} exceeds the degree ceiling {2 * DEGREE_CEILING}")
    if "measure" in raw and raw["measure"] > m:
        problems.append(f"measure: index {raw['measure']} out of range 0..{m}")
    if "ray" in raw:
        if len(raw["ray"]) != m:
            problems.append(f"ray: has {len(raw['ray'])} entries for {m} branches")
        try:
            equilibrium.RayVector(tuple(raw["ray"]))
        except ValueError as exc:
            problems.append(f"ray: {exc}")
    if "sizes" in raw:
        s = raw["sizes"]
        if any(b <= a for a, b in zip(s, s[1:])):
            problems.append("sizes: must be strictly increasing")
        if max(s) > DEGREE_CEILING:
            problems.append(f"sizes: {max(s)} exceeds the degree ceiling {DEGREE_CEILING}")
    if "test_points" in raw and system is not None:
        for i, (re, im) in enumerate(raw["test_points"]):
            d = min(float(iv.distance(complex(re, im))) for iv in system.intervals)
            if d <= 0.1:
                problems.append(f"test_points/{i}: distance {d:.3g} to a support interval is not above 0.1")
    if problems:
        raise ConfigError("invalid config", problems)
    cfg = Config(raw)
    cfg["command"] = cmd
    cfg.system = system
    return cfg


# -- artifact formatting ----------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _plain(obj):
    """JSON-ready copy with floats rendered at 17 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return float("%.17g" % f) if np.isfinite(f) else None
    return obj


def _json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands ---------------------------------------------------------------

def _poly_rows(name: str, p: orthopoly.PolynomialRep):
    return [(name, k, c) for k, c in enumerate(p.coeffs)]


def _poly_meta(p: orthopoly.PolynomialRep) -> dict:
    return {"interval": [p.interval.lo, p.interval.hi], "degree": p.degree,
            "zeros": [] if p.zeros is None else p.zeros}


def run_orthopoly(cfg: Config, opts) -> dict:
    spec = cfg.system.measure(cfg.get("measure", 0))
    deg = cfg["degree"]
    table = orthopoly.recurrence_coefficients(spec, deg)
    rows = [(k, table.a[k], table.b[k]) for k in range(table.max_degree)]
    meta = {"measure": cfg.get("measure", 0), "degree": deg, "norm0": table.norm0}
    if deg >= 1:
        q = gauss_quadrature(spec, deg)
        meta["gauss_nodes"], meta["gauss_weights"] = q.nodes, q.weights
    return {"orthopoly.csv": _csv(("k", "a", "b"), rows), "orthopoly.json": _json(meta)}


def run_linear(cfg: Config, opts) -> dict:
    a = linear_fp.solve_linear_fp(cfg.system, cfg["multi_index"], tol=opts.get("tol", 1e-12),
                                  max_iter=opts.get("max_iter", 200))
    rows = _poly_rows("Q", a.Q)
    for j, p in enumerate(a.P, start=1):
        rows += _poly_rows(f"P{j}", p)
    meta = {
        "multi_index": list(a.n.n),
        "method": a.method,
        "max_residual": a.max_residual,
        "residuals": [{"j": j, "k": k, "value": v} for (j, k), v in sorted(a.fourier_residuals.items())],
        "Q": _poly_meta(a.Q),
        "P": [_poly_meta(p) for p in a.P],
        "zeros": [z for z in a.zeros],
        "nodes": [ns.nodes for ns in a.node_sets] if a.node_sets else [],
        "iterations": len(a.trace),
    }
    return {"linear_coefficients.csv": _csv(("poly", "k", "cheb_coeff"), rows), "linear_residuals.json": _json(meta)}


def run_nonlinear(cfg: Config, opts) -> dict:
    a = nonlinear_fp.fixed_point_solve(cfg.system, cfg["multi_index"], damping=opts.get("damping", 1.0),
                                       max_iter=opts.get("max_iter", 200), tol=opts.get("tol", 1e-10))
    rows = _poly_rows("T", a.T)
    for j, p in enumerate(a.S, start=1):
        rows += _poly_rows(f"S{j}", p)
    meta = {
        "multi_index": list(a.n.n),
        "residual": nonlinear_fp.residual_check(a, cfg.system),
        "T": _poly_meta(a.T),
        "S": [_poly_meta(p) for p in a.S],
        "zeros": [z for z in a.zeros],
        "nodes": [ns.nodes for ns in a.node_sets],
        "trace": list(a.trace),
        "damping_changes": [list(c) for c in a.damping_changes],
    }
    return {"nonlinear_coefficients.csv": _csv(("poly", "k", "cheb_coeff"), rows),
            "nonlinear_residuals.json": _json(meta)}


def _ray(cfg: Config) -> equilibrium.RayVector:
    return equilibrium.RayVector(tuple(cfg["ray"]))


def run_equilibrium(cfg: Config, opts) -> dict:
    p = _ray(cfg)
    kind = cfg["kind"]
    C = equilibrium.interaction_matrix_linear(p) if kind == "linear" else equilibrium.interaction_matrix_nonlinear(p)
    sol = equilibrium.solve_equilibrium(C, equilibrium.standard_intervals(cfg.system),
                                        grid_size=opts.get("grid_size", 400), tol=opts.get("tol", 1e-3),
                                        max_iter=opts.get("max_iter", 50000))
    rows = [(k, x, w) for k, comp in enumerate(sol.components, start=1) for x, w in zip(comp.grid, comp.masses)]
    meta = {
        "kind": kind,
        "ray": list(p.p),
        "omega": list(sol.constants),
        "kkt_violation": sol.kkt_violation,
        "energy": sol.energy,
        "iterations": sol.iterations,
        "support": [[float(s.min()), float(s.max())] if (s := comp.support()).size else [] for comp in sol.components],
    }
    return {"equilibrium.csv": _csv(("component", "grid_point", "mass"), rows), "equilibrium.json": _json(meta)}


def _schedule(cfg: Config) -> asymptotics.RaySchedule:
    return asymptotics.RaySchedule(_ray(cfg), tuple(cfg["sizes"]))


def run_zeros(cfg: Config, opts) -> dict:
    sched = _schedule(cfg)
    rep = asymptotics.zero_distribution_experiment(cfg.system, sched, cfg["kind"], grid_size=opts.get("grid_size", 800))
    rows = [(r["kind"], r["j"], r["size"], r["dist_q"], r["dist_w"]) for r in rep.rows]
    meta = {
        "kind": rep.kind,
        "multi_indices": sched.multi_indices(),
        "max_ray_deviation": sched.max_deviation,
        "trend_ok": {str(j): {"q": rep.trend_ok(j, "dist_q"), "w": rep.trend_ok(j, "dist_w")}
                     for j in range(1, cfg.system.m + 1)},
    }
    return {"zeros.csv": _csv(("kind", "j", "size", "dist_q", "dist_w"), rows), "zeros.json": _json(meta)}


def run_rates(cfg: Config, opts) -> dict:
    sched = _schedule(cfg)
    pts = [complex(re, im) for re, im in cfg["test_points"]]
    rep = asymptotics.rate_experiment(cfg.system, sched, cfg["kind"], pts, grid_size=opts.get("grid_size", 400))
    rows = [(r["kind"], r["j"], r["z"].real, r["z"].imag, r["size"], r["err"], r["emp_rate"], r["theo_rate"])
            for r in rep.rows]
    meta = rep.summary()
    meta["multi_indices"] = sched.multi_indices()
    meta["max_ray_deviation"] = sched.max_deviation
    return {"rates.csv": _csv(("kind", "j", "z_re", "z_im", "size", "err", "emp_rate", "theo_rate"), rows),
            "rates.json": _json(meta)}


RUNNERS = {"orthopoly": run_orthopoly, "linear": run_linear, "nonlinear": run_nonlinear,
           "equilibrium": run_equilibrium, "zeros": run_zeros, "rates": run_rates}


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fp", description="Fourier–Padé approximants for Angelesco systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--grid-size", type=int)
        sp.add_argument("--damping", type=float)
        sp.add_argument("--max-iter", type=int)
        sp.add_argument("--out", type=Path, help="output directory (default: config out_dir or .)")
    return parser


def _fail(code: int, kind: str, message: str, problems=None) -> int:
    payload = {"status": "error", "exit_code": code, "kind": kind, "message": message}
    if problems:
        payload["problems"] = list(problems)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(2, "config", f"cannot read config: {exc}")
    try:
        cfg = parse_config(text, args.command)
    except ConfigError as exc:
        return _fail(2, "config", str(exc), exc.problems)

    opts = {k: cfg[k] for k in ("tol", "grid_size", "damping", "max_iter") if k in cfg}
    for key in ("tol", "grid_size", "damping", "max_iter"):
        v = getattr(args, key)
        if v is not None:
            opts[key] = v
    bad = [f"--{k.replace('_', '-')}: must be positive" for k, v in opts.items() if v <= 0]
    if opts.get("damping", 1.0) > 1:
        bad.append("--damping: must not exceed 1")
    if bad:
        return _fail(2, "config", "invalid option", bad)
    out = args.out if args.out is not None else Path(cfg.get("out_dir", "."))

    try:
        artifacts = RUNNERS[args.command](cfg, opts)
    except (DegreeCeilingError, DomainError, ConfigError) as exc:
        return _fail(2, "validation", f"{type(exc).__name__}: {exc}")
    except FPError as exc:
        return _fail(3, "numerical", f"{type(exc).__name__}: {exc}")
    for name in sorted(artifacts):
        write_atomic(out / name, artifacts[name])
    return 0


if __name__ == "__main__":
    sys.exit(main())
