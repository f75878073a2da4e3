"""Command-line runner for declarative dimension experiments.

A config is one JSON document::

    {"kind": "reproduce-example2", "params": {"alpha": 2}, "seed": 0}

``phidim run CONFIG`` writes ``<name>.csv`` traces and ``<name>.json``
summaries to ``--out-dir``; every file starts from a header (CSV) or
field (JSON) carrying the package version and a hash of the resolved
config, so two runs of the same config produce byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .covering import BoxUnion, CellBudgetError, GeomSet, PointCloud, interval
from .dimfunc import (DimensionFunction, DomainError, CheckpointSequence, check_axioms,
                      checkpoint_interpolant, constant_df, doubling_bound_check,
                      from_spectrum_theta, inverse_sqrt_log_df, rate_window)
from .estimator import (QUASI_MULTIPLIERS, ScaleGrid, equivalence_gap_check, matched_window,
                        phi_lower_estimate, quasi_phi_lower_estimate, rate_window_scan,
                        variational_scan, windowed_lower_estimate)
from .moran import (BudgetError, MoranSpec, ScheduleError, checkpoint_log_scales, constant_spec,
                    example1_spec, example2_spec, explicit_spec, formula_dimension)
from .popcorn import (ResolutionError, SampleBudgetError, baseline_estimate, baseline_trace,
                      box_dimension_trace, isolated_point_collapse, sample_graph)
from .report import rows_to_csv

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_TOLERANCE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# -- catalog ----------------------------------------------------------------


@dataclass(frozen=True)
class Kind:
    name: str
    anchor: str
    required: tuple
    defaults: dict
    runner: Callable = field(repr=False, compare=False)


_CATALOG: dict = {}


def _kind(name, anchor, required=(), **defaults):
    def deco(fn):
        _CATALOG[name] = Kind(name, anchor, tuple(required), defaults, fn)
        return fn
    return deco


def list_experiments() -> list[dict]:
    """Kinds with required/optional parameters and the result each reproduces."""
    return [{"kind": k.name, "anchor": k.anchor, "required": list(k.required),
             "optional": {p: v for p, v in sorted(k.defaults.items())}}
            for k in _CATALOG.values()]


# -- parameter parsing -----------------------------------------------------


def parse_phi(doc, name: str = "phi"):
    """Dimension function from a config value.

    Accepted forms: a number (constant), ``"inv-sqrt-log"``, ``"identity"``
    (the map ``R -> R``, only for axiom diagnostics), or an object with
    ``type`` in ``const | spectrum | checkpoints | inline``.
    """
    if isinstance(doc, (int, float)) and not isinstance(doc, bool):
        return constant_df(float(doc))
    if isinstance(doc, str):
        doc = {"type": doc}
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(f"{name}: expected a number, a name or an object with 'type'")
    kind = doc["type"]
    try:
        if kind == "const":
            return constant_df(float(doc["theta"]))
        if kind == "spectrum":
            return from_spectrum_theta(float(doc["theta_prime"]))
        if kind == "inv-sqrt-log":
            return inverse_sqrt_log_df()
        if kind == "identity":
            return _identity
        if kind == "checkpoints":
            pts = CheckpointSequence.from_scales([tuple(map(float, p)) for p in doc["points"]])
            return checkpoint_interpolant(pts, doc.get("mode", "max"), name=doc.get("name"))
        if kind == "inline":
            return DimensionFunction.from_dict(doc["function"], name=doc.get("name"))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{name}: missing or malformed field {exc}") from exc
    raise ConfigError(f"{name}: unknown type {kind!r}")


def _identity(R):
    return R


def parse_schedule(doc, budget: int | None) -> MoranSpec:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("schedule: expected an object with 'type'")
    kind = doc["type"]
    extra = {} if budget is None else {"level_budget": budget}
    try:
        if kind == "constant":
            spec = constant_spec(float(doc["r"]), depth=int(doc.get("depth", 64)))
            if budget is not None:
                spec.level_budget = budget
            return spec
        if kind == "explicit":
            return explicit_spec([float(x) for x in doc["ratios"]])
        if kind == "example1":
            return example1_spec(float(doc.get("alpha", 2.0)), parse_phi(doc.get("phi", 0.5)),
                                 parse_phi(doc.get("psi", 1.0), "psi"),
                                 n_checkpoints=int(doc.get("n_checkpoints", 6)), **extra)
        if kind == "example2":
            return example2_spec(float(doc.get("alpha", 2.0)),
                                 parse_phi(doc.get("phi", "inv-sqrt-log")),
                                 n_checkpoints=int(doc.get("n_checkpoints", 6)), **extra)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"schedule: missing or malformed field {exc}") from exc
    raise ConfigError(f"schedule: unknown type {kind!r}")


def parse_set(doc) -> GeomSet:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("set: expected an object with 'type'")
    try:
        if doc["type"] == "interval":
            return interval(float(doc.get("a", 0.0)), float(doc.get("b", 1.0)))
        if doc["type"] == "points":
            return PointCloud(doc["points"])
        if doc["type"] == "boxes":
            return BoxUnion(doc["lo"], doc["hi"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"set: missing or malformed field {exc}") from exc
    raise ConfigError(f"set: unknown type {doc['type']!r}")


def parse_grid(doc, spec: MoranSpec | None = None) -> ScaleGrid:
    """``{"k_start", "k_stop", "step", "gamma"}`` or ``{"checkpoints": [first, stop]}``."""
    if not isinstance(doc, dict):
        raise ConfigError("grid: expected an object")
    if "checkpoints" in doc:
        if spec is None:
            raise ConfigError("grid: checkpoint grids need a schedule")
        first, stop = doc["checkpoints"]
        t = checkpoint_log_scales(spec)[int(first):None if stop is None else int(stop)]
        if t.size == 0:
            raise ConfigError("grid: no checkpoints in range")
        return ScaleGrid(t)
    try:
        return ScaleGrid.geometric(int(doc["k_start"]), int(doc["k_stop"]),
                                   float(doc.get("gamma", 0.5)), step=int(doc.get("step", 1)))
    except KeyError as exc:
        raise ConfigError(f"grid: missing field {exc}") from exc


def _checkpoint_level(spec: MoranSpec, index: int) -> int:
    levels = spec.meta.get("checkpoint_levels", [])
    if not levels:
        return 1
    return int(levels[min(index, len(levels) - 1)])


def _f(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


# -- runners ----------------------------------------------------------------
# Each runner returns (tables: name -> csv text, summary dict, checks: name -> bool).


@_kind("moran-formula", "cylinder-count formula l_phi log 2 / log(rho(n)/rho(n+l_phi))",
       required=("schedule", "phi"), start_level=1, expect=None, tol=0.01)
def _run_moran_formula(p, ctx):
    spec = parse_schedule(p["schedule"], ctx.depth_budget)
    rep = formula_dimension(spec, parse_phi(p["phi"]), start_level=int(p["start_level"]))
    checks = {}
    if p["expect"] is not None:
        checks["value_within_tol"] = abs(rep.value - float(p["expect"])) <= float(p["tol"])
    return {"trace": rep.to_csv()}, {"value": rep.value, "value_bounds": rep.value_bounds}, checks


@_kind("moran-estimate", "phi-lower estimate from exact ball counts",
       required=("phi", "grid"), schedule=None, set=None, method="phi-lower", start=0,
       expect=None, tol=0.05)
def _run_moran_estimate(p, ctx):
    if (p["schedule"] is None) == (p["set"] is None):
        raise ConfigError("give exactly one of 'schedule' or 'set'")
    F = parse_set(p["set"]) if p["set"] is not None else parse_schedule(p["schedule"],
                                                                        ctx.depth_budget)
    phi = parse_phi(p["phi"])
    grid = parse_grid(p["grid"], F if isinstance(F, MoranSpec) else None)
    start = int(p["start"])
    if p["method"] == "phi-lower":
        rep = phi_lower_estimate(F, phi, grid, start=start)
    elif p["method"] == "quasi":
        rep = quasi_phi_lower_estimate(F, phi, grid, start=start)
    elif p["method"] == "windowed":
        Phi, mults = matched_window(phi)
        rep = windowed_lower_estimate(F, Phi, grid, mults, start=start)
    else:
        raise ConfigError(f"unknown method {p['method']!r}")
    checks = {}
    if p["expect"] is not None:
        checks["value_within_tol"] = abs(rep.value - float(p["expect"])) <= float(p["tol"])
    return {"trace": rep.to_csv()}, {"value": rep.value, "value_bounds": rep.value_bounds}, checks


@_kind("dimfunc-check", "dimension-function axioms and the doubling sandwich",
       required=("phi",), k_start=1, k_stop=200, C=[0.5, 0.25])
def _run_dimfunc_check(p, ctx):
    phi = parse_phi(p["phi"])
    t = np.arange(int(p["k_start"]), int(p["k_stop"]) + 1, dtype=float) * math.log(2.0)
    if isinstance(phi, DimensionFunction):
        t = t[t >= phi.t_min]
    rep = check_axioms(phi, t=t)
    checks = {"monotone": bool(np.all(rep.monotone)), "growth": bool(np.all(rep.growth))}
    rows = [{"R": _f(R), "phi": _f(v)} for R, v in zip(rep.scales, rep.values)]
    summary = {"failures": rep.failures()}
    if isinstance(phi, DimensionFunction) and rep.passed:
        for C in p["C"]:
            d = doubling_bound_check(phi, float(C), t=t)
            checks[f"doubling_C={float(C):g}"] = d.passed
    else:
        summary["doubling"] = "skipped: not a dimension function"
    return {"values": rows_to_csv(rows, ["R", "phi"])}, summary, checks


@_kind("variational", "variational principle: infimum over rate windows phi/alpha, alpha <= 1",
       schedule={"type": "example2", "alpha": 2.0}, phi="inv-sqrt-log",
       alphas=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0], burn_in_checkpoint=2,
       grid={"checkpoints": [2, 5]}, tol=0.05, ordering_tol=0.02)
def _run_variational(p, ctx):
    spec = parse_schedule(p["schedule"], ctx.depth_budget)
    phi = parse_phi(p["phi"])
    grid = parse_grid(p["grid"], spec)
    start = _checkpoint_level(spec, int(p["burn_in_checkpoint"]))
    scan = variational_scan(spec, phi, p["alphas"], start=start, quasi_grid=grid,
                            tol=float(p["tol"]))
    lower = phi_lower_estimate(spec, phi, grid)
    quasi = quasi_phi_lower_estimate(spec, phi, grid,
                                     multipliers=sorted({*QUASI_MULTIPLIERS,
                                                         *(1 / np.asarray(p["alphas"]))}))
    Phi, mults = matched_window(phi, sorted({*QUASI_MULTIPLIERS, *(1 / np.asarray(p["alphas"]))}))
    win = windowed_lower_estimate(spec, Phi, grid, mults)
    otol = float(p["ordering_tol"])
    checks = {"infimum_vs_quasi": scan.infimum >= quasi.value - float(p["tol"]),
              "windowed_le_quasi": win.value <= quasi.value + otol,
              "quasi_le_phi_lower": quasi.value <= lower.value + otol}
    summary = {"infimum": scan.infimum, "quasi": quasi.value, "phi_lower": lower.value,
               "windowed": win.value}
    return {"scan": scan.to_csv(), "quasi_trace": quasi.to_csv()}, summary, checks


@_kind("rate-window", "rate-window monotonicity of f(alpha)/alpha and the lower-bound inequality",
       schedule={"type": "example2", "alpha": 2.0}, phi="inv-sqrt-log", alphas=[0.5, 1, 2, 4],
       burn_in_checkpoint=2, atol=1e-9)
def _run_rate_window(p, ctx):
    spec = parse_schedule(p["schedule"], ctx.depth_budget)
    start = _checkpoint_level(spec, int(p["burn_in_checkpoint"]))
    scan = rate_window_scan(spec, parse_phi(p["phi"]), p["alphas"], start=start,
                            atol=float(p["atol"]))
    checks = {k: bool(np.all(v)) for k, v in scan.checks.items()}
    summary = {"values": [_f(v) for v in scan.values], "margins": scan.provenance["margins"]}
    return {"scan": scan.to_csv()}, summary, checks


@_kind("equivalence-gap", "gap bound eps (1 + 2 log2 C + eps) between phi and a nearby psi",
       set={"type": "interval", "a": 0.0, "b": 1.0}, phi=1.0, eps=0.01,
       grid={"k_start": 48, "k_stop": 64, "step": 2}, tol=0.0)
def _run_equivalence_gap(p, ctx):
    F = parse_set(p["set"])
    phi = parse_phi(p["phi"])
    eps = float(p["eps"])
    psi = rate_window(phi, 1.0 / (1.0 + eps))
    rep = equivalence_gap_check(F, phi, psi, parse_grid(p["grid"]), eps=eps, tol=float(p["tol"]))
    return {}, rep.to_dict(), {"gap_within_bound": rep.passed}


@_kind("popcorn", "popcorn graph: isolated-point collapse, baseline segment, box target 4/(2+t)",
       t=1.0, Q=2000, phi=1.0, tol=0.05, band_low=1.05, r_grid=None)
def _run_popcorn(p, ctx):
    t, tol = float(p["t"]), float(p["tol"])
    phi = parse_phi(p["phi"])
    sample = sample_graph(t, int(p["Q"]), budget=ctx.point_budget)
    col = isolated_point_collapse(sample, phi)
    base = baseline_estimate(phi)
    box = box_dimension_trace(sample, p["r_grid"], threads=ctx.threads)
    ref = baseline_trace(box.r)
    checks = {"collapse_quotient_zero": col.certified,
              "baseline_within_tol": abs(base.value - 1.0) <= tol,
              "box_trace_increasing": box.increasing_tail,
              "box_final_in_band": float(p["band_low"]) <= box.final <= box.target + tol,
              "box_above_baseline": bool(np.all(box.values > ref.values))}
    summary = {"collapse": col.to_dict(), "baseline": base.value, "box": box.to_dict(),
               "target": box.target, "points": len(sample)}
    return {"box_trace": box.report.to_csv(), "baseline_trace": base.to_csv()}, summary, checks


@_kind("reproduce-example1", "example1 schedule: constant phi = 1/2 below constant psi = 1",
       alpha=2.0, phi=0.5, psi=1.0, n_checkpoints=6, tol=0.01, psi_floor=0.55, from_checkpoint=3)
def _run_example1(p, ctx):
    phi, psi = parse_phi(p["phi"]), parse_phi(p["psi"], "psi")
    extra = {} if ctx.depth_budget is None else {"level_budget": ctx.depth_budget}
    spec = example1_spec(float(p["alpha"]), phi, psi, n_checkpoints=int(p["n_checkpoints"]),
                         **extra)
    cps = checkpoint_log_scales(spec)
    a = formula_dimension(spec, phi)
    b = formula_dimension(spec, psi)
    qa, qb = a.values_at(cps), b.values_at(cps)
    target = 1.0 / float(p["alpha"])
    ok_a = np.isnan(qa) | (np.abs(qa - target) <= float(p["tol"]))
    late = np.arange(cps.size) + 1 >= int(p["from_checkpoint"])
    checks = {"phi_at_checkpoints": bool(np.all(ok_a) and np.any(~np.isnan(qa))),
              "psi_above_floor": bool(np.all(qb[late] >= float(p["psi_floor"])))}
    ratio = _offset_ratios(a, b, cps)
    rows = [{"checkpoint": i + 1, "R": _f(math.exp(-t)) if t < 700 else "underflow",
             "phi_quotient": _f(x), "psi_quotient": _f(y), "offset_ratio": _f(c)}
            for i, (t, x, y, c) in enumerate(zip(cps, qa, qb, ratio))]
    late_ratio = ratio[late & np.isfinite(ratio)]
    summary = {"phi_value": a.value, "psi_value": b.value, "expected_phi": target,
               "depth": spec.depth,
               "min_offset_ratio": float(late_ratio.min()) if late_ratio.size else math.nan}
    return ({"checkpoints": rows_to_csv(rows, ["checkpoint", "R", "phi_quotient",
                                               "psi_quotient", "offset_ratio"]),
             "phi_trace": a.to_csv(), "psi_trace": b.to_csv()}, summary, checks)


def _offset_ratios(a, b, cps) -> np.ndarray:
    """``l_psi / l_phi`` at each checkpoint (NaN where either window is empty)."""
    def offsets(rep):
        ts = np.array([rec.t_R for rec in rep.records])
        out = []
        for t in cps:
            hit = np.flatnonzero(np.isclose(ts, t, rtol=1e-12, atol=0))
            out.append(rep.records[hit[0]].info["offset"] if hit.size else 0)
        return np.array(out, dtype=float)
    num, den = offsets(b), offsets(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, np.nan)


@_kind("reproduce-example2", "example2 schedule: (a+1)/(2a) under phi vs (a+2)/(3a) under 3phi/2",
       alpha=2.0, phi="inv-sqrt-log", n_checkpoints=6, burn_in_checkpoint=2, tol=0.02)
def _run_example2(p, ctx):
    alpha = float(p["alpha"])
    phi = parse_phi(p["phi"])
    extra = {} if ctx.depth_budget is None else {"level_budget": ctx.depth_budget}
    spec = example2_spec(alpha, phi, n_checkpoints=int(p["n_checkpoints"]), **extra)
    psi = spec.meta["psi_function"]
    start = _checkpoint_level(spec, int(p["burn_in_checkpoint"]))
    a = formula_dimension(spec, phi, start_level=start)
    b = formula_dimension(spec, psi, start_level=start)
    ea, eb = (alpha + 1) / (2 * alpha), (alpha + 2) / (3 * alpha)
    tol = float(p["tol"])
    checks = {"phi_value": abs(a.value - ea) <= tol, "psi_value": abs(b.value - eb) <= tol,
              "psi_below_phi": b.value < a.value}
    summary = {"phi_value": a.value, "psi_value": b.value, "expected_phi": ea,
               "expected_psi": eb, "depth": spec.depth}
    return {"phi_trace": a.to_csv(), "psi_trace": b.to_csv()}, summary, checks


# -- config handling --------------------------------------------------------


@dataclass
class Context:
    depth_budget: int | None = None
    threads: int = 1
    seed: int = 0
    point_budget: int = 5_000_000


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate(doc)


def validate(doc) -> dict:
    """Resolve defaults and check required parameters; returns the resolved config."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    kind = doc.get("kind")
    if kind not in _CATALOG:
        raise ConfigError(f"unknown kind {kind!r}; see 'phidim list'")
    spec = _CATALOG[kind]
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    missing = [k for k in spec.required if k not in params]
    if missing:
        raise ConfigError(f"{kind}: missing required parameters {missing}")
    unknown = sorted(set(params) - set(spec.required) - set(spec.defaults))
    if unknown:
        raise ConfigError(f"{kind}: unknown parameters {unknown}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    for key in ("depth_budget", "Q", "n_checkpoints"):
        v = params.get(key, spec.defaults.get(key))
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"{key} must be positive")
    resolved = {"kind": kind, "params": {**spec.defaults, **params}, "seed": seed,
                "name": str(doc.get("name", kind))}
    return resolved


def config_hash(resolved: dict) -> str:
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def run(resolved: dict, out_dir, ctx: Context) -> dict:
    """Run a resolved config and write its reports; returns the summary document."""
    np.random.seed(resolved["seed"])
    kind = _CATALOG[resolved["kind"]]
    tables, summary, checks = kind.runner(resolved["params"], ctx)
    digest = config_hash(resolved)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = resolved["name"]
    header = f"# phidim {__version__} kind={kind.name} config={digest} seed={resolved['seed']}\n"
    files = []
    for tname, text in sorted(tables.items()):
        path = out / f"{name}.{tname}.csv"
        path.write_text(header + text)
        files.append(path.name)
    doc = {"phidim_version": __version__, "numpy_version": np.__version__, "kind": kind.name,
           "anchor": kind.anchor, "config_hash": digest, "seed": resolved["seed"],
           "config": resolved, "summary": summary,
           "checks": {k: bool(v) for k, v in sorted(checks.items())},
           "passed": all(bool(v) for v in checks.values()), "files": files}
    (out / f"{name}.json").write_text(json.dumps(doc, indent=1, sort_keys=True, default=_json_default)
                                      + "\n")
    return doc


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    return str(o)


def read_table(path) -> tuple[str, str]:
    """Split a written CSV into its versioned header line and body."""
    text = Path(path).read_text()
    head, _, body = text.partition("\n")
    return head, body


# -- entry point -------------------------------------------------------------


def _fail(code: int, kind: str, message: str, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code, **extra},
                                sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phidim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out-dir", default="phidim-out")
    r.add_argument("--depth-budget", type=int, default=None,
                   help="maximum number of Moran levels to materialize")
    r.add_argument("--threads", type=int, default=1, help="worker threads for per-scale work")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--assert", dest="check", action="store_true",
                   help="exit 4 if any check fails")
    sub.add_parser("list", help="print the experiment catalog")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for item in list_experiments():
            print(json.dumps(item, sort_keys=True, default=_json_default))
        return EXIT_OK
    try:
        resolved = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    if args.command == "validate":
        print(json.dumps({"valid": True, "config_hash": config_hash(resolved)}))
        return EXIT_OK
    if args.seed is not None:
        resolved["seed"] = args.seed
    if args.depth_budget is not None and args.depth_budget <= 0:
        return _fail(EXIT_VALIDATION, "validation", "depth budget must be positive")
    if args.threads < 1:
        return _fail(EXIT_VALIDATION, "validation", "threads must be at least 1")
    ctx = Context(args.depth_budget, args.threads, resolved["seed"])
    try:
        doc = run(resolved, args.out_dir, ctx)
    except (BudgetError, CellBudgetError, SampleBudgetError) as exc:
        return _fail(EXIT_BUDGET, "budget", str(exc))
    except (ConfigError, ScheduleError, DomainError, ResolutionError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    failed = [k for k, v in doc["checks"].items() if not v]
    print(json.dumps({"kind": doc["kind"], "passed": doc["passed"], "checks": doc["checks"],
                      "files": doc["files"]}, sort_keys=True))
    if failed and (args.check or doc["kind"] == "dimfunc-check"):
        return _fail(EXIT_TOLERANCE, "tolerance", f"failed checks: {failed}", failed=failed)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
