"""Command-line interface: ``funnelkit <subcommand> [--config FILE] [flags] --out DIR``.

Each run writes ``report.json`` (wall-clock timing kept under ``"timing"``),
``series.csv`` and raster snapshots under ``rasters/``.  Exit status is 0 when
the check passes, 2 when it fails and 1 on errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .conservation import Field, SchemeConfig, solve, total_mass, verify_bounds
from .confinement import (ConfinementScenario, ScenarioError, check_condition, condition_lhs,
                          rotating_control, simulate_confinement)
from .errors import FunnelError
from .fluxes import FLUXES, get_flux
from .geometry import (Grid, GridSet, ball, box_set, dilate, is_tubular, measure,
                       minkowski_content, point_set, segment_set)
from .inclusion import (ConstantEnvelope, VelocitySet, disk_velocity_set, envelope_exponential,
                        propagate_funnel, proximal_residual)
from .estimates import (contraction_check, data_envelope, domain_of_dependence, funnel_step,
                        perturbation_test, support_envelope)
from .storage import read_raster, write_raster

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


class Config:
    """Merged configuration with key-aware accessors."""

    def __init__(self, data: dict):
        self.data = data

    def get(self, key, default=None):
        return self.data.get(key, default)

    def need(self, key):
        if self.data.get(key) is None:
            raise ConfigError(key, "missing")
        return self.data[key]

    def number(self, key, default=None, positive=False, nonneg=False):
        v = self.data.get(key, default)
        if v is None:
            raise ConfigError(key, "missing")
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {v!r}") from None
        if positive and not v > 0:
            raise ConfigError(key, "must be positive")
        if nonneg and v < 0:
            raise ConfigError(key, "must be nonnegative")
        return v


# --- builders -----------------------------------------------------------------

def build_grid(cfg: Config) -> Grid:
    desc = dict(cfg.get("grid") or {})
    if cfg.get("cells") is not None:
        desc["cells"] = cfg.get("cells")
    if "lo" not in desc or "hi" not in desc:
        raise ConfigError("grid", "needs 'lo' and 'hi'")
    try:
        return Grid.box(np.atleast_1d(desc["lo"]).tolist(), np.atleast_1d(desc["hi"]).tolist(),
                        int(desc.get("cells", 256)))
    except (TypeError, ValueError) as exc:
        raise ConfigError("grid", str(exc)) from None


def build_flux(cfg: Config, dim: int):
    desc = cfg.need("flux")
    if isinstance(desc, str):
        name, params = desc, {}
    elif isinstance(desc, dict) and "name" in desc:
        name, params = desc["name"], dict(desc.get("params", {}))
    else:
        raise ConfigError("flux", "expected a name or {name, params}")
    if name not in FLUXES:
        raise ConfigError("flux", f"unknown flux {name!r}; choose from {sorted(FLUXES)}")
    if name == "burgers":
        params.setdefault("dim", dim)
    try:
        flux = get_flux(name, **params)
    except TypeError as exc:
        raise ConfigError("flux", str(exc)) from None
    if flux.dim != dim:
        raise ConfigError("flux", f"flux is {flux.dim}D but the grid is {dim}D")
    return flux


def build_set(desc, grid: Grid, key: str) -> GridSet:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(key, "expected {kind, ...}")
    kind = desc["kind"]
    try:
        if kind == "point":
            return point_set(grid, desc["x"])
        if kind == "ball":
            return ball(grid, desc["center"], float(desc["radius"]))
        if kind == "box":
            return box_set(grid, np.atleast_1d(desc["lo"]), np.atleast_1d(desc["hi"]))
        if kind == "segment":
            S = segment_set(grid, desc["a"], desc["b"])
            return dilate(S, float(desc.get("radius", 0.0)))
        if kind == "raster":
            S = read_raster(desc["path"])
            if not isinstance(S, GridSet) or S.grid != grid:
                raise ConfigError(key, "raster is not a mask on the configured grid")
            return S
    except KeyError as exc:
        raise ConfigError(key, f"missing field {exc.args[0]!r}") from None
    raise ConfigError(key, f"unknown set kind {kind!r}")


def build_field(desc, grid: Grid, key: str) -> Field:
    if isinstance(desc, str):
        if Path(desc).exists():
            desc = {"kind": "raster", "path": desc}
        else:
            desc = {"kind": desc}
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(key, "expected a preset name, raster path or {kind, ...}")
    kind = desc["kind"]
    X = grid.centers()
    try:
        if kind == "box":
            lo = np.atleast_1d(desc.get("lo", -1.0))
            hi = np.atleast_1d(desc.get("hi", 1.0))
            inside = np.all((X >= lo) & (X <= hi), axis=-1)
            return Field(grid, 0.0, float(desc.get("value", 1.0)) * inside)
        if kind == "riemann":
            x0 = float(desc.get("x0", 0.0))
            return Field(grid, 0.0, np.where(X[..., 0] < x0, float(desc.get("ul", 1.0)),
                                             float(desc.get("ur", 0.0))))
        if kind == "bump":
            c = np.atleast_1d(desc.get("center", [0.0] * grid.dim))
            r = float(desc.get("radius", 0.5))
            q = np.sum((X - c) ** 2, axis=-1) / r**2
            return Field(grid, 0.0, float(desc.get("height", 1.0)) * np.maximum(0.0, 1.0 - q))
        if kind == "constant":
            return Field(grid, 0.0, np.full(grid.shape, float(desc.get("value", 0.0))))
        if kind == "raster":
            R = read_raster(desc["path"])
            if isinstance(R, GridSet) or R.grid != grid:
                raise ConfigError(key, "raster is not a real field on the configured grid")
            return Field(grid, 0.0, R.values)
    except KeyError as exc:
        raise ConfigError(key, f"missing field {exc.args[0]!r}") from None
    raise ConfigError(key, f"unknown field kind {kind!r}")


def build_envelope(cfg: Config, flux, fields):
    desc = cfg.get("envelope")
    if desc is None:
        return data_envelope(flux, *fields)
    kind = desc.get("kind", "exponential")
    try:
        if kind == "constant":
            return ConstantEnvelope(float(desc["a0"]), float(desc["b0"]))
        if kind == "exponential":
            return envelope_exponential(float(desc["a0"]), float(desc["b0"]),
                                        float(desc.get("L1", flux.L1)), int(desc.get("n", flux.dim)))
    except KeyError as exc:
        raise ConfigError("envelope", f"missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError("envelope", str(exc)) from None
    raise ConfigError("envelope", f"unknown kind {kind!r}")


def build_scheme(cfg: Config) -> SchemeConfig:
    try:
        return SchemeConfig(cfl=float(cfg.get("cfl", 0.45)), store=int(cfg.get("store", 20)),
                            scheme=str(cfg.get("scheme", "llf")))
    except ValueError as exc:
        key = "cfl" if "cfl" in str(exc) else "scheme" if "scheme" in str(exc) else "store"
        raise ConfigError(key, str(exc)) from None


def build_scenario(cfg: Config) -> ConfinementScenario:
    desc = cfg.get("scenario") or {k: v for k, v in cfg.data.items()
                                   if k in ("n", "psi", "G", "R", "Rminus", "Rplus", "control", "T", "grid")}
    try:
        return ConfinementScenario.from_dict(desc)
    except ScenarioError as exc:
        raise ConfigError(exc.key, str(exc)) from None


# --- output -------------------------------------------------------------------

class Output:
    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.rasters = self.dir / "rasters"

    def series(self, rows: list) -> None:
        if not rows:
            return
        with open(self.dir / "series.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                            for k, v in r.items()})

    def raster(self, name: str, obj) -> None:
        self.rasters.mkdir(exist_ok=True)
        write_raster(self.rasters / name, obj)

    def report(self, report: dict) -> None:
        (self.dir / "report.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def _verdict(passed: bool, **tolerance) -> dict:
    return {"passed": bool(passed), "tolerance": tolerance}


# --- subcommands ----------------------------------------------------------------

def cmd_solve(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    flux = build_flux(cfg, grid.dim)
    u0 = build_field(cfg.need("u0"), grid, "u0")
    T = cfg.number("T", positive=True)
    scheme = build_scheme(cfg)
    traj = solve(flux, u0, T, scheme)
    env = build_envelope(cfg, flux, [u0])
    bounds = verify_bounds(traj, env, float(cfg.get("bounds_tol", 1e-8)))
    m0 = total_mass(u0)
    rows = [{"t": f.time, "mass": total_mass(f), "min": float(f.values.min()),
             "max": float(f.values.max())} for f in traj.fields]
    out.series(rows)
    for k, f in enumerate(traj.fields):
        out.raster(f"u_{k:05d}.fnlr", f.raster())
    drift = max(abs(r["mass"] - m0) for r in rows) / max(abs(m0), 1e-300)
    timing = {"solver": traj.meta.pop("runtime")}
    return {"results": {"steps": traj.meta["steps"], "max_courant": traj.meta["max_courant"],
                        "mass_initial": m0, "mass_final": rows[-1]["mass"], "mass_drift_rel": drift,
                        "bounds": {k: v for k, v in bounds.to_dict().items() if k != "rows"},
                        "scheme": traj.meta},
            "verdict": _verdict(bounds.passed, bounds_tol=bounds.tol), "timing": timing}


def _velocity_source(cfg: Config, grid: Grid):
    desc = cfg.get("velocity")
    if desc is None:
        flux = build_flux(cfg, grid.dim)
        env = cfg.get("envelope")
        if env is None:
            raise ConfigError("envelope", "a flux-driven funnel needs an envelope {a0, b0}")
        return flux, build_envelope(cfg, flux, [])
    try:
        if "interval" in desc:
            return VelocitySet.interval(*map(float, desc["interval"])), None
        if "disk" in desc:
            d = desc["disk"]
            return disk_velocity_set(d.get("center", [0.0, 0.0]), float(d["radius"]),
                                     int(d.get("vertices", 32))), None
        if "vertices" in desc:
            return VelocitySet.hull(desc["vertices"]), None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("velocity", str(exc)) from None
    raise ConfigError("velocity", "expected interval, disk or vertices")


def cmd_funnel(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    source, env = _velocity_source(cfg, grid)
    K = build_set(cfg.need("K"), grid, "K")
    tau0 = cfg.number("tau0", 0.0)
    tau = cfg.number("tau")
    direction = cfg.get("direction", "forward")
    if direction not in ("forward", "backward"):
        raise ConfigError("direction", "must be forward or backward")
    nsamp = int(cfg.get("nsamp", 64))
    if cfg.get("dt") is not None:
        dt = cfg.number("dt", positive=True)
    elif env is not None:
        dt = funnel_step(source, grid, env, tau0, tau)
    else:
        speed = float(np.linalg.norm(source.vertices, axis=-1).max())
        dt = (tau - tau0) / max(10, int(np.ceil((tau - tau0) * speed / (0.9 * grid.spacing))))
    fn = propagate_funnel(source, K, tau0, tau, dt, direction, env=env, nsamp=nsamp,
                          store_every=int(cfg.get("store_every", 1)))
    rows = [{"t": t, "cells": int(S.count), "measure": measure(S)} for t, S in zip(fn.times, fn.slices)]
    out.series(rows)
    fn.save(out.rasters)
    results = {"slices": len(fn), "dt": fn.meta["dt"], "cmax": fn.meta["cmax"],
               "substeps": fn.meta["substeps"], "final_measure": rows[-1]["measure"] if direction == "forward"
               else rows[0]["measure"], "backend": fn.meta["backend"]}
    passed = True
    if cfg.get("residual") and len(fn) >= 3:
        st = proximal_residual(fn, source, env=env, nsamp=nsamp)
        results["residual"] = {"median": st.median, "mean": st.mean, "p90": st.p90, "count": st.count,
                               "skipped": st.skipped}
        passed = st.median <= float(cfg.get("residual_tol", 0.1))
    return {"results": results, "verdict": _verdict(passed, residual_tol=float(cfg.get("residual_tol", 0.1))),
            "timing": {"funnel": fn.meta["runtime"]}}


def cmd_dod(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    flux = build_flux(cfg, grid.dim)
    a0, b0 = cfg.number("a0"), cfg.number("b0")
    x = np.atleast_1d(cfg.need("x")).astype(float)
    t = cfg.number("t", positive=True)
    started = time.perf_counter()
    est = domain_of_dependence(flux, a0, b0, x, t, grid, nsamp=int(cfg.get("nsamp", 64)))
    env = envelope_exponential(a0, b0, flux.L1, flux.dim)
    lo, hi = env.interval(0, t)
    cmax = flux.speed_bound(grid, lo, hi, 0, t)
    kball = dilate(point_set(grid, x), cmax * t + grid.spacing)
    inside = est.set.issubset(kball)
    out.raster("dod.fnlr", est.set)
    out.series([{"t": tt, "cells": int(S.count)} for tt, S in zip(est.funnel.times, est.funnel.slices)])
    return {"results": {**est.to_dict(), "kruzkov_radius": cmax * t, "inside_kruzkov_ball": inside,
                        "measure": measure(est.set)},
            "verdict": _verdict(inside, cells=1), "timing": {"total": time.perf_counter() - started}}


def cmd_contract(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    flux = build_flux(cfg, grid.dim)
    u0 = build_field(cfg.need("u0"), grid, "u0")
    ub = build_field(cfg.need("ubar0"), grid, "ubar0")
    K = build_set(cfg.need("K"), grid, "K")
    tau0, tau = cfg.number("tau0", 0.0), cfg.number("tau")
    slack_cells = float(cfg.get("slack_cells", 2.0))
    started = time.perf_counter()
    rep = contraction_check(flux, u0, ub, K, tau0, tau, build_scheme(cfg), nsamp=int(cfg.get("nsamp", 64)))
    out.raster("K.fnlr", K)
    out.raster("funnel_tau0.fnlr", rep.funnel.slice_at(tau0))
    out.series([{"t": t, "cells": int(S.count)} for t, S in zip(rep.funnel.times, rep.funnel.slices)])
    passed = rep.slack >= -slack_cells * grid.spacing
    return {"results": rep.to_dict(), "verdict": _verdict(passed, slack_cells=slack_cells),
            "timing": {"total": time.perf_counter() - started}}


def cmd_support(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    flux = build_flux(cfg, grid.dim)
    u0 = build_field(cfg.need("u0"), grid, "u0")
    T = cfg.number("T", positive=True)
    tol = float(cfg.get("tol", 1e-12))
    tol_cells = float(cfg.get("tol_cells", 2.0))
    started = time.perf_counter()
    fn, traj, rep = support_envelope(flux, u0, T, build_scheme(cfg), tol=tol, tol_cells=tol_cells,
                                     nsamp=int(cfg.get("nsamp", 64)))
    out.series(rep.rows)
    for k, S in enumerate(fn.slices if fn is not None else []):
        out.raster(f"slice_{k:05d}.fnlr", S)
    return {"results": {"worst_protrusion": rep.worst_protrusion, "support_tol": tol, "times": len(rep.rows)},
            "verdict": _verdict(rep.passed, protrusion_cells=tol_cells, support_tol=tol),
            "timing": {"total": time.perf_counter() - started}}


def cmd_perturb(cfg: Config, out: Output) -> dict:
    grid = build_grid(cfg)
    flux = build_flux(cfg, grid.dim)
    u0 = build_field(cfg.need("u0"), grid, "u0")
    w = build_field(cfg.need("w"), grid, "w")
    x = np.atleast_1d(cfg.need("x")).astype(float)
    t = cfg.number("t", positive=True)
    eps = cfg.number("eps", 0.1, nonneg=True)
    tol = float(cfg.get("tol", 1e-6))
    started = time.perf_counter()
    rep = perturbation_test(flux, u0, w, x, t, eps, cfg.get("r_probe"), build_scheme(cfg))
    out.raster("dod.fnlr", rep.estimate.set)
    out.series([{"eps": eps, "distance": rep.distance, "difference": rep.difference}])
    return {"results": rep.to_dict(), "verdict": _verdict(rep.difference <= tol, difference=tol),
            "timing": {"total": time.perf_counter() - started}}


def cmd_confine(cfg: Config, out: Output, action: str) -> dict:
    sc = build_scenario(cfg)
    started = time.perf_counter()
    cond = check_condition(sc)
    if action == "check":
        Rs = np.linspace(sc.Rminus, sc.Rplus, cond.samples)
        vals = condition_lhs(sc.psi, sc.n, sc.R, Rs)
        out.series([{"Rstar": r, "lhs": v, "threshold": -sc.c} for r, v in zip(Rs, vals)])
        return {"results": {"condition": cond.to_dict(), "scenario": sc.describe()},
                "verdict": _verdict(cond.verdict, strict=True),
                "timing": {"total": time.perf_counter() - started}}
    if action == "simulate":
        if sc.n != 2:
            raise ConfigError("n", "simulation is available for n = 2 only")
        omega = sc.omega if sc.omega is not None else sc.default_omega()
        fn, rep = simulate_confinement(sc, rotating_control(sc.R, omega))
        out.series(rep.rows)
        fn.save(out.rasters)
        res = rep.to_dict()
        res.pop("rows")
        res["omega"] = omega
        return {"results": res, "verdict": _verdict(rep.verdict, cells=2),
                "timing": {"total": time.perf_counter() - started}}
    # sweep over rotation rates
    omegas = cfg.get("omegas")
    if omegas is None:
        base = sc.default_omega()
        omegas = [base / 4, base / 2, base]
    rows = []
    for om in omegas:
        _, rep = simulate_confinement(sc, rotating_control(sc.R, float(om)))
        rows.append({"omega": float(om), "max_radius": rep.max_radius, "confined": bool(rep.verdict)})
    out.series(rows)
    return {"results": {"condition": cond.to_dict(), "runs": rows},
            "verdict": _verdict(all(r["confined"] for r in rows), cells=2),
            "timing": {"total": time.perf_counter() - started}}


def cmd_geom(cfg: Config, out: Output, action: str) -> dict:
    grid = build_grid(cfg)
    A = build_set(cfg.need("set"), grid, "set")
    started = time.perf_counter()
    if action == "content":
        radii = cfg.get("radii") or [k * grid.spacing for k in (40, 30, 20, 12, 8)]
        est = minkowski_content(A, radii)
        out.series([{"r": r, "quotient": q} for r, q in est.table()])
        expected = cfg.get("expected")
        passed = True if expected is None else abs(est.content - float(expected)) <= 0.05 * abs(float(expected))
        return {"results": {"content": est.content, "slope": est.slope},
                "verdict": _verdict(passed, relative=0.05), "timing": {"total": time.perf_counter() - started}}
    r = cfg.number("r", positive=True)
    tol = float(cfg.get("tol", grid.spacing))
    ok = is_tubular(A, r, tol)
    out.raster("set.fnlr", A)
    out.series([{"r": r, "tol": tol, "tubular": ok}])
    return {"results": {"tubular": ok, "r": r}, "verdict": _verdict(ok, hausdorff=tol),
            "timing": {"total": time.perf_counter() - started}}


SCHEMA_DIR = Path(__file__).parent / "schemas"


def schema_path(command: str) -> Path:
    """Published JSON schema for the report of ``command`` (e.g. ``"confine check"``)."""
    return SCHEMA_DIR / (command.replace(" ", "_") + ".json")


COMMANDS = ("solve", "funnel", "dod", "contract", "support", "perturb", "confine", "geom")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="funnelkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--cells", type=int, help="cells per axis")
        sp.add_argument("--flux", help="flux family name")
        sp.add_argument("--seed", type=int, help="seed recorded with the run")
        sp.add_argument("--nsamp", type=int, help="velocity samples per set")
        sp.add_argument("--dt", type=float, help="funnel time step")
        sp.add_argument("--cfl", type=float, help="solver CFL fraction")
        sp.add_argument("--scheme", choices=("llf", "godunov"), help="interface flux")
        sp.add_argument("--set", dest="json_overrides", action="append", default=[], metavar="KEY=JSON",
                        help="override a config key with a JSON value")
        return sp

    for name in ("solve", "funnel", "dod", "contract", "support", "perturb"):
        sp = common(sub.add_parser(name))
        sp.add_argument("--u0", help="initial data: raster path or preset (box, riemann, bump)")
        sp.add_argument("--T", type=float, help="final time")
        sp.add_argument("--direction", choices=("forward", "backward"))
        sp.add_argument("--tau", type=float)
        sp.add_argument("--tau0", type=float)
    conf = sub.add_parser("confine")
    conf.add_argument("action", choices=("check", "simulate", "sweep"))
    common(conf)
    geom = sub.add_parser("geom")
    geom.add_argument("action", choices=("content", "tubular"))
    common(geom)
    return p


def load_config(args) -> Config:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
    for key in ("cells", "flux", "seed", "nsamp", "dt", "cfl", "scheme", "u0", "T", "direction", "tau", "tau0"):
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    for item in args.json_overrides:
        key, _, raw = item.partition("=")
        try:
            data[key] = json.loads(raw)
        except json.JSONDecodeError:
            data[key] = raw
    return Config(data)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        out = Output(args.out)
        if args.command == "confine":
            body = cmd_confine(cfg, out, args.action)
        elif args.command == "geom":
            body = cmd_geom(cfg, out, args.action)
        else:
            body = globals()[f"cmd_{args.command}"](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FunnelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    command = args.command + (f" {args.action}" if hasattr(args, "action") else "")
    report = {"command": command, "version": __version__, "inputs": cfg.data, **body}
    out.report(report)
    status = "pass" if body["verdict"]["passed"] else "FAIL"
    print(f"{command}: {status} -> {out.dir / 'report.json'}")
    return EXIT_PASS if body["verdict"]["passed"] else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
