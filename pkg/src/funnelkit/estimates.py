"""Contraction, domain-of-dependence and support estimates built from funnels.

Every check runs the solver and the funnel propagation on one grid.  The
returned reports keep the raw quantities next to the tolerance used, so a
failure can be blamed on either the theory or the discretization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conservation import Field, SchemeConfig, l1_distance, solve
from .errors import GridMismatch, NotTubular, PreconditionError
from .fluxes import Flux
from .geometry import (GridSet, ball, dilate, distance_field, is_tubular, point_set,
                       support_of_field)
from .inclusion import (BoundsEnvelope, Funnel, envelope_exponential, envelope_perturbed,
                        propagate_funnel)

_FUNNEL_CFL = 0.9


def data_envelope(flux: Flux, *fields: Field, eps: float = 0.0) -> BoundsEnvelope:
    """Exponential bounds started from the joint range of the given initial data."""
    a0 = min(float(f.values.min()) for f in fields)
    b0 = max(float(f.values.max()) for f in fields)
    if eps > 0:
        return envelope_perturbed(a0, b0, flux.L1, flux.dim, eps)
    return envelope_exponential(a0, b0, flux.L1, flux.dim)


def funnel_step(flux: Flux, grid, env: BoundsEnvelope, t0: float, t1: float,
                cfl: float = _FUNNEL_CFL) -> float:
    """A time step with ``dt * cmax <= cfl * spacing`` on ``[t0, t1]``."""
    lo, hi = env.interval(t0, t1)
    cmax = flux.speed_bound(grid, lo, hi, t0, t1)
    span = t1 - t0
    if cmax == 0:
        return span / 10
    n = max(1, math.ceil(span * cmax / (cfl * grid.spacing)))
    return span / n


def _solve_to(flux, u0: Field, times, cfg: SchemeConfig) -> list:
    """Fields at the requested increasing times (starting from ``u0``)."""
    out = []
    cur = u0
    for t in times:
        if t < cur.time - 1e-14:
            raise ValueError("times must be increasing")
        if t > cur.time:
            step_cfg = SchemeConfig(cfl=cfg.cfl, dt=cfg.dt, store=1, overflow_tol=cfg.overflow_tol,
                                    overflow_margin=cfg.overflow_margin, scheme=cfg.scheme)
            cur = solve(flux, cur, t - cur.time, step_cfg).final
        out.append(cur)
    return out


@dataclass
class ContractionReport:
    lhs: float
    rhs: float
    slack: float
    spacing: float
    dt: float
    tau0: float
    tau: float
    envelope: dict
    funnel: Funnel = field(repr=False)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "spacing": self.spacing,
                "dt": self.dt, "tau0": self.tau0, "tau": self.tau, "envelope": self.envelope}


def contraction_check(flux: Flux, u0: Field, ubar0: Field, K: GridSet, tau0: float, tau: float,
                      cfg: SchemeConfig | None = None, env: BoundsEnvelope | None = None,
                      dt: float | None = None, nsamp: int = 64, tubular_radius: float | None = None
                      ) -> ContractionReport:
    """Compare ``int_K |u - ubar|`` at ``tau`` with the integral over the backward funnel at ``tau0``."""
    cfg = cfg or SchemeConfig()
    grid = u0.grid
    if ubar0.grid != grid or K.grid != grid:
        raise GridMismatch("initial data and K must share one grid")
    if not 0 <= tau0 <= tau:
        raise ValueError("need 0 <= tau0 <= tau")
    r = 3 * grid.spacing if tubular_radius is None else tubular_radius
    if not is_tubular(K, r):
        raise NotTubular(f"K is not a tubular neighbourhood of radius {r:.4g}")
    env = env or data_envelope(flux, u0, ubar0)
    dt = dt or funnel_step(flux, grid, env, tau0, tau)
    u_a, u_b = _solve_to(flux, u0, [tau0, tau], cfg)
    v_a, v_b = _solve_to(flux, ubar0, [tau0, tau], cfg)
    lhs = l1_distance(u_b, v_b, K)
    if tau == tau0:
        return ContractionReport(lhs, lhs, 0.0, grid.spacing, 0.0, tau0, tau, env.describe(),
                                 Funnel("backward", np.array([tau0]), [K]))
    fn = propagate_funnel(flux, K, tau0, tau, dt, "backward", env=env, nsamp=nsamp)
    rhs = l1_distance(u_a, v_a, fn.slice_at(tau0))
    return ContractionReport(lhs, rhs, rhs - lhs, grid.spacing, dt, tau0, tau, env.describe(), fn)


@dataclass
class DodEstimate:
    point: tuple
    time: float
    set: GridSet
    envelope: dict
    funnel: Funnel = field(repr=False)

    def to_dict(self) -> dict:
        pts = self.set.points()
        return {"point": list(self.point), "time": self.time, "envelope": self.envelope,
                "cells": int(self.set.count), "lo": pts.min(axis=0).tolist(),
                "hi": pts.max(axis=0).tolist()}


def domain_of_dependence(flux: Flux, a0: float, b0: float, x, t: float, grid,
                         env: BoundsEnvelope | None = None, dt: float | None = None,
                         nsamp: int = 64, radius: float = 0.0) -> DodEstimate:
    """Slice at time 0 of the backward funnel ending in ``{x}`` (or ``B(x, radius)``) at ``t``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if a0 > b0:
        raise ValueError("a0 > b0")
    env = env or envelope_exponential(a0, b0, flux.L1, flux.dim)
    K = ball(grid, x, radius) if radius > 0 else point_set(grid, x)
    dt = dt or funnel_step(flux, grid, env, 0.0, t)
    fn = propagate_funnel(flux, K, 0.0, t, dt, "backward", env=env, nsamp=nsamp)
    return DodEstimate(tuple(np.atleast_1d(np.asarray(x, dtype=float)).tolist()), float(t),
                       fn.slice_at(0.0), env.describe(), fn)


@dataclass
class PerturbationReport:
    difference: float
    distance: float
    eps: float
    r_probe: float
    estimate: DodEstimate = field(repr=False)

    def to_dict(self) -> dict:
        return {"difference": self.difference, "distance": self.distance, "eps": self.eps,
                "r_probe": self.r_probe, "estimate": self.estimate.to_dict()}


def perturbation_test(flux: Flux, u0: Field, w: Field, x, t: float, eps: float = 0.1,
                      r_probe: float | None = None, cfg: SchemeConfig | None = None,
                      margin_cells: int = 10, dt: float | None = None, nsamp: int = 64
                      ) -> PerturbationReport:
    """Probe average of ``|u - v|`` near ``x`` at ``t`` for ``v0 = u0 + eps * w``.

    The dependence estimate is the backward funnel of the probe ball under the
    envelope widened by ``eps``.  ``spt w`` must stay ``margin_cells`` cells away
    from it, otherwise :class:`PreconditionError` is raised.
    """
    cfg = cfg or SchemeConfig()
    grid = u0.grid
    if w.grid != grid:
        raise GridMismatch("u0 and w must share one grid")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    r_probe = 5 * grid.spacing if r_probe is None else r_probe
    wmax = float(np.abs(w.values).max())
    if wmax > 0 and abs(wmax - 1) > 1e-12:
        raise PreconditionError(f"w must satisfy max|w| = 1 (got {wmax:.6g})")
    env = envelope_perturbed(float(u0.values.min()), float(u0.values.max()), flux.L1, flux.dim, eps)
    est = domain_of_dependence(flux, 0, 0, x, t, grid, env=env, dt=dt, nsamp=nsamp, radius=r_probe)
    spt = support_of_field(w.raster(), 0.0)
    if spt.empty:
        distance = math.inf
    else:
        distance = float(distance_field(est.set).values[spt.mask].min())
        if distance < margin_cells * grid.spacing:
            raise PreconditionError(
                f"spt w lies {distance:.4g} from the dependence estimate; need {margin_cells} cells")
    probe = ball(grid, x, r_probe)
    v0 = Field(grid, u0.time, u0.values + eps * w.values)
    u_t = _solve_to(flux, u0, [u0.time + t], cfg)[0]
    v_t = _solve_to(flux, v0, [u0.time + t], cfg)[0]
    diff = l1_distance(u_t, v_t, probe) / (probe.count * grid.cell_volume)
    return PerturbationReport(diff, distance, eps, r_probe, est)


@dataclass
class SupportReport:
    passed: bool
    worst_protrusion: float
    tol_cells: float
    rows: list

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst_protrusion": self.worst_protrusion,
                "tol_cells": self.tol_cells, "rows": self.rows}


def support_envelope(flux: Flux, u0: Field, T: float, cfg: SchemeConfig | None = None,
                     env: BoundsEnvelope | None = None, tol: float = 1e-12, tol_cells: float = 2.0,
                     nsamp: int = 64):
    """Forward funnel of ``spt u0`` and the per-time protrusion of ``spt u(t)`` out of it.

    Protrusion is measured in cells: the largest distance from a support cell
    of ``u(t)`` to the funnel slice.  Returns ``(funnel, trajectory, report)``;
    the funnel is ``None`` when ``u0`` vanishes, since then every support is empty.
    """
    cfg = cfg or SchemeConfig()
    grid = u0.grid
    K = support_of_field(u0.raster(), tol)
    if u0.values.min() < -tol:
        raise PreconditionError("support containment needs u0 >= 0")
    traj = solve(flux, u0, T, cfg)
    if K.empty:
        rows = [{"t": f.time, "support_cells": int(support_of_field(f.raster(), tol).count),
                 "slice_cells": 0, "protrusion_cells": 0.0} for f in traj.fields]
        worst = 0.0 if all(r["support_cells"] == 0 for r in rows) else math.inf
        return None, traj, SupportReport(worst <= tol_cells, worst, tol_cells, rows)
    env = env or data_envelope(flux, u0)
    times = traj.times
    span = times[1] - times[0]
    dt = funnel_step(flux, grid, env, 0.0, T)
    sub = max(1, math.ceil(span / dt - 1e-9))
    fn = propagate_funnel(flux, K, u0.time, u0.time + T, span / sub, "forward", env=env,
                          nsamp=nsamp, store_every=sub)
    rows = []
    worst = 0.0
    for f in traj.fields:
        S = support_of_field(f.raster(), tol)
        sl = fn.slice_at(f.time)
        if S.empty:
            prot = 0.0
        else:
            prot = float(distance_field(sl).values[S.mask].max()) / grid.spacing
        worst = max(worst, prot)
        rows.append({"t": f.time, "support_cells": int(S.count), "slice_cells": int(sl.count),
                     "protrusion_cells": prot})
    return fn, traj, SupportReport(worst <= tol_cells, worst, tol_cells, rows)


def kruzkov_ball(grid, x, t: float, cmax: float) -> GridSet:
    """``B(x, cmax t)`` as a grid set."""
    return dilate(point_set(grid, x), cmax * t)
