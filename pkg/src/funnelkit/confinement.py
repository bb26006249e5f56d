"""Confinement of solutions by a moving attracting centre.

The flux is ``f = psi(|x - xi|) (x - xi) u + G(u)`` with ``G(0) = 0`` and
``|G'| <= c``.  Its velocities lie in ``psi(|x - xi|)(x - xi) + B(0, c)`` for
``u >= 0``, so forward funnels of that controlled inclusion bound the support.
The integral test below decides whether a control on the circle of radius
``R`` can keep supports inside ``B(0, R+)``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .conservation import Field, SchemeConfig, solve
from .errors import PreconditionError
from .fluxes import Flux, heterogeneous
from .geometry import Grid, GridSet, ball, dilate, distance_field, point_set, support_of_field
from .inclusion import VelocitySet, disk_polygon, propagate_funnel


class ScenarioError(ValueError):
    """A malformed scenario; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# --- radial profiles ----------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """``psi(r)``, a value per unit length for ``r >= 0``."""

    kind: str
    params: dict
    fn: Callable = field(repr=False, compare=False)

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))

    def describe(self) -> dict:
        return {"kind": self.kind, "params": self.params}


def psi_constant(value: float) -> RadialProfile:
    return RadialProfile("constant", {"value": value},
                         lambda r: np.full(np.shape(r), float(value)))


def psi_powerlaw(coef: float, power: float, offset: float = 0.0) -> RadialProfile:
    """``psi(r) = offset + coef * r**power``."""
    if power < 0:
        raise ValueError("power must be nonnegative")
    return RadialProfile("powerlaw", {"coef": coef, "power": power, "offset": offset},
                         lambda r: offset + coef * np.power(r, power))


def psi_table(r, values) -> RadialProfile:
    """Piecewise-linear interpolation of sampled values; undefined past the last radius."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.ndim != 1 or r.shape != v.shape or len(r) < 2 or np.any(np.diff(r) <= 0) or r[0] > 0:
        raise ValueError("table radii must be increasing, start at 0 and match the values")
    if not np.all(np.isfinite(v)):
        raise ValueError("table values must be finite")

    def fn(s):
        if np.any(s > r[-1] * (1 + 1e-12)):
            raise ValueError(f"psi table covers r <= {r[-1]}, asked for {float(np.max(s)):.4g}")
        return np.interp(s, r, v)

    return RadialProfile("table", {"r": r.tolist(), "values": v.tolist()}, fn)


def make_psi(desc: dict) -> RadialProfile:
    kind = desc.get("kind")
    p = desc.get("params", {})
    try:
        if kind == "constant":
            return psi_constant(float(p["value"]))
        if kind == "powerlaw":
            return psi_powerlaw(float(p["coef"]), float(p["power"]), float(p.get("offset", 0.0)))
        if kind == "table":
            return psi_table(p["r"], p["values"])
    except KeyError as exc:
        raise ScenarioError("psi", f"missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError("psi", str(exc)) from None
    raise ScenarioError("psi", f"unknown kind {kind!r}; use constant, powerlaw or table")


# --- the G term ---------------------------------------------------------------

@dataclass(frozen=True)
class GTerm:
    """``G(u) = c g(u) e`` with ``g(0) = 0``, ``|g'| <= 1`` and a unit vector ``e``."""

    kind: str
    c: float
    direction: tuple = (1.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "tanh"):
            raise ValueError(f"unknown G kind {self.kind!r}")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        e = np.asarray(self.direction, dtype=float)
        if e.shape != (2,) or not np.isclose(np.linalg.norm(e), 1.0):
            raise ValueError("direction must be a unit vector in the plane")

    def g(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(u)
        return u if self.kind == "linear" else np.tanh(u)

    def dg(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(u)
        return np.ones_like(u) if self.kind == "linear" else 1.0 / np.cosh(u) ** 2

    def __call__(self, u):
        return self.c * self.g(u)[..., None] * np.asarray(self.direction)

    def derivative(self, u):
        return self.c * self.dg(u)[..., None] * np.asarray(self.direction)

    @property
    def bound(self) -> float:
        """``sup |G'|``."""
        return 0.0 if self.kind == "zero" else self.c

    def describe(self) -> dict:
        return {"kind": self.kind, "c": self.c, "direction": list(self.direction)}


# --- scenario -----------------------------------------------------------------

@dataclass
class ConfinementScenario:
    n: int
    psi: RadialProfile
    G: GTerm
    R: float
    Rminus: float
    Rplus: float
    omega: float | None = None
    T: float = 5.0
    cells: int = 160
    half_width: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ScenarioError("n", "dimension must be at least 2")
        if not self.R > 0:
            raise ScenarioError("R", "must be positive")
        if not 0 < self.Rminus <= self.Rplus:
            raise ScenarioError("Rminus", "need 0 < Rminus <= Rplus")
        if self.T <= 0:
            raise ScenarioError("T", "must be positive")
        if self.cells < 8:
            raise ScenarioError("grid", "need at least 8 cells per axis")
        r = np.linspace(0, self.R + self.Rplus, 257)
        if not np.all(np.isfinite(self.psi(r))):
            raise ScenarioError("psi", "not finite on [0, R + Rplus]")

    @property
    def c(self) -> float:
        return self.G.c

    def default_omega(self) -> float:
        """Three revolutions per attraction time ``1/|psi(R)|``."""
        rate = abs(float(self.psi(self.R)))
        return 6 * math.pi * (rate if rate > 0 else 1.0)

    def grid(self) -> Grid:
        L = self.half_width or (max(self.Rplus, self.R) + max(0.5, 0.25 * self.Rplus))
        return Grid.box((-L, -L), (L, L), self.cells)

    def flux(self, control: "ControlPath") -> Flux:
        """``f = psi(|x - xi(t)|)(x - xi(t)) u + G(u)`` along ``control``."""
        psi = self.psi

        def v(t, x):
            d = x - control(t)
            return psi(np.linalg.norm(d, axis=-1))[..., None] * d

        # x-Lipschitz bound, plus the time dependence through the moving centre
        lip = _radial_lipschitz(psi, self.R + 2 * self.Rplus)
        lip *= 1 + control.speed
        return heterogeneous(v, lip, G=self.G, dG=self.G.derivative, dim=2, name="controlled",
                             params={"psi": psi.describe(), "G": self.G.describe()})

    def describe(self) -> dict:
        return {"n": self.n, "psi": self.psi.describe(), "G": self.G.describe(), "R": self.R,
                "Rminus": self.Rminus, "Rplus": self.Rplus,
                "control": {"kind": "rotating", "omega": self.omega}, "T": self.T,
                "grid": {"cells": self.cells, "half_width": self.half_width}}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfinementScenario":
        def need(key):
            if key not in d:
                raise ScenarioError(key, "missing")
            return d[key]

        psi = make_psi(need("psi"))
        gdesc = need("G")
        try:
            G = GTerm(gdesc.get("kind", "zero"), float(gdesc.get("c", 0.0)),
                      tuple(gdesc.get("params", {}).get("direction", (1.0, 0.0))))
        except (TypeError, ValueError, AttributeError) as exc:
            raise ScenarioError("G", str(exc)) from None
        control = d.get("control", {})
        if control.get("kind", "rotating") != "rotating":
            raise ScenarioError("control", "only rotating controls are available")
        grid = d.get("grid", {})
        try:
            return cls(n=int(need("n")), psi=psi, G=G, R=float(need("R")),
                       Rminus=float(need("Rminus")), Rplus=float(need("Rplus")),
                       omega=None if control.get("omega") is None else float(control["omega"]),
                       T=float(d.get("T", 5.0)), cells=int(grid.get("cells", 160)),
                       half_width=None if grid.get("half_width") is None else float(grid["half_width"]))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError("scenario", str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ConfinementScenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _radial_lipschitz(psi: RadialProfile, rmax: float, nsamp: int = 2049) -> float:
    """Lipschitz bound of ``x -> psi(|x|) x`` on ``B(0, rmax)``: ``sup |psi| + sup |r psi'|``."""
    r = np.linspace(0, rmax, nsamp)
    p = psi(r)
    dp = np.abs(np.diff(p)) / np.diff(r)
    return float(np.abs(p).max() + (r[1:] * dp).max(initial=0.0))


# --- the integral condition ---------------------------------------------------

def _gamma_prefactor(n: int) -> float:
    return math.exp(math.lgamma(n / 2) - math.lgamma((n - 1) / 2)) / math.sqrt(math.pi)


def condition_lhs(psi, n: int, R: float, Rstar, nodes: int = 64):
    """Left-hand side of the confinement condition at ``Rstar`` (scalar or array).

    ``Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)) * int_0^pi psi(rho) (R* - R cos t) sin^(n-2) t dt``
    with ``rho = |R* e_1 - R (cos t, sin t)|``, by Gauss-Legendre quadrature.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not R > 0 or np.any(np.asarray(Rstar) <= 0):
        raise ValueError("R and Rstar must be positive")
    x, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * np.pi * (x + 1)
    w = 0.5 * np.pi * w
    Rs = np.asarray(Rstar, dtype=float)[..., None]
    cos = np.cos(theta)
    rho = np.sqrt(np.maximum(R * R + Rs * Rs - 2 * R * Rs * cos, 0.0))
    try:
        vals = np.asarray(psi(rho), dtype=float)
    except Exception as exc:
        raise ValueError(f"psi evaluation failed: {exc}") from exc
    integrand = vals * (Rs - R * cos) * np.sin(theta) ** (n - 2)
    out = _gamma_prefactor(n) * (integrand * w).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ConditionReport:
    verdict: bool
    margin: float
    max_value: float
    worst_Rstar: float
    c: float
    samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_condition(scenario: ConfinementScenario, samples: int = 101, nodes: int = 64) -> ConditionReport:
    """Whether ``condition_lhs < -c`` for every ``R*`` in ``[R-, R+]``."""
    samples = max(int(samples), 101)
    Rs = np.linspace(scenario.Rminus, scenario.Rplus, samples)
    vals = np.asarray(condition_lhs(scenario.psi, scenario.n, scenario.R, Rs, nodes)).reshape(-1)
    k = int(np.argmax(vals))
    mx = float(vals[k])
    c = scenario.c
    return ConditionReport(mx < -c, -c - mx, mx, float(Rs[k]), c, samples)


# --- controls and controlled inclusions ----------------------------------------

@dataclass(frozen=True)
class ControlPath:
    """A path ``xi(t)`` on the circle of radius ``R``."""

    R: float
    omega: float
    phase: float = 0.0

    def __call__(self, t):
        a = self.omega * np.asarray(t, dtype=float) + self.phase
        return self.R * np.stack([np.cos(a), np.sin(a)], axis=-1)

    @property
    def speed(self) -> float:
        return abs(self.omega) * self.R

    def describe(self) -> dict:
        return {"kind": "rotating", "R": self.R, "omega": self.omega, "phase": self.phase}


def rotating_control(R: float, omega: float, phase: float = 0.0) -> ControlPath:
    if not R > 0:
        raise ValueError("R must be positive")
    return ControlPath(float(R), float(omega), float(phase))


def controlled_velocity_set(scenario: ConfinementScenario, xi, t: float, x,
                            nvert: int = 32) -> VelocitySet:
    """Polygon around ``B(psi(|x - xi|)(x - xi), c)``."""
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - scenario.R) > 1e-9 * max(1.0, scenario.R):
        raise PreconditionError(f"|xi| = {np.linalg.norm(xi):.6g} differs from R = {scenario.R}")
    d = np.asarray(x, dtype=float) - xi
    center = float(scenario.psi(np.linalg.norm(d))) * d
    if scenario.c == 0:
        return VelocitySet(2, center[None, :])
    return VelocitySet(2, center + disk_polygon(scenario.c, nvert))


class ControlledField:
    """Velocity candidates ``psi(|x - xi(t)|)(x - xi(t)) + polygon(c)`` for funnel propagation."""

    def __init__(self, scenario: ConfinementScenario, control: ControlPath, nvert: int = 32):
        self.scenario = scenario
        self.control = control
        self.dim = 2
        self.poly = disk_polygon(scenario.c, nvert) if scenario.c > 0 else np.zeros((1, 2))
        mid = 2 * np.pi * (np.arange(nvert) + 0.5) / nvert
        self.normals = np.stack([np.cos(mid), np.sin(mid)], axis=-1)

    def _centers(self, t0, t1, X):
        d = X - self.control(0.5 * (t0 + t1))
        return self.scenario.psi(np.linalg.norm(d, axis=-1))[..., None] * d

    def candidates(self, t0, t1, X):
        return self._centers(t0, t1, X)[..., None, :] + self.poly

    def velocities(self, t0, t1, X):
        """Candidates plus the origin where it lies in the polygon, with speed bounds."""
        C = self._centers(t0, t1, X)
        cand = C[..., None, :] + self.poly
        c = self.scenario.c
        if c > 0:
            # -C in the regular polygon of inradius c: test against its edge normals
            inside = (-C @ self.normals.T).max(axis=-1) <= c * (1 + 1e-12)
        else:
            inside = np.all(C == 0, axis=-1)
        extra = np.where(inside[..., None], 0.0, cand[..., 0, :])
        vel = np.concatenate([cand, extra[..., None, :]], axis=-2)
        rad = float(np.linalg.norm(self.poly, axis=-1).max())
        speed = float(np.sqrt((C * C).sum(axis=-1)).max()) + rad
        smax = float(np.abs(C).sum(axis=-1).max()) + math.sqrt(2) * rad
        return vel, speed, smax

    def describe(self):
        return {"kind": "controlled", "control": self.control.describe(), "c": self.scenario.c,
                "vertices": len(self.poly)}


@dataclass
class ConfinementReport:
    verdict: bool
    max_radius: float
    limit: float
    condition: ConditionReport
    rows: list

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "max_radius": self.max_radius, "limit": self.limit,
                "condition": self.condition.to_dict(), "rows": self.rows}


def _max_radius(S: GridSet) -> float:
    pts = S.points()
    return float(np.linalg.norm(pts, axis=-1).max()) if len(pts) else 0.0


def simulate_confinement(scenario: ConfinementScenario, control: ControlPath | None = None,
                         K0: GridSet | None = None, T: float | None = None, dt: float | None = None,
                         stored: int = 50, backend=None):
    """Forward funnel of the controlled inclusion and whether it stays in ``B(0, R+)``.

    Every stored slice must lie in ``B(0, R+)`` dilated by two cells.  Returns
    ``(funnel, report)``; a failing integral condition only triggers a warning.
    """
    grid = K0.grid if K0 is not None else scenario.grid()
    h = grid.spacing
    control = control or rotating_control(scenario.R, scenario.omega or scenario.default_omega())
    K0 = K0 if K0 is not None else point_set(grid, (0.0, 0.0))
    if not K0.issubset(dilate(ball(grid, (0.0, 0.0), scenario.Rminus), h)):
        raise PreconditionError("K0 must lie inside B(0, Rminus)")
    cond = check_condition(scenario)
    if not cond.verdict:
        warnings.warn(f"confinement condition fails (margin {cond.margin:.4g}); simulating anyway",
                      RuntimeWarning, stacklevel=2)
    T = scenario.T if T is None else T
    field_ = ControlledField(scenario, control)
    X = grid.centers()
    smax = float(np.linalg.norm(field_.candidates(0, 0, X), axis=-1).max())
    smax = max(smax, 1e-12)
    if dt is None:
        dt = 0.9 * h / smax
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    every = max(1, nsteps // max(stored, 1))
    fn = propagate_funnel(field_, K0, 0.0, T, T / nsteps, "forward", store_every=every, backend=backend)
    limit = dilate(ball(grid, (0.0, 0.0), scenario.Rplus), 2 * h)
    rows = []
    ok = True
    for t, S in zip(fn.times, fn.slices):
        inside = S.issubset(limit)
        ok &= inside
        rows.append({"t": float(t), "max_radius": _max_radius(S), "cells": int(S.count),
                     "inside": bool(inside)})
    report = ConfinementReport(bool(ok), max(r["max_radius"] for r in rows), scenario.Rplus + 2 * h,
                               cond, rows)
    return fn, report


def pde_crosscheck(scenario: ConfinementScenario, funnel, u0: Field, control: ControlPath,
                   cfg: SchemeConfig | None = None, tol: float = 1e-12) -> dict:
    """Solve the controlled conservation law and measure support protrusion out of ``funnel``.

    ``funnel`` should start from ``spt u0``; protrusion is reported in cells
    at the funnel's stored times.
    """
    if u0.values.min() < 0:
        raise PreconditionError("the cross-check needs u0 >= 0")
    flux = scenario.flux(control)
    times = funnel.times
    cfg = cfg or SchemeConfig()
    rows = []
    cur = u0
    h = u0.grid.spacing
    for t, S in zip(times, funnel.slices):
        if t > cur.time:
            cur = solve(flux, cur, t - cur.time, SchemeConfig(cfl=cfg.cfl, store=1, scheme=cfg.scheme,
                                                               overflow_tol=cfg.overflow_tol)).final
        spt = support_of_field(cur.raster(), tol)
        prot = float(distance_field(S).values[spt.mask].max()) / h if spt.count else 0.0
        rows.append({"t": float(t), "protrusion_cells": prot})
    return {"worst_protrusion": max(r["protrusion_cells"] for r in rows), "rows": rows}
