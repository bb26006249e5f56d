"""Monotone finite-volume solver for ``u_t + div f(t, x, u) = 0`` in 1D and 2D.

Local Lax-Friedrichs interface fluxes, evaluated at the interface midpoint so
the update is exactly conservative; 2D uses Strang splitting.  Monotone schemes
converge to the entropy solution, which is what the estimates compare against.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CFLViolation, GridMismatch, SupportOverflow
from .fluxes import Flux
from .geometry import Grid, GridSet, Raster
from .storage import read_index, read_raster, write_index, write_raster


@dataclass(eq=False)
class Field:
    """Cell averages of ``u`` at one instant."""

    grid: Grid
    time: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    @classmethod
    def from_function(cls, grid: Grid, fn, time: float = 0.0) -> "Field":
        """Sample ``fn(X)`` at cell centers, ``X`` of shape ``grid.shape + (dim,)``."""
        return cls(grid, time, np.asarray(fn(grid.centers()), dtype=float))

    def raster(self) -> Raster:
        return Raster(self.grid, self.values)

    def copy(self, values=None, time=None) -> "Field":
        return Field(self.grid, self.time if time is None else time,
                     self.values.copy() if values is None else values)


@dataclass
class SchemeConfig:
    """Numerical knobs of the solver.

    ``cfl`` in ``(0, 0.5]`` scales the largest stable step; a fixed ``dt`` is
    accepted only if it respects that bound.  ``store`` is the number of equally
    spaced output times after the initial one.  ``scheme`` selects the interface
    flux: local Lax-Friedrichs (default) or exact Godunov, which needs a flux
    declaring its per-axis convexity.
    """

    cfl: float = 0.45
    dt: float | None = None
    store: int = 20
    overflow_tol: float = 1e-10
    overflow_margin: int = 2
    scheme: str = "llf"

    def __post_init__(self):
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.store < 1:
            raise ValueError("store must be at least 1")
        if self.scheme not in ("llf", "godunov"):
            raise ValueError("scheme must be 'llf' or 'godunov'")


@dataclass(eq=False)
class Trajectory:
    fields: list
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.fields])

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def final(self) -> Field:
        return self.fields[-1]

    def at(self, t: float) -> Field:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no field stored at t={t}")
        return self.fields[k]

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for k, f in enumerate(self.fields):
            name = f"u_{k:05d}.fnlr"
            write_raster(directory / name, f.raster())
            files.append(name)
        write_index(directory, {"kind": "trajectory", "times": self.times.tolist(), "files": files,
                                "flux": self.meta.get("flux"), "cfl": self.meta.get("cfl"),
                                "grid": self.grid.to_dict(), "meta": self.meta})
        return directory

    @classmethod
    def load(cls, directory) -> "Trajectory":
        directory = Path(directory)
        idx = read_index(directory)
        fields = [Field(r.grid, t, r.values)
                  for t, r in zip(idx["times"], (read_raster(directory / f) for f in idx["files"]))]
        return cls(fields, idx.get("meta", {}))


def _axis_speed(flux: Flux, t, X, u, k) -> float:
    return float(np.abs(flux.dudf(t, X, u)[..., k]).max())


def _llf(flux, t, iface, uL, uR, k):
    fL = flux.f(t, iface, uL)[..., k]
    fR = flux.f(t, iface, uR)[..., k]
    alpha = np.maximum(np.abs(flux.dudf(t, iface, uL)[..., k]), np.abs(flux.dudf(t, iface, uR)[..., k]))
    return 0.5 * (fL + fR) - 0.5 * alpha * (uR - uL)


def _godunov(flux, t, iface, uL, uR, k):
    """Exact Riemann flux: min of ``f_k`` over ``[uL, uR]`` or max over ``[uR, uL]``."""
    sign = flux.convexity[k]
    fk = lambda u: flux.f(t, iface, u)[..., k]  # noqa: E731
    if sign == 0:
        speed = flux.dudf(t, iface, uL)[..., k]
        return np.where(speed >= 0, fk(uL), fk(uR))
    us = np.broadcast_to(flux.ustar(t, iface)[..., k], uL.shape)
    if sign > 0:
        return np.maximum(fk(np.maximum(uL, us)), fk(np.minimum(uR, us)))
    return np.minimum(fk(np.minimum(uL, us)), fk(np.maximum(uR, us)))


def _sweep(flux: Flux, grid: Grid, t: float, u: np.ndarray, dt: float, k: int,
           iface: np.ndarray, scheme: str = "llf") -> np.ndarray:
    """Conservative update along axis ``k`` with outflow ghost cells."""
    pad = [(0, 0)] * grid.dim
    pad[k] = (1, 1)
    ue = np.pad(u, pad, mode="edge")
    lo = [slice(None)] * grid.dim
    hi = [slice(None)] * grid.dim
    lo[k] = slice(None, -1)
    hi[k] = slice(1, None)
    uL, uR = ue[tuple(lo)], ue[tuple(hi)]
    F = (_godunov if scheme == "godunov" else _llf)(flux, t, iface, uL, uR, k)
    return u - dt / grid.spacing * (F[tuple(hi)] - F[tuple(lo)])


def _interfaces(grid: Grid, k: int) -> np.ndarray:
    """Coordinates of the cell faces normal to axis ``k`` (one more than cells along ``k``)."""
    axes = grid.axes()
    faces = grid.origin[k] + grid.spacing * np.arange(grid.extents[k] + 1)
    axes = [faces if j == k else a for j, a in enumerate(axes)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _band(grid: Grid, width: int) -> np.ndarray:
    band = np.zeros(grid.shape, dtype=bool)
    for k in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[k] = slice(0, width)
        band[tuple(sl)] = True
        sl[k] = slice(-width, None)
        band[tuple(sl)] = True
    return band


def stable_dt(flux: Flux, u: Field, cfl: float = 0.45, t: float | None = None) -> float:
    X = u.grid.centers()
    t = u.time if t is None else t
    smax = max(_axis_speed(flux, t, X, u.values, k) for k in range(u.grid.dim))
    return math.inf if smax == 0 else cfl * u.grid.spacing / smax


def solve(flux: Flux, u0: Field, T: float, cfg: SchemeConfig | None = None) -> Trajectory:
    """Advance ``u0`` to time ``u0.time + T`` and return the stored fields."""
    cfg = cfg or SchemeConfig()
    grid = u0.grid
    if flux.dim != grid.dim:
        raise GridMismatch(f"flux is {flux.dim}D but the grid is {grid.dim}D")
    if T < 0:
        raise ValueError("T must be nonnegative")
    if cfg.scheme == "godunov" and (flux.convexity is None or flux.ustar is None):
        raise ValueError(f"flux {flux.name!r} does not declare the convexity the Godunov flux needs")
    t0 = u0.time
    ifaces = [_interfaces(grid, k) for k in range(grid.dim)]
    X = grid.centers()
    band = _band(grid, cfg.overflow_margin)
    guard = not np.any(np.abs(u0.values[band]) > cfg.overflow_tol)
    targets = t0 + T * np.arange(1, cfg.store + 1) / cfg.store if T > 0 else np.array([])
    u = u0.values.copy()
    t = t0
    fields = [Field(grid, t0, u.copy())]
    steps = 0
    max_courant = 0.0
    started = _time.perf_counter()
    for target in targets:
        while t < target - 1e-14 * max(1.0, abs(target)):
            smax = max(_axis_speed(flux, t, X, u, k) for k in range(grid.dim))
            dt_stable = math.inf if smax == 0 else cfg.cfl * grid.spacing / smax
            if cfg.dt is not None:
                if cfg.dt > dt_stable * (1 + 1e-12):
                    raise CFLViolation(f"dt={cfg.dt:.4g} exceeds the stable step {dt_stable:.4g} at t={t:.4g}")
                dt = cfg.dt
            else:
                dt = dt_stable
            dt = min(dt, target - t)
            u = _step(flux, grid, t, u, dt, ifaces, cfg.scheme)
            max_courant = max(max_courant, dt * smax / grid.spacing)
            t = target if abs(target - (t + dt)) < 1e-14 * max(1.0, abs(target)) else t + dt
            steps += 1
            if guard and np.any(np.abs(u[band]) > cfg.overflow_tol):
                raise SupportOverflow(f"solution reached the grid boundary at t={t:.4g}")
            if not np.all(np.isfinite(u)):
                raise FloatingPointError(f"non-finite values at t={t:.4g}")
        fields.append(Field(grid, float(target), u.copy()))
    meta = {"flux": flux.name, "flux_params": flux.describe(), "cfl": cfg.cfl, "steps": steps,
            "max_courant": max_courant, "scheme": cfg.scheme,
            "splitting": "strang" if grid.dim == 2 else "none",
            "runtime": _time.perf_counter() - started}
    return Trajectory(fields, meta)


def _step(flux, grid, t, u, dt, ifaces, scheme="llf"):
    if grid.dim == 1:
        return _sweep(flux, grid, t, u, dt, 0, ifaces[0], scheme)
    u = _sweep(flux, grid, t, u, 0.5 * dt, 0, ifaces[0], scheme)
    u = _sweep(flux, grid, t, u, dt, 1, ifaces[1], scheme)
    return _sweep(flux, grid, t + 0.5 * dt, u, 0.5 * dt, 0, ifaces[0], scheme)


def l1_distance(u: Field, v: Field, K: GridSet | None = None) -> float:
    """``integral over K of |u - v|`` (whole grid when ``K`` is omitted)."""
    if u.grid != v.grid or (K is not None and K.grid != u.grid):
        raise GridMismatch("fields and set must share one grid")
    if abs(u.time - v.time) > 1e-9 * max(1.0, abs(u.time)):
        raise ValueError(f"fields at different times {u.time} and {v.time}")
    d = np.abs(u.values - v.values)
    if K is not None:
        d = d[K.mask]
    return float(d.sum() * u.grid.cell_volume)


def total_mass(u: Field) -> float:
    return float(u.values.sum() * u.grid.cell_volume)


def total_variation(u: Field) -> float:
    return float(sum(np.abs(np.diff(u.values, axis=k)).sum() for k in range(u.grid.dim)))


@dataclass
class BoundsReport:
    passed: bool
    worst_violation: float
    tol: float
    rows: list

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst_violation": self.worst_violation, "tol": self.tol,
                "rows": self.rows}


def verify_bounds(traj: Trajectory, env, tol: float = 1e-8) -> BoundsReport:
    """Compare the per-time extrema of ``traj`` with ``[a(t) - tol, b(t) + tol]``.

    ``worst_violation`` is the largest amount by which a value leaves
    ``[a(t), b(t)]`` (negative when everything is strictly inside).
    """
    rows = []
    worst = -math.inf
    for f in traj.fields:
        a, b = env.a(f.time), env.b(f.time)
        lo, hi = float(f.values.min()), float(f.values.max())
        viol = max(a - lo, hi - b)
        worst = max(worst, viol)
        rows.append({"t": f.time, "min": lo, "max": hi, "a": a, "b": b, "violation": viol})
    return BoundsReport(worst <= tol, worst, tol, rows)
