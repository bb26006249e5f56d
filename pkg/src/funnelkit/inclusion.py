"""Velocity sets, solution-bound envelopes and integral funnels.

Reachable sets of ``y' in F(t, y)`` are propagated as the sublevel set
``{phi <= 0}`` of a distance-like function.  One step replaces ``phi`` by
``min_v phi(y - dt v)`` with the foot point interpolated upwind, the minimum
taken over sampled extreme velocities of ``F`` (plus ``0`` when ``0`` lies in
``F``).  The update is monotone, so inclusion between initial sets carries over
to every slice.  Two corrections keep the representation honest:

* seed points, one per cell of the initial set, follow genuine trajectories of
  the inclusion and mark the cells around them, so thin sets (points, curves)
  are not smeared away by the upwind interpolation;
* after each step ``phi`` is clamped into the bracket a signed distance to the
  current mask must satisfy, which stops flat plateaus from stalling a front.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import CFLViolation, EmptySet, SupportOverflow
from .fluxes import Flux
from .geometry import Grid, GridSet, signed_distance, sym_diff_measure
from .storage import read_index, read_raster, write_index, write_raster

_CFL_SLACK = 1e-9


# --- velocity sets ----------------------------------------------------------

def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain); collinear input gives a segment."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


@dataclass(frozen=True, eq=False)
class VelocitySet:
    """Convex compact set of velocities: an interval in 1D, a CCW polygon in 2D."""

    dim: int
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, self.dim)
        if len(v) == 0:
            raise ValueError("a velocity set needs at least one vertex")
        if self.dim == 1:
            v = np.array([[v.min()], [v.max()]])
        object.__setattr__(self, "vertices", v)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "VelocitySet":
        if lo > hi:
            raise ValueError("interval with lo > hi")
        return cls(1, np.array([[lo], [hi]]))

    @classmethod
    def hull(cls, points) -> "VelocitySet":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1 or pts.shape[-1] == 1:
            pts = pts.reshape(-1)
            return cls.interval(pts.min(), pts.max())
        return cls(2, convex_hull_2d(pts))

    @property
    def lo(self) -> float:
        return float(self.vertices[0, 0])

    @property
    def hi(self) -> float:
        return float(self.vertices[-1, 0])

    def support(self, p) -> float:
        return hamiltonian(self, p)

    def contains(self, v, tol: float = 1e-12) -> bool:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if self.dim == 1:
            return self.lo - tol <= v[0] <= self.hi + tol
        V = self.vertices
        if len(V) == 1:
            return bool(np.linalg.norm(V[0] - v) <= tol)
        if len(V) == 2:
            a, b = V
            s = np.clip(np.dot(v - a, b - a) / max(np.dot(b - a, b - a), 1e-300), 0, 1)
            return bool(np.linalg.norm(a + s * (b - a) - v) <= tol)
        e = np.roll(V, -1, axis=0) - V
        w = v - V
        return bool(np.all(e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0] >= -tol))


def hamiltonian(F: VelocitySet, p) -> float:
    """Support function ``max{p . v : v in F}``."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return float((F.vertices @ p).max())


def disk_polygon(radius: float, nvert: int = 32, circumscribed: bool = True) -> np.ndarray:
    """Regular polygon around ``B(0, radius)``; circumscribed so it contains the disk."""
    ang = 2 * np.pi * np.arange(nvert) / nvert
    rad = radius / math.cos(math.pi / nvert) if circumscribed else radius
    return rad * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def disk_velocity_set(center, radius: float, nvert: int = 32) -> VelocitySet:
    c = np.asarray(center, dtype=float)
    if radius == 0:
        return VelocitySet(2, c[None, :])
    return VelocitySet(2, c + disk_polygon(radius, nvert))


# --- envelopes --------------------------------------------------------------

class BoundsEnvelope:
    """Lower and upper solution bounds ``a(t) <= u <= b(t)``."""

    kind = "abstract"

    def a(self, t):
        raise NotImplementedError

    def b(self, t):
        raise NotImplementedError

    def interval(self, t0: float, t1: float) -> tuple:
        """``(min a, max b)`` over ``[t0, t1]``."""
        ts = np.linspace(t0, t1, 65)
        return float(np.min(self.a(ts))), float(np.max(self.b(ts)))

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass
class ConstantEnvelope(BoundsEnvelope):
    a0: float
    b0: float
    kind = "constant"

    def __post_init__(self):
        if self.a0 > self.b0:
            raise ValueError("a0 > b0")

    def a(self, t):
        return np.full(np.shape(t), float(self.a0)) if np.ndim(t) else float(self.a0)

    def b(self, t):
        return np.full(np.shape(t), float(self.b0)) if np.ndim(t) else float(self.b0)

    def interval(self, t0, t1):
        return float(self.a0), float(self.b0)

    def describe(self):
        return {"kind": self.kind, "a0": self.a0, "b0": self.b0}


@dataclass
class ExponentialEnvelope(BoundsEnvelope):
    """Exponential bounds with the sign-dependent case split on ``a0`` and ``b0``.

    With ``eps > 0`` the starting values become ``a0 - eps`` and ``b0 + eps``
    while the case split still follows the signs of ``a0`` and ``b0``.
    """

    a0: float
    b0: float
    L1: float
    n: int = 1
    eps: float = 0.0

    def __post_init__(self):
        if self.a0 > self.b0:
            raise ValueError("a0 > b0")
        if self.L1 < 0 or self.eps < 0:
            raise ValueError("L1 and eps must be nonnegative")

    @property
    def kind(self):
        return "perturbed" if self.eps > 0 else "exponential"

    def a(self, t):
        rate = self.n * self.L1
        sign = -1.0 if self.a0 >= 0 else 1.0
        out = (self.a0 - self.eps) * np.exp(sign * rate * np.asarray(t, dtype=float))
        return out if np.ndim(out) else float(out)

    def b(self, t):
        rate = self.n * self.L1
        sign = 1.0 if self.b0 >= 0 else -1.0
        out = (self.b0 + self.eps) * np.exp(sign * rate * np.asarray(t, dtype=float))
        return out if np.ndim(out) else float(out)

    def interval(self, t0, t1):
        # both bounds are monotone in t
        a = min(self.a(t0), self.a(t1))
        b = max(self.b(t0), self.b(t1))
        return float(a), float(b)

    def describe(self):
        return {"kind": self.kind, "a0": self.a0, "b0": self.b0, "L1": self.L1, "n": self.n,
                "eps": self.eps}


class PiecewiseEnvelope(BoundsEnvelope):
    """Step envelope: on ``[kh, (k+1)h)`` the bounds are the min of ``a`` and max of ``b``."""

    kind = "piecewise"

    def __init__(self, base: BoundsEnvelope, h: float, samples: int = 64):
        if not h > 0:
            raise ValueError("step width must be positive")
        self.base = base
        self.h = float(h)
        self.samples = max(int(samples), 64)
        self._steps: dict = {}

    def step(self, k: int) -> tuple:
        if k not in self._steps:
            ts = np.linspace(k * self.h, (k + 1) * self.h, self.samples + 1)
            self._steps[k] = (float(np.min(self.base.a(ts))), float(np.max(self.base.b(ts))))
        return self._steps[k]

    def _k(self, t):
        return max(int(math.floor(t / self.h + 1e-9)), 0)

    def a(self, t):
        if np.ndim(t):
            return np.array([self.step(self._k(s))[0] for s in np.ravel(t)]).reshape(np.shape(t))
        return self.step(self._k(t))[0]

    def b(self, t):
        if np.ndim(t):
            return np.array([self.step(self._k(s))[1] for s in np.ravel(t)]).reshape(np.shape(t))
        return self.step(self._k(t))[1]

    def interval(self, t0, t1):
        k0 = self._k(t0)
        k1 = max(k0, int(math.ceil(t1 / self.h - 1e-9)) - 1)
        steps = [self.step(k) for k in range(k0, k1 + 1)]
        return min(s[0] for s in steps), max(s[1] for s in steps)

    def describe(self):
        return {"kind": self.kind, "h": self.h, "base": self.base.describe()}


def envelope_constant(a0: float, b0: float) -> ConstantEnvelope:
    return ConstantEnvelope(a0, b0)


def envelope_exponential(a0: float, b0: float, L1: float, n: int = 1) -> ExponentialEnvelope:
    return ExponentialEnvelope(a0, b0, L1, n)


def envelope_perturbed(a0: float, b0: float, L1: float, n: int, eps: float) -> ExponentialEnvelope:
    return ExponentialEnvelope(a0, b0, L1, n, eps)


def envelope_piecewise(env: BoundsEnvelope, h: float, samples: int = 64) -> PiecewiseEnvelope:
    return PiecewiseEnvelope(env, h, samples)


def velocity_set(flux: Flux, t: float, x, env: BoundsEnvelope, nsamp: int = 64) -> VelocitySet:
    """Hull of ``du f(t, x, u)`` for ``u`` sampled uniformly in ``[a(t), b(t)]``."""
    if nsamp < 2:
        raise ValueError("nsamp must be at least 2")
    a, b = env.a(t), env.b(t)
    if a > b:
        raise ValueError(f"envelope inverted at t={t}: a={a} > b={b}")
    us = np.linspace(a, b, nsamp)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = flux.dudf(t, np.broadcast_to(x, (nsamp, flux.dim)), us)
    return VelocitySet.hull(g)


# --- velocity fields used for propagation -----------------------------------

class ConstantField:
    """The same velocity set at every point and time."""

    def __init__(self, vset: VelocitySet):
        self.vset = vset
        self.dim = vset.dim
        self.uniform = True

    def candidates(self, t0, t1, X):
        V = self.vset.vertices
        return np.broadcast_to(V, X.shape[:-1] + V.shape)

    def describe(self):
        return {"kind": "constant", "vertices": self.vset.vertices.tolist()}


class FluxField:
    """``co du f(t, x, [a, b])`` with the bounds taken over each time step."""

    def __init__(self, flux: Flux, env: BoundsEnvelope, nsamp: int = 64):
        if nsamp < 2:
            raise ValueError("nsamp must be at least 2")
        self.flux = flux
        self.env = env
        self.nsamp = nsamp
        self.dim = flux.dim

    def candidates(self, t0, t1, X):
        lo, hi = self.env.interval(min(t0, t1), max(t0, t1))
        if lo > hi:
            raise ValueError(f"envelope inverted on [{t0}, {t1}]")
        # du f does not depend on u for fluxes linear in u
        m = 1 if self.flux.convexity is not None and not any(self.flux.convexity) else self.nsamp
        us = np.linspace(lo, hi, m)
        g = np.asarray(self.flux.dudf(0.5 * (t0 + t1), X[..., None, :], us), dtype=float)
        g = np.broadcast_to(g, X.shape[:-1] + (m, self.dim))
        if self.dim == 1:
            return np.concatenate([g.min(axis=-2, keepdims=True), g.max(axis=-2, keepdims=True)], axis=-2)
        return g

    def describe(self):
        return {"kind": "flux", "flux": self.flux.describe(), "envelope": self.env.describe(),
                "nsamp": self.nsamp}


class ReversedField:
    """``-F(tau + tau0 - t, y)``, the right-hand side of the time-reversed inclusion."""

    def __init__(self, inner, tau0: float, tau: float):
        self.inner = inner
        self.tau0 = tau0
        self.tau = tau
        self.dim = inner.dim
        self.uniform = getattr(inner, "uniform", False)

    def candidates(self, t0, t1, X):
        s = self.tau + self.tau0
        return -self.inner.candidates(s - t1, s - t0, X)

    def describe(self):
        return {"kind": "reversed", "inner": self.inner.describe()}


def as_field(source, env: BoundsEnvelope | None = None, nsamp: int = 64):
    if isinstance(source, Flux):
        if env is None:
            raise ValueError("a flux needs a bounds envelope to define velocity sets")
        return FluxField(source, env, nsamp)
    if isinstance(source, VelocitySet):
        return ConstantField(source)
    if hasattr(source, "candidates"):
        return source
    raise TypeError(f"cannot build a velocity field from {type(source).__name__}")


# --- funnels ----------------------------------------------------------------

@dataclass(eq=False)
class Funnel:
    """Slices ``Omega_t`` of a forward or backward integral funnel at increasing times."""

    direction: str
    times: np.ndarray
    slices: list
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.slices[0].grid

    def __len__(self):
        return len(self.slices)

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        step = np.min(np.diff(self.times)) if len(self.times) > 1 else 1.0
        if abs(self.times[k] - t) > 1e-6 * max(step, 1e-12):
            raise KeyError(f"no slice stored at t={t}")
        return k

    def slice_at(self, t: float) -> GridSet:
        return self.slices[self.index_of(t)]

    @property
    def initial(self) -> GridSet:
        """The slice the propagation started from (``K``)."""
        return self.slices[0] if self.direction == "forward" else self.slices[-1]

    @property
    def terminal(self) -> GridSet:
        return self.slices[-1] if self.direction == "forward" else self.slices[0]

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for k, s in enumerate(self.slices):
            name = f"slice_{k:05d}.fnlr"
            write_raster(directory / name, s)
            files.append(name)
        write_index(directory, {"kind": "funnel", "direction": self.direction,
                                "times": [float(t) for t in self.times], "files": files,
                                "grid": self.grid.to_dict(), "meta": _jsonable(self.meta)})
        return directory

    @classmethod
    def load(cls, directory) -> "Funnel":
        directory = Path(directory)
        idx = read_index(directory)
        slices = [read_raster(directory / f) for f in idx["files"]]
        return cls(idx["direction"], np.asarray(idx["times"], dtype=float), slices, idx.get("meta", {}))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _contains_origin(cand: np.ndarray) -> np.ndarray:
    """Whether 0 lies in the hull of the candidate velocities (per cell).

    In 2D the hull misses the origin exactly when all candidates fit in an open
    half-plane, i.e. when some angular gap between them exceeds pi.
    """
    if cand.shape[-1] == 1:
        c = cand[..., 0]
        return (c.min(axis=-1) <= 0) & (c.max(axis=-1) >= 0)
    r = np.hypot(cand[..., 0], cand[..., 1])
    ang = np.sort(np.arctan2(cand[..., 1], cand[..., 0]), axis=-1)
    gaps = np.diff(ang, axis=-1, append=ang[..., :1] + 2 * np.pi)
    return (gaps.max(axis=-1) <= np.pi + 1e-12) | np.any(r <= 1e-14, axis=-1)


def _augment(cand: np.ndarray) -> np.ndarray:
    extra = np.where(_contains_origin(cand)[..., None], 0.0, cand[..., 0, :])
    return np.concatenate([cand, extra[..., None, :]], axis=-2)


class _Propagator:
    """Forward propagation of a reachable set on a fixed grid."""

    def __init__(self, field_, K: GridSet, use_seeds: bool = True, backend=None):
        if K.empty:
            raise EmptySet("the initial set of a funnel must be nonempty")
        if field_.dim != K.grid.dim:
            raise ValueError("velocity field and grid dimensions differ")
        self.field = field_
        self.grid = K.grid
        self.h = K.grid.spacing
        self.X = K.grid.centers()
        self.phi = signed_distance(K)
        self.seeds = K.points().copy() if use_seeds else None
        self.backend = backend
        self.cmax = 0.0
        self.substeps = 0

    def step(self, t0: float, t1: float) -> None:
        dt = t1 - t0
        h = self.h
        vel, speed, smax = self._velocities(t0, t1)
        self.cmax = max(self.cmax, speed)
        if dt * speed > h * (1 + _CFL_SLACK):
            raise CFLViolation(f"dt*cmax = {dt * speed:.4g} exceeds the spacing {h:.4g} near t={t0:.4g}")
        nsub = max(1, int(math.ceil(dt * smax / h - 1e-12)))
        lam = dt / (nsub * h)
        vel = np.ascontiguousarray(vel)
        for _ in range(nsub):
            self.phi = kernels.hj_step(self.phi, vel, lam, backend=self.backend)
        self.substeps += nsub
        if self.seeds is not None:
            self._advance_seeds(t0, t1, nsub)
            self._imprint_seeds()
        self._clamp()
        mask = self.phi <= 0
        if not mask.any():
            raise EmptySet(f"reachable set vanished at t={t1:.4g}")
        edge = np.zeros_like(mask)
        for k in range(self.grid.dim):
            sl = [slice(None)] * self.grid.dim
            sl[k] = 0
            edge[tuple(sl)] = True
            sl[k] = -1
            edge[tuple(sl)] = True
        if np.any(mask & edge):
            raise SupportOverflow(f"funnel reached the grid boundary at t={t1:.4g}")

    def _velocities(self, t0, t1):
        """Augmented candidates, the largest speed and the largest 1-norm of a candidate."""
        if hasattr(self.field, "velocities"):
            return self.field.velocities(t0, t1, self.X)
        if getattr(self.field, "uniform", False):
            one = np.asarray(self.field.candidates(t0, t1, self.X[(0,) * self.grid.dim]), dtype=float)
            aug = _augment(one)
            vel = np.broadcast_to(aug, self.X.shape[:-1] + aug.shape)
        else:
            one = np.asarray(self.field.candidates(t0, t1, self.X), dtype=float)
            aug = vel = _augment(one)
        speed = float(np.sqrt((one * one).sum(axis=-1)).max())
        return vel, speed, float(np.abs(aug).sum(axis=-1).max())

    def _selection(self, t0, t1, pts):
        return np.asarray(self.field.candidates(t0, t1, pts), dtype=float).mean(axis=-2)

    def _advance_seeds(self, t0, t1, nsub):
        dt = (t1 - t0) / nsub
        s = self.seeds
        for j in range(nsub):
            a = t0 + j * dt
            k1 = self._selection(a, a + dt, s)
            k2 = self._selection(a, a + dt, s + 0.5 * dt * k1)
            s = s + dt * k2
        self.seeds = s

    def _imprint_seeds(self):
        g = self.grid
        h = self.h
        r = 0.5 * h * math.sqrt(g.dim) * (1 + 1e-9)
        org = np.asarray(g.origin)
        base = np.floor((self.seeds - org) / h - 0.5).astype(int)
        ext = np.asarray(g.extents)
        for off in np.ndindex(*(2,) * g.dim):
            idx = base + np.asarray(off)
            ok = np.all((idx >= 0) & (idx < ext), axis=-1)
            if not ok.any():
                continue
            idx = idx[ok]
            centers = org + (idx + 0.5) * h
            d = np.linalg.norm(centers - self.seeds[ok], axis=-1) - r
            np.minimum.at(self.phi, tuple(idx.T), d)

    def _clamp(self):
        h = self.h
        mask = self.phi <= 0
        d_out = ndimage.distance_transform_edt(~mask) * h
        inner = np.pad(mask, 1, constant_values=False)
        d_in = (ndimage.distance_transform_edt(inner) * h)[(slice(1, -1),) * self.grid.dim]
        self.phi = np.where(mask, np.minimum(self.phi, h - d_in), np.maximum(self.phi, d_out - h))

    def current(self, keep_sdf: bool) -> GridSet:
        mask = self.phi <= 0
        return GridSet(self.grid, mask, self.phi.copy() if keep_sdf else None)


def propagate_funnel(source, K: GridSet, tau0: float, tau: float, dt: float,
                     direction: str = "forward", env: BoundsEnvelope | None = None,
                     nsamp: int = 64, store_every: int = 1, seeds: bool = True,
                     keep_sdf: bool = False, backend=None) -> Funnel:
    """Integral funnel of ``y' in F(t, y)`` on ``[tau0, tau]``.

    ``source`` is a :class:`Flux` (with ``env``, giving ``co du f(t, x, [a(t), b(t)])``),
    a constant :class:`VelocitySet`, or any object with a ``candidates(t0, t1, X)``
    method returning sampled velocities of shape ``X.shape[:-1] + (m, dim)``.

    Forward funnels start from ``K`` at ``tau0``.  Backward funnels end in ``K``
    at ``tau``; they are computed by propagating ``-F(tau + tau0 - t, y)``
    forward and relabelling the slices.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    if not tau0 < tau:
        raise ValueError("need tau0 < tau")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if K.empty:
        raise EmptySet("the initial set of a funnel must be nonempty")
    field_ = as_field(source, env, nsamp)
    nsteps = max(1, int(math.ceil((tau - tau0) / dt - 1e-9)))
    times = np.linspace(tau0, tau, nsteps + 1)
    run_field = field_ if direction == "forward" else ReversedField(field_, tau0, tau)
    prop = _Propagator(run_field, K, use_seeds=seeds, backend=backend)
    started = _time.perf_counter()
    slices = [GridSet(K.grid, K.mask.copy(), signed_distance(K) if keep_sdf else None)]
    kept = [0]
    for k in range(nsteps):
        prop.step(times[k], times[k + 1])
        if (k + 1) % store_every == 0 or k + 1 == nsteps:
            slices.append(prop.current(keep_sdf))
            kept.append(k + 1)
    stored = times[kept]
    meta = {"dt": float(times[1] - times[0]), "steps": nsteps, "substeps": prop.substeps,
            "cmax": prop.cmax, "field": field_.describe(), "backend": backend or kernels.BACKEND,
            "runtime": _time.perf_counter() - started}
    if direction == "backward":
        # slice computed at reversed time s belongs to t = tau + tau0 - s
        stored = (tau + tau0 - stored)[::-1]
        slices = slices[::-1]
        stored[0], stored[-1] = tau0, tau
    return Funnel(direction, np.asarray(stored, dtype=float), slices, meta)


@dataclass
class ConvergenceRow:
    h: float
    sym_diff: float
    sym_diff_max: float


def funnel_convergence(source, K: GridSet, env: BoundsEnvelope, tau0: float, tau: float, dt: float,
                       h_list: Sequence[float], direction: str = "forward", nsamp: int = 64,
                       backend=None) -> list:
    """Symmetric difference between funnels for ``env`` and its step approximations.

    For each ``h`` returns the measure at the terminal slice and the maximum
    over all slices.
    """
    h_list = list(h_list)
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be decreasing")
    ref = propagate_funnel(source, K, tau0, tau, dt, direction, env=env, nsamp=nsamp, backend=backend)
    rows = []
    for h in h_list:
        fh = propagate_funnel(source, K, tau0, tau, dt, direction, env=envelope_piecewise(env, h),
                              nsamp=nsamp, backend=backend)
        per = [sym_diff_measure(a, b) for a, b in zip(ref.slices, fh.slices)]
        terminal = sym_diff_measure(ref.terminal, fh.terminal)
        rows.append(ConvergenceRow(float(h), terminal, float(max(per))))
    return rows


@dataclass
class ResidualStats:
    median: float
    mean: float
    p90: float
    max: float
    count: int
    skipped: int
    residuals: np.ndarray = field(repr=False)


def proximal_residual(funnel: Funnel, source, env: BoundsEnvelope | None = None, nsamp: int = 64,
                      skip_end: int = 2, smoothing: float = 1.0) -> ResidualStats:
    """Hamiltonian residual on the lateral boundary of a funnel.

    The space-time outward normal ``(theta, zeta)`` is the gradient of the
    signed distance to the stacked slices (time sampled at the slice spacing,
    lightly smoothed), normalised so that ``|zeta| = 1``.  Forward funnels
    report ``|theta + H(t, x, zeta)|``; backward funnels ``|-theta + H(t, x, -zeta)|``.
    """
    M = len(funnel.slices)
    if M < 3:
        raise ValueError("need at least three slices")
    field_ = as_field(source, env, nsamp)
    grid = funnel.grid
    h = grid.spacing
    dts = np.diff(funnel.times)
    dt = float(dts.mean())
    body = np.stack([s.mask for s in funnel.slices])
    pad = [(0, 0)] + [(1, 1)] * grid.dim
    body_p = np.pad(body, pad, constant_values=False)
    sampling = (dt,) + (h,) * grid.dim
    d_out = ndimage.distance_transform_edt(~body_p, sampling=sampling)
    d_in = ndimage.distance_transform_edt(body_p, sampling=sampling)
    sdf = (d_out - d_in)[(slice(None),) + (slice(1, -1),) * grid.dim]
    if smoothing > 0:
        sdf = ndimage.gaussian_filter(sdf, smoothing, mode="nearest")
    grads = np.gradient(sdf, dt, *([h] * grid.dim))
    theta = grads[0]
    zeta = np.stack(grads[1:], axis=-1)

    X = grid.centers()
    residuals = []
    skipped = 0
    sign = 1.0 if funnel.direction == "forward" else -1.0
    for k in range(skip_end, M - skip_end):
        m = funnel.slices[k].mask
        lateral = m & ~ndimage.binary_erosion(m, border_value=0)
        if not lateral.any():
            continue
        th = theta[k][lateral]
        ze = zeta[k][lateral]
        nz = np.linalg.norm(ze, axis=-1)
        ok = nz > 1e-8
        skipped += int((~ok).sum())
        th = th[ok] / nz[ok]
        ze = ze[ok] / nz[ok][:, None]
        t = funnel.times[k]
        t0 = funnel.times[max(k - 1, 0)]
        t1 = funnel.times[min(k + 1, M - 1)]
        cand = np.asarray(field_.candidates(t0, t1, X[lateral][ok]), dtype=float)
        H = np.einsum("nmk,nk->nm", cand, sign * ze).max(axis=-1)
        residuals.append(np.abs(sign * th + H))
        del t
    r = np.concatenate(residuals) if residuals else np.zeros(0)
    if r.size == 0:
        return ResidualStats(float("nan"), float("nan"), float("nan"), float("nan"), 0, skipped, r)
    return ResidualStats(float(np.median(r)), float(r.mean()), float(np.percentile(r, 90)),
                         float(r.max()), int(r.size), skipped, r)
