"""Flux families ``f(t, x, u)`` for scalar conservation laws.

Evaluators are vectorised: ``x`` has shape ``(..., dim)``, ``u`` broadcasts
against ``x[..., 0]`` and results have shape ``(..., dim)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Flux:
    """A flux together with ``du f`` and the constants the estimates need.

    ``L1`` is a Lipschitz modulus of ``(t, x) -> du f(t, x, u)``, uniform in ``u``.
    ``convexity`` (per axis: +1 convex, -1 concave, 0 linear in ``u``) and
    ``ustar(t, x)`` (per-axis critical point of ``u -> f_k``) enable the exact
    Godunov flux; fluxes without them only support Lax-Friedrichs.
    """

    name: str
    dim: int
    f: Callable
    dudf: Callable
    L1: float
    satisfies_f4: bool = True
    x_dependent: bool = False
    params: dict = field(default_factory=dict)
    convexity: tuple | None = None
    ustar: Callable | None = None

    def __call__(self, t, x, u):
        return self.f(t, x, u)

    def speed_bound(self, grid, lo: float, hi: float, t0: float = 0.0, t1: float | None = None,
                    nsamp: int = 33) -> float:
        """``sup |du f|`` sampled over the grid centers, ``u`` in ``[lo, hi]`` and ``t`` in ``[t0, t1]``."""
        X = grid.centers().reshape(-1, 1, grid.dim)
        us = np.linspace(lo, hi, nsamp)[None, :]
        ts = [t0] if t1 is None else np.linspace(t0, t1, 5)
        best = 0.0
        for t in ts:
            g = self.dudf(t, X, us)
            best = max(best, float(np.linalg.norm(g, axis=-1).max()))
        return best

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "L1": self.L1, **self.params}


def _along(direction, dim):
    e = np.zeros(dim) if direction is None else np.asarray(direction, dtype=float)
    if direction is None:
        e[:] = 1.0 / np.sqrt(dim) if dim > 1 else 1.0
    return e


def burgers(dim: int = 1, direction=None) -> Flux:
    """``f = u^2/2 * e``; in 2D ``e`` defaults to the diagonal unit vector."""
    e = _along(direction, dim)

    def f(t, x, u):
        u = np.asarray(u, dtype=float)
        return (0.5 * u * u)[..., None] * e

    def dudf(t, x, u):
        u = np.asarray(u, dtype=float)
        return u[..., None] * e

    def ustar(t, x):
        return np.zeros(np.shape(x))

    return Flux("burgers", dim, f, dudf, L1=0.0, params={"direction": e.tolist()},
                convexity=tuple(int(np.sign(c)) for c in e), ustar=ustar)


def linear_advection(velocity) -> Flux:
    c = np.atleast_1d(np.asarray(velocity, dtype=float))

    def f(t, x, u):
        return np.asarray(u, dtype=float)[..., None] * c

    def dudf(t, x, u):
        shape = np.broadcast_shapes(np.shape(u), np.shape(x)[:-1])
        return np.broadcast_to(c, shape + (c.size,)).copy()

    return Flux("advection", c.size, f, dudf, L1=0.0, params={"velocity": c.tolist()},
                convexity=(0,) * c.size, ustar=lambda t, x: np.zeros(np.shape(x)))


def heterogeneous(v: Callable, v_lipschitz: float, G: Callable | None = None,
                  dG: Callable | None = None, dim: int = 1, name: str = "heterogeneous",
                  params: dict | None = None, quadratic=None) -> Flux:
    """``f = v(t, x) u + G(u)`` with ``G(0) = 0``.

    ``v(t, x)`` returns ``(..., dim)``; ``G`` and ``dG`` map ``u`` to ``(..., dim)``.
    ``v_lipschitz`` bounds the Lipschitz modulus of ``v`` in ``(t, x)``.
    Passing ``quadratic = q`` declares ``G(u) = q u^2 / 2`` (per axis), which
    enables the Godunov flux.
    """
    if (G is None) != (dG is None):
        raise ValueError("give both G and dG or neither")

    def f(t, x, u):
        u = np.asarray(u, dtype=float)
        out = v(t, x) * u[..., None]
        if G is not None:
            out = out + G(u)
        return out

    def dudf(t, x, u):
        u = np.asarray(u, dtype=float)
        vv = v(t, x)
        if G is None:
            shape = np.broadcast_shapes(u.shape, vv.shape[:-1])
            return np.broadcast_to(vv, shape + (dim,)).copy()
        return vv + dG(u)

    convexity = ustar = None
    if G is None:
        convexity, ustar = (0,) * dim, (lambda t, x: np.zeros(np.shape(x)))
    elif quadratic is not None:
        q = np.broadcast_to(np.asarray(quadratic, dtype=float), (dim,))
        convexity = tuple(int(np.sign(c)) for c in q)
        safe = np.where(q == 0, 1.0, q)

        def ustar(t, x):
            return np.where(q == 0, 0.0, -v(t, x) / safe)

    return Flux(name, dim, f, dudf, L1=float(v_lipschitz), x_dependent=True, params=dict(params or {}),
                convexity=convexity, ustar=ustar)


def shear_flux(amplitude: float = 0.5, wavenumber: float = 1.0) -> Flux:
    """1D ``f = A sin(k x) u + u^2/2``; ``du f = A sin(k x) + u`` and ``L1 = A k``."""

    def v(t, x):
        return amplitude * np.sin(wavenumber * x)

    return heterogeneous(
        v, abs(amplitude * wavenumber),
        G=lambda u: (0.5 * u * u)[..., None],
        dG=lambda u: u[..., None],
        dim=1, name="shear", params={"amplitude": amplitude, "wavenumber": wavenumber}, quadratic=1.0,
    )


def rotation_flux(omega: float = 1.0, center=(0.0, 0.0)) -> Flux:
    """2D ``f = omega * (-(y - cy), x - cx) u``; divergence free, ``L1 = |omega|``."""
    cx, cy = center

    def v(t, x):
        return omega * np.stack([-(x[..., 1] - cy), x[..., 0] - cx], axis=-1)

    return heterogeneous(v, abs(omega), dim=2, name="rotation",
                         params={"omega": omega, "center": list(center)})


def polynomial_flux_2d() -> Flux:
    """``f = (u^2/2, u^3/3)``, whose velocity curve is ``(u, u^2)``."""

    def f(t, x, u):
        u = np.asarray(u, dtype=float)
        return np.stack([0.5 * u * u, u**3 / 3.0], axis=-1)

    def dudf(t, x, u):
        u = np.asarray(u, dtype=float)
        u = np.broadcast_to(u, np.broadcast_shapes(u.shape, np.shape(x)[:-1]))
        return np.stack([u, u * u], axis=-1)

    return Flux("poly2d", 2, f, dudf, L1=0.0)


def estimate_lipschitz(flux: Flux, grid, lo: float, hi: float, t0: float = 0.0, t1: float = 1.0,
                       nsamp: int = 17) -> float:
    """Largest difference quotient of ``du f`` between neighbouring cells and times."""
    X = grid.centers()
    us = np.linspace(lo, hi, nsamp)
    ts = np.linspace(t0, t1, 5)
    h = grid.spacing
    best = 0.0
    for u in us:
        g = [flux.dudf(t, X, np.full(X.shape[:-1], u)) for t in ts]
        for k in range(grid.dim):
            d = np.diff(g[0], axis=k)
            best = max(best, float(np.linalg.norm(d, axis=-1).max()) / h)
        for a, b in zip(g[:-1], g[1:]):
            best = max(best, float(np.linalg.norm(b - a, axis=-1).max()) / (ts[1] - ts[0]))
    return best


FLUXES = {
    "burgers": lambda dim=1, **kw: burgers(dim, **kw),
    "advection": lambda velocity=1.0, **kw: linear_advection(velocity),
    "shear": lambda amplitude=0.5, wavenumber=1.0, **kw: shear_flux(amplitude, wavenumber),
    "rotation": lambda omega=1.0, center=(0.0, 0.0), **kw: rotation_flux(omega, center),
    "poly2d": lambda **kw: polynomial_flux_2d(),
}


def get_flux(name: str, **params) -> Flux:
    try:
        factory = FLUXES[name]
    except KeyError:
        raise ValueError(f"unknown flux {name!r}; choose from {sorted(FLUXES)}") from None
    return factory(**params)
