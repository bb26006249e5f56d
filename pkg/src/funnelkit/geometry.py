"""Compact sets on uniform Cartesian rasters.

A set is stored as a boolean mask over cell centers and is treated as closed:
a cell belongs to ``B(A, r)`` when the distance between its center and the
nearest center of ``A`` is at most ``r``.  Distances come from the exact
Euclidean distance transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptySet, GridMismatch

# relative slack used when comparing distances with radii (ties -> inclusion)
_TIE = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform isotropic grid in one or two dimensions.

    Cell ``i`` along axis ``k`` has center ``origin[k] + (i + 1/2) * spacing``.
    """

    dim: int
    origin: tuple
    spacing: float
    extents: tuple

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        extents = tuple(int(e) for e in np.atleast_1d(self.extents))
        if len(origin) != self.dim or len(extents) != self.dim:
            raise ValueError("origin and extents need one entry per axis")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if min(extents) < 2:
            raise ValueError("need at least two cells per axis")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def box(cls, lo, hi, cells) -> "Grid":
        """Grid covering ``[lo, hi]`` with ``cells`` cells along the first axis."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        cells = np.broadcast_to(np.atleast_1d(cells), lo.shape)
        h = (hi[0] - lo[0]) / cells[0]
        extents = [int(cells[0])]
        for k in range(1, lo.size):
            extents.append(int(round((hi[k] - lo[k]) / h)))
        return cls(dim=lo.size, origin=tuple(lo), spacing=h, extents=tuple(extents))

    @property
    def shape(self) -> tuple:
        return self.extents

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def upper(self) -> tuple:
        return tuple(o + self.spacing * e for o, e in zip(self.origin, self.extents))

    def axes(self) -> list:
        return [o + (np.arange(e) + 0.5) * self.spacing for o, e in zip(self.origin, self.extents)]

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``extents + (dim,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def index(self, point) -> tuple:
        """Index of the cell whose center is nearest to ``point``."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        idx = np.floor((p - np.asarray(self.origin)) / self.spacing).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.extents)):
            raise ValueError(f"point {p.tolist()} lies outside the grid")
        return tuple(int(i) for i in idx)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "origin": list(self.origin), "spacing": self.spacing,
                "extents": list(self.extents)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(dim=int(d["dim"]), origin=tuple(d["origin"]), spacing=float(d["spacing"]),
                   extents=tuple(d["extents"]))


@dataclass(frozen=True, eq=False)
class Raster:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("raster values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class GridSet:
    """Closed set given by the cell centers marked in ``mask``.

    ``sdf`` is an optional signed distance (negative inside, positive outside)
    whose sign agrees with the mask.
    """

    grid: Grid
    mask: np.ndarray
    sdf: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.grid.shape:
            raise ValueError(f"mask shape {m.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "mask", m)
        if self.sdf is not None:
            s = np.asarray(self.sdf, dtype=float)
            if s.shape != m.shape or np.any((s <= 0) != m):
                raise ValueError("sdf sign disagrees with mask")
            object.__setattr__(self, "sdf", s)

    @property
    def empty(self) -> bool:
        return not self.mask.any()

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    def complement(self) -> "GridSet":
        return GridSet(self.grid, ~self.mask)

    def union(self, other: "GridSet") -> "GridSet":
        _same_grid(self, other)
        return GridSet(self.grid, self.mask | other.mask)

    def intersection(self, other: "GridSet") -> "GridSet":
        _same_grid(self, other)
        return GridSet(self.grid, self.mask & other.mask)

    def issubset(self, other: "GridSet") -> bool:
        _same_grid(self, other)
        return not np.any(self.mask & ~other.mask)

    def with_sdf(self) -> "GridSet":
        return GridSet(self.grid, self.mask, signed_distance(self))

    def points(self) -> np.ndarray:
        """Centers of member cells, shape ``(count, dim)``."""
        return self.grid.centers()[self.mask]

    def __eq__(self, other):
        if not isinstance(other, GridSet):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.mask, other.mask)

    __hash__ = None


# --- constructors -----------------------------------------------------------

def empty_set(grid: Grid) -> GridSet:
    return GridSet(grid, np.zeros(grid.shape, dtype=bool))


def point_set(grid: Grid, x) -> GridSet:
    mask = np.zeros(grid.shape, dtype=bool)
    mask[grid.index(x)] = True
    return GridSet(grid, mask)


def ball(grid: Grid, center, radius: float) -> GridSet:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    d = np.linalg.norm(grid.centers() - c, axis=-1)
    return GridSet(grid, d <= radius + _TIE * grid.spacing)


def box_set(grid: Grid, lo, hi) -> GridSet:
    X = grid.centers()
    lo = np.atleast_1d(lo)
    hi = np.atleast_1d(hi)
    tol = _TIE * grid.spacing
    mask = np.all((X >= lo - tol) & (X <= hi + tol), axis=-1)
    return GridSet(grid, mask)


def segment_set(grid: Grid, a, b) -> GridSet:
    """Cells containing a point of the segment ``[a, b]``.

    The segment is sampled at a quarter of the spacing and each sample is
    assigned to the cell it falls in, so a segment lying on cell faces gives a
    single connected row rather than zero or two.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = int(math.ceil(np.linalg.norm(b - a) / (0.25 * grid.spacing))) + 1
    pts = a + np.linspace(0.0, 1.0, n)[:, None] * (b - a)
    idx = np.floor((pts - np.asarray(grid.origin)) / grid.spacing).astype(int)
    if np.any(idx < 0) or np.any(idx >= np.asarray(grid.extents)):
        raise ValueError("segment leaves the grid")
    mask = np.zeros(grid.shape, dtype=bool)
    mask[tuple(idx.T)] = True
    return GridSet(grid, mask)


# --- distances --------------------------------------------------------------

def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatch("operands live on different grids")


def _edt(mask: np.ndarray, h: float) -> np.ndarray:
    """Distance from every cell to the nearest ``False`` cell."""
    return ndimage.distance_transform_edt(mask) * h


def distance_field(A: GridSet) -> Raster:
    """Euclidean distance from each cell center to the nearest center in ``A``."""
    if A.empty:
        raise EmptySet("distance to an empty set is undefined")
    if A.mask.all():
        return Raster(A.grid, np.zeros(A.grid.shape))
    return Raster(A.grid, _edt(~A.mask, A.grid.spacing))


def _inner_distance(A: GridSet) -> np.ndarray:
    # distance to the complement, with everything beyond the grid counted as outside
    m = np.pad(A.mask, 1, constant_values=False)
    d = _edt(m, A.grid.spacing)
    return d[(slice(1, -1),) * A.grid.dim]


def signed_distance(A: GridSet) -> np.ndarray:
    """Signed distance with the interface halfway between member and non-member centers."""
    h = A.grid.spacing
    d_out = distance_field(A).values
    d_in = _inner_distance(A)
    return np.where(A.mask, 0.5 * h - d_in, d_out - 0.5 * h)


def dilate(A: GridSet, r: float) -> GridSet:
    """Closed ``r``-neighbourhood ``B(A, r)``."""
    if r < 0:
        raise ValueError("dilation radius must be nonnegative")
    if A.empty:
        return A
    if r == 0:
        return GridSet(A.grid, A.mask.copy())
    d = distance_field(A).values
    return GridSet(A.grid, d <= r + _TIE * A.grid.spacing)


def erode(A: GridSet, r: float) -> GridSet:
    """Complement of ``B(A^c, r)``; cells beyond the grid count as outside ``A``."""
    if r < 0:
        raise ValueError("erosion radius must be nonnegative")
    if A.empty or r == 0:
        return GridSet(A.grid, A.mask.copy())
    d = _inner_distance(A)
    return GridSet(A.grid, A.mask & (d > r + _TIE * A.grid.spacing))


def hausdorff_distance(A: GridSet, B: GridSet) -> float:
    _same_grid(A, B)
    if A.empty or B.empty:
        raise EmptySet("Hausdorff distance needs nonempty operands")
    dA = distance_field(A).values
    dB = distance_field(B).values
    return float(max(dA[B.mask].max(), dB[A.mask].max()))


def is_tubular(A: GridSet, r: float, tol: float | None = None) -> bool:
    """Whether ``A`` is, up to ``tol``, an ``r``-neighbourhood of some closed set.

    Checks ``d_H(B(erode(A, r), r), A) <= tol``; ``tol`` defaults to one cell.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if tol is None:
        tol = A.grid.spacing
    if A.empty:
        return False
    core = erode(A, r)
    if core.empty:
        return False
    return hausdorff_distance(dilate(core, r), A) <= tol + _TIE * A.grid.spacing


# --- measures ---------------------------------------------------------------

def measure(A: GridSet) -> float:
    return A.count * A.grid.cell_volume


def sym_diff_measure(A: GridSet, B: GridSet) -> float:
    _same_grid(A, B)
    return float(np.count_nonzero(A.mask ^ B.mask)) * A.grid.cell_volume


@dataclass
class MinkowskiEstimate:
    content: float
    slope: float
    radii: np.ndarray
    quotients: np.ndarray

    def table(self) -> list:
        return [(float(r), float(q)) for r, q in zip(self.radii, self.quotients)]


def minkowski_content(A: GridSet, radii: Sequence[float]) -> MinkowskiEstimate:
    """Outer Minkowski content by extrapolating ``|B(A,r) \\ A| / r`` to ``r = 0``.

    A least-squares line ``q(r) = m + k r`` is fitted over ``radii`` and ``m``
    is reported.  Every radius must exceed two cells.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2:
        raise ValueError("need at least two radii")
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    h = A.grid.spacing
    if radii.min() <= 2 * h:
        raise ValueError(f"radius {radii.min():g} is below the grid resolution 2*h = {2 * h:g}")
    if A.empty:
        raise EmptySet("Minkowski content of an empty set")
    d = distance_field(A).values
    vol = A.grid.cell_volume
    q = np.array([np.count_nonzero((d > 0) & (d <= r + _TIE * h)) * vol / r for r in radii])
    slope, content = np.polyfit(radii, q, 1)
    return MinkowskiEstimate(float(content), float(slope), radii, q)


def support_of_field(u: Raster, tol: float = 1e-12) -> GridSet:
    """Closure (one-cell dilation) of ``{|u| > tol}``; empty for a null field."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    core = GridSet(u.grid, np.abs(u.values) > tol)
    return dilate(core, u.grid.spacing)


def diameter(A: GridSet) -> float:
    pts = A.points()
    if len(pts) < 2:
        return 0.0
    if A.grid.dim == 1:
        return float(pts.max() - pts.min())
    try:
        from scipy.spatial import ConvexHull

        pts = pts[ConvexHull(pts).vertices]
    except Exception:  # degenerate (collinear) point sets
        pass
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def lebesgue_hausdorff_bound(A: GridSet, B: GridSet, r: float) -> float:
    """Upper bound on ``|A sym-diff B|`` for two ``r``-tubular sets.

    ``n w_n (diam(A)^n + diam(B)^n) / 2^n * ln(1 + d_H(A, B) / r)``.
    """
    n = A.grid.dim
    dA = diameter(A)
    dB = diameter(B)
    return n * unit_ball_volume(n) * (dA**n + dB**n) / 2**n * math.log1p(hausdorff_distance(A, B) / r)
