"""Finite point-cloud stand-ins for compact sets, and the metrics between them.

A :class:`PointCloud` is a finite epsilon-net of a nonempty compact set; its
``resolution`` records the covering radius the net guarantees, so downstream
comparisons can state honest tolerances.  Products of compact sets are held
factor-by-factor in a :class:`ProductSet`, measured either with the
factor-wise root-sum-of-squares Hausdorff metric or with the plain Hausdorff
metric after embedding into the product space; the two are equivalent within
a factor 1/sqrt(m) and :func:`check_equivalence_bounds` verifies that
numerically.

All distances here are exact finite-set max-min computations.  Large 2-D
inputs are routed through a grid-bucket nearest-neighbour search that returns
bit-identical results to the brute-force formula (regression-tested).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, StructuralError

DEFAULT_EMBED_CAP = 10_000_000

# above this many point pairs the directed search switches away from the
# dense distance matrix
_BRUTE_PAIR_LIMIT = 4_000_000
_BRUTE_CHUNK = 2_000_000


def as_point_matrix(points) -> np.ndarray:
    """Coerce input to an (n, d) float64 matrix; 1-D input becomes (n, 1)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None]
    elif pts.ndim != 2:
        raise StructuralError(f"points must be an (n, d) array, got ndim={pts.ndim}")
    return np.ascontiguousarray(pts)


@dataclass(frozen=True)
class PointCloud:
    """Finite sample of a nonempty compact set.

    ``resolution`` is the guaranteed covering radius: every point of the
    underlying set is within ``resolution`` of a sample and vice versa
    (Hausdorff distance between net and set).  A cloud that *is* the set it
    represents carries resolution 0.
    """

    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        pts = as_point_matrix(self.points)
        if pts.shape[0] == 0:
            raise StructuralError("point cloud must be nonempty")
        if not np.isfinite(pts).all():
            raise StructuralError("point cloud contains non-finite coordinates")
        res = float(self.resolution)
        if not (res >= 0.0 and math.isfinite(res)):
            raise StructuralError(f"resolution must be finite and >= 0, got {res}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "resolution", res)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def diameter_bound(self) -> float:
        """Diameter of the axis-aligned bounding box (upper bound on diameter)."""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True)
class ProductPoint:
    """A point of a product space, kept factor-by-factor."""

    coords: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise StructuralError("product point needs at least one factor")
        parts = []
        for c in self.coords:
            v = np.atleast_1d(np.asarray(c, dtype=np.float64))
            if v.ndim != 1 or v.size < 1:
                raise StructuralError("each factor coordinate must be a nonempty vector")
            if not np.isfinite(v).all():
                raise StructuralError("product point contains non-finite coordinates")
            v.setflags(write=False)
            parts.append(v)
        object.__setattr__(self, "coords", tuple(parts))

    @property
    def factor_count(self) -> int:
        return len(self.coords)

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.coords)


@dataclass(frozen=True)
class ProductSet:
    """Cartesian product of compact sets, one :class:`PointCloud` per factor."""

    factors: tuple[PointCloud, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if len(factors) < 1:
            raise StructuralError("product set needs at least one factor")
        for f in factors:
            if not isinstance(f, PointCloud):
                raise StructuralError("product set factors must be PointCloud instances")
        object.__setattr__(self, "factors", factors)

    @property
    def factor_count(self) -> int:
        return len(self.factors)

    def embedded_size(self) -> int:
        n = 1
        for f in self.factors:
            n *= len(f)
        return n


def _check_same_structure(x: ProductPoint, y: ProductPoint):
    if x.factor_count != y.factor_count:
        raise StructuralError(
            f"factor count mismatch: {x.factor_count} vs {y.factor_count}"
        )
    for k, (a, b) in enumerate(zip(x.coords, y.coords)):
        if a.shape != b.shape:
            raise StructuralError(f"factor {k} dimension mismatch: {a.shape} vs {b.shape}")


def product_metric(x: ProductPoint, y: ProductPoint) -> float:
    """Root-sum-of-squares of the per-factor Euclidean distances."""
    _check_same_structure(x, y)
    total = 0.0
    for a, b in zip(x.coords, y.coords):
        d = float(np.linalg.norm(a - b))
        total += d * d
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# exact directed max-min distance (the Hausdorff building block)
# ---------------------------------------------------------------------------

def _directed_sq_brute(p: np.ndarray, q: np.ndarray) -> float:
    """max over p of min over q of squared distance, dense chunked evaluation."""
    best = 0.0
    rows = max(1, _BRUTE_CHUNK // max(1, q.shape[0]))
    for start in range(0, p.shape[0], rows):
        block = p[start:start + rows]
        diff = block[:, None, :] - q[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        m = float(d2.min(axis=1).max())
        if m > best:
            best = m
    return best


def _bucket_2d(q: np.ndarray):
    """CSR bucket layout for 2-D points on a square grid of ~len(q) cells."""
    lo = q.min(axis=0)
    hi = q.max(axis=0)
    grid_n = min(2048, int(math.sqrt(q.shape[0])) + 1)
    ext = max(hi[0] - lo[0], hi[1] - lo[1])
    if ext <= 0.0:
        ext = 1.0
    w = ext / grid_n
    nx = int(math.floor((hi[0] - lo[0]) / w)) + 1
    ny = int(math.floor((hi[1] - lo[1]) / w)) + 1
    cx = np.minimum(np.floor((q[:, 0] - lo[0]) / w).astype(np.int64), nx - 1)
    cy = np.minimum(np.floor((q[:, 1] - lo[1]) / w).astype(np.int64), ny - 1)
    cell = cx * ny + cy
    order = np.argsort(cell, kind="stable")
    counts = np.bincount(cell, minlength=nx * ny)
    starts = np.zeros(nx * ny + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    return order, starts, nx, ny, float(lo[0]), float(lo[1]), w


_GRID_KERNEL = None


def _grid_kernel():
    # numba import deferred so that merely importing the package stays cheap
    global _GRID_KERNEL
    if _GRID_KERNEL is not None:
        return _GRID_KERNEL
    from numba import njit

    @njit(cache=True)
    def directed_sq_2d(p, q, order, starts, nx, ny, x0, y0, w):
        best_overall = 0.0
        rmax = nx + ny + 2
        for i in range(p.shape[0]):
            px = p[i, 0]
            py = p[i, 1]
            cx = int(np.floor((px - x0) / w))
            cy = int(np.floor((py - y0) / w))
            if cx < 0:
                cx = 0
            elif cx >= nx:
                cx = nx - 1
            if cy < 0:
                cy = 0
            elif cy >= ny:
                cy = ny - 1
            best = np.inf
            r = 0
            while r <= rmax:
                # any point in a ring-r cell is at least (r-1)*w away
                lb = (r - 1) * w
                if r > 0 and lb > 0.0 and lb * lb >= best:
                    break
                xlo = cx - r
                xhi = cx + r
                ylo = cy - r
                yhi = cy + r
                for ix in range(max(xlo, 0), min(xhi, nx - 1) + 1):
                    on_x_edge = ix == xlo or ix == xhi
                    for iy in range(max(ylo, 0), min(yhi, ny - 1) + 1):
                        if not on_x_edge and iy != ylo and iy != yhi:
                            continue  # perimeter cells only
                        c = ix * ny + iy
                        for t in range(starts[c], starts[c + 1]):
                            j = order[t]
                            dx = q[j, 0] - px
                            dy = q[j, 1] - py
                            d2 = dx * dx + dy * dy
                            if d2 < best:
                                best = d2
                r += 1
            if best > best_overall:
                best_overall = best
        return best_overall

    _GRID_KERNEL = directed_sq_2d
    return _GRID_KERNEL


def _directed_sq_grid_2d(p: np.ndarray, q: np.ndarray) -> float:
    order, starts, nx, ny, x0, y0, w = _bucket_2d(q)
    kernel = _grid_kernel()
    return float(kernel(p, q, order, starts, nx, ny, x0, y0, w))


def _directed_sq(p: np.ndarray, q: np.ndarray) -> float:
    if p.shape[0] * q.shape[0] <= _BRUTE_PAIR_LIMIT or p.shape[1] != 2:
        return _directed_sq_brute(p, q)
    return _directed_sq_grid_2d(p, q)


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Exact Hausdorff distance between two finite clouds.

    Equals max( max_a min_b |a-b|, max_b min_a |a-b| ); symmetric, zero iff
    the clouds are equal as sets.
    """
    if a.dim != b.dim:
        raise StructuralError(f"dimension mismatch: {a.dim} vs {b.dim}")
    d2 = max(_directed_sq(a.points, b.points), _directed_sq(b.points, a.points))
    return math.sqrt(d2)


def product_hausdorff(a: ProductSet, b: ProductSet) -> float:
    """Factor-wise Hausdorff metric: root-sum-of-squares over the factors."""
    if a.factor_count != b.factor_count:
        raise StructuralError(
            f"factor count mismatch: {a.factor_count} vs {b.factor_count}"
        )
    total = 0.0
    for fa, fb in zip(a.factors, b.factors):
        h = hausdorff_distance(fa, fb)
        total += h * h
    return math.sqrt(total)


def cartesian_points(parts: Sequence[np.ndarray], cap: int = DEFAULT_EMBED_CAP) -> np.ndarray:
    """Cartesian product of coordinate blocks, ordered lexicographically."""
    size = 1
    for p in parts:
        size *= p.shape[0]
        if size > cap:
            raise CapacityError(
                f"cartesian product would have {size}+ points (cap {cap})"
            )
    out = parts[0]
    for p in parts[1:]:
        n, m = out.shape[0], p.shape[0]
        out = np.hstack([np.repeat(out, m, axis=0), np.tile(p, (n, 1))])
    return out


def embed(a: ProductSet, cap: int = DEFAULT_EMBED_CAP) -> PointCloud:
    """Realize a product set as a single cloud in the product space.

    The resolution combines factor resolutions in root-sum-of-squares, which
    is the covering radius the cartesian product inherits.
    """
    pts = cartesian_points([f.points for f in a.factors], cap=cap)
    res = math.sqrt(sum(f.resolution ** 2 for f in a.factors))
    return PointCloud(pts, resolution=res)


@dataclass(frozen=True)
class EquivalenceReport:
    """Both product-space metrics on one pair, with the sandwich verdict.

    ``factorwise`` is the root-sum-of-squares of per-factor Hausdorff
    distances; ``embedded`` is the plain Hausdorff distance between the
    embedded clouds.  The sandwich is
    factorwise/sqrt(m) <= embedded <= factorwise.
    """

    factorwise: float
    embedded: float
    factor_count: int
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_equivalence_bounds(
    a: ProductSet,
    b: ProductSet,
    rel_tol: float = 1e-12,
    cap: int = DEFAULT_EMBED_CAP,
) -> EquivalenceReport:
    """Verify the factorwise-vs-embedded metric sandwich on one pair."""
    factorwise = product_hausdorff(a, b)
    embedded = hausdorff_distance(embed(a, cap=cap), embed(b, cap=cap))
    m = a.factor_count
    slack = rel_tol * max(1.0, factorwise)
    lower_ok = factorwise / math.sqrt(m) <= embedded + slack
    upper_ok = embedded <= factorwise + slack
    return EquivalenceReport(factorwise, embedded, m, lower_ok, upper_ok)


def merge_clouds(clouds: Sequence[PointCloud]) -> PointCloud:
    """Union of clouds; the result covers the union of the represented sets."""
    if len(clouds) < 1:
        raise StructuralError("need at least one cloud to merge")
    dim = clouds[0].dim
    for c in clouds:
        if c.dim != dim:
            raise StructuralError("merged clouds must share dimension")
    pts = np.vstack([c.points for c in clouds])
    return PointCloud(pts, resolution=max(c.resolution for c in clouds))


@dataclass(frozen=True)
class UnionBoundReport:
    """Union Hausdorff bound h(U C_i, U D_i) <= max_i h(C_i, D_i)."""

    lhs: float
    rhs: float
    ok: bool


def union_hausdorff_check(
    cs: Sequence[PointCloud],
    ds: Sequence[PointCloud],
    tol: float = 1e-12,
) -> UnionBoundReport:
    """Check the union bound on two equal-length collections of clouds."""
    if len(cs) != len(ds):
        raise StructuralError(f"collection length mismatch: {len(cs)} vs {len(ds)}")
    if len(cs) == 0:
        raise StructuralError("collections must be nonempty")
    lhs = hausdorff_distance(merge_clouds(cs), merge_clouds(ds))
    rhs = max(hausdorff_distance(c, d) for c, d in zip(cs, ds))
    return UnionBoundReport(lhs, rhs, lhs <= rhs + tol)


def unique_points(pts: np.ndarray) -> np.ndarray:
    """Exact deduplication of identical rows (treats -0.0 as 0.0)."""
    pts = np.ascontiguousarray(pts + 0.0)
    view = pts.view([("", pts.dtype)] * pts.shape[1]).ravel()
    _, idx = np.unique(view, return_index=True)
    return pts[np.sort(idx)]


def snap_points(pts: np.ndarray, width: float) -> np.ndarray:
    """Snap to the grid of the given width and drop duplicate cells.

    Each point moves by at most width*sqrt(d)/2.  Returns cell centers.
    """
    if width <= 0:
        raise StructuralError(f"snap width must be positive, got {width}")
    cells = np.rint(pts / width)
    lo = cells.min(axis=0)
    hi = cells.max(axis=0)
    span = (hi - lo).astype(np.int64)
    d = pts.shape[1]
    bits_needed = sum(max(1, int(s) + 1).bit_length() for s in span)
    if bits_needed <= 62:
        shifted = (cells - lo).astype(np.int64)
        key = shifted[:, 0]
        for k in range(1, d):
            key = key * (int(span[k]) + 1) + shifted[:, k]
        uniq = np.unique(key)
        # decode back to cell indices
        out = np.empty((uniq.shape[0], d), dtype=np.float64)
        rem = uniq
        for k in range(d - 1, 0, -1):
            base = int(span[k]) + 1
            out[:, k] = rem % base
            rem = rem // base
        out[:, 0] = rem
        return (out + lo) * width
    cells = np.unique(cells, axis=0)
    return cells * width


def points_equal_as_sets(a: np.ndarray, b: np.ndarray) -> bool:
    """Exact set equality of two point matrices (order-insensitive)."""
    if a.shape != b.shape:
        return False
    a = np.ascontiguousarray(a + 0.0)
    b = np.ascontiguousarray(b + 0.0)
    va = np.sort(a.view([("", a.dtype)] * a.shape[1]).ravel())
    vb = np.sort(b.view([("", b.dtype)] * b.shape[1]).ravel())
    return bool(np.array_equal(va, vb))
