"""IFSs with condensation: inhomogeneous attractors, orbital sets, products.

A condensation set C turns the Hutchinson operator into
B -> C u f_1(B) u ... u f_N(B); its fixed point (the inhomogeneous
attractor) decomposes as the orbital set of C joined with the homogeneous
attractor, and products of condensed systems factor exactly like the
homogeneous case.  Mixed product index tuples (some factor frozen on its
condensation set) act set-valued through coordinate projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .cloud import (
    PointCloud,
    cartesian_points,
    hausdorff_distance,
    merge_clouds,
    unique_points,
)
from .errors import CapacityError, StructuralError
from .ifs import (
    DEFAULT_MAX_POINTS,
    AffineMap,
    IfsSystem,
    attractor,
    banach_iterate,
)


@dataclass(frozen=True)
class CondensationSet:
    """The constant set-map's value: a fixed compact set returned for any input."""

    cloud: PointCloud

    def __post_init__(self):
        if not isinstance(self.cloud, PointCloud):
            raise StructuralError("condensation set must wrap a PointCloud")

    @property
    def dim(self) -> int:
        return self.cloud.dim


def interval_net(lo: float, hi: float, n: int = 65) -> PointCloud:
    """Uniform 1-D net of [lo, hi]; resolution is half the spacing."""
    if not hi > lo:
        raise StructuralError(f"empty interval [{lo}, {hi}]")
    if n < 2:
        raise StructuralError("interval net needs at least 2 points")
    pts = np.linspace(lo, hi, n)
    return PointCloud(pts[:, None], resolution=(hi - lo) / (n - 1) / 2.0)


@dataclass(frozen=True)
class CondensedIfs:
    """A (possibly empty) family of contractions plus a condensation set."""

    base: IfsSystem | None
    condensation: CondensationSet

    def __post_init__(self):
        if self.base is not None and self.base.dim != self.condensation.dim:
            raise StructuralError(
                f"base dimension {self.base.dim} != condensation {self.condensation.dim}"
            )

    @property
    def dim(self) -> int:
        return self.condensation.dim

    @property
    def base_maps(self) -> tuple[AffineMap, ...]:
        return () if self.base is None else self.base.maps

    @property
    def contraction(self) -> float:
        # the condensation transformation itself has contraction factor 0
        return 0.0 if self.base is None else self.base.contraction


def condensed_hutchinson(sys: CondensedIfs, b: PointCloud) -> PointCloud:
    """One application of B -> C u (union of base-map images of B).

    The output always contains the condensation cloud exactly.
    """
    if b.dim != sys.dim:
        raise StructuralError(f"cloud dimension {b.dim} does not match system {sys.dim}")
    c_cloud = sys.condensation.cloud
    if not sys.base_maps:
        return c_cloud
    images = unique_points(np.vstack([w.apply(b.points) for w in sys.base_maps]))
    pts = np.vstack([c_cloud.points, images])
    res = max(c_cloud.resolution, sys.contraction * b.resolution)
    return PointCloud(pts, resolution=res)


def inhomogeneous_attractor(
    sys: CondensedIfs,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PointCloud:
    """Fixed point of the condensed operator, certified like the homogeneous case.

    The condensation cloud is pinned: snapping never moves its points.
    """
    c_pts = sys.condensation.cloud.points
    maps = sys.base_maps
    if not maps:
        return sys.condensation.cloud
    pts, res = banach_iterate(
        lambda p: np.vstack([w.apply(p) for w in maps]),
        c_pts,
        sys.contraction,
        tol,
        sys.dim,
        snap=snap,
        pinned=c_pts,
        max_points=max_points,
    )
    return PointCloud(pts, resolution=res)


@dataclass(frozen=True)
class OrbitalSet:
    """Truncated orbital set with a certified truncation bound.

    ``truncation_bound`` bounds the Hausdorff gap between this cloud joined
    with the homogeneous attractor and the full decomposition.
    """

    cloud: PointCloud
    truncation_bound: float
    depth: int


def orbital_set(
    sys: CondensedIfs,
    depth: int,
    cap: int = DEFAULT_MAX_POINTS,
) -> OrbitalSet:
    """C together with all images of C under words of length <= depth.

    The truncation bound is r^(depth+1)/(1-r) times a computable proxy for
    how far C can sit from the homogeneous attractor (diameter of the box
    that holds C and the base maps' fixed points, plus diam C).
    """
    if depth < 0:
        raise StructuralError(f"depth must be >= 0, got {depth}")
    c_cloud = sys.condensation.cloud
    maps = sys.base_maps
    n = len(maps)
    r = sys.contraction
    # levels: |C| * (1 + n + ... + n^depth) points in total
    total = len(c_cloud)
    if n > 0:
        level_size = len(c_cloud)
        for _ in range(depth):
            level_size *= n
            total += level_size
            if total > cap:
                raise CapacityError(
                    f"orbital set with depth {depth} exceeds {cap} points"
                )
    levels = [c_cloud.points]
    current = c_cloud.points
    for _ in range(depth):
        if n == 0:
            break
        current = np.vstack([w.apply(current) for w in maps])
        levels.append(current)
    pts = unique_points(np.vstack(levels))

    if n == 0:
        bound = 0.0
    else:
        anchors = np.vstack([c_cloud.points] + [w.fixed_point()[None, :] for w in maps])
        ambient_diam = float(np.linalg.norm(anchors.max(axis=0) - anchors.min(axis=0)))
        diam_c = c_cloud.diameter_bound()
        bound = r ** (depth + 1) / (1.0 - r) * (diam_c + ambient_diam)
    return OrbitalSet(
        PointCloud(pts, resolution=c_cloud.resolution),
        truncation_bound=bound,
        depth=depth,
    )


@dataclass(frozen=True)
class DecompositionReport:
    """Check of F_C against (orbital set) u (homogeneous attractor)."""

    distance: float
    bound: float
    ok: bool
    truncation_bound: float


def decomposition_check(
    sys: CondensedIfs,
    depth: int,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> DecompositionReport:
    """Cross-path check: the inhomogeneous attractor equals the union of the
    truncated orbital set and the homogeneous attractor, within the
    truncation bound plus certified tolerances."""
    if sys.base is None:
        raise StructuralError("decomposition needs at least one base map")
    f_c = inhomogeneous_attractor(sys, tol=tol, snap=snap, max_points=max_points)
    f_empty = attractor(sys.base, tol=tol, snap=snap, max_points=max_points)
    orb = orbital_set(sys, depth, cap=max_points)
    union = merge_clouds([orb.cloud, f_empty])
    distance = hausdorff_distance(f_c, union)
    bound = orb.truncation_bound + 2.0 * tol + f_c.resolution + union.resolution
    return DecompositionReport(distance, bound, distance <= bound, orb.truncation_bound)


@dataclass(frozen=True)
class CondensedProductIfs:
    """Product of condensed systems; index tuples range over {0, 1, ..., N_k}.

    Index 0 freezes factor k on its condensation set, so tuples with zeros
    act set-valued: the image is the cartesian product of condensation
    factors and map images of coordinate projections.
    """

    factor_systems: tuple[CondensedIfs, ...]

    def __post_init__(self):
        systems = tuple(self.factor_systems)
        if len(systems) < 1:
            raise StructuralError("product needs at least one factor system")
        object.__setattr__(self, "factor_systems", systems)

    @property
    def factor_count(self) -> int:
        return len(self.factor_systems)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.factor_systems)

    @property
    def dim(self) -> int:
        return sum(self.factor_dims)

    @property
    def contraction(self) -> float:
        return max(s.contraction for s in self.factor_systems)

    def _column_slices(self) -> list[slice]:
        slices = []
        at = 0
        for d in self.factor_dims:
            slices.append(slice(at, at + d))
            at += d
        return slices

    def index_tuples(self) -> list[tuple[int, ...]]:
        ranges = [range(0, len(s.base_maps) + 1) for s in self.factor_systems]
        return list(iter_product(*ranges))

    def condensation_cloud(self, cap: int = DEFAULT_MAX_POINTS) -> PointCloud:
        """The product condensation set (cartesian product of the factors')."""
        parts = [s.condensation.cloud for s in self.factor_systems]
        pts = cartesian_points([p.points for p in parts], cap=cap)
        res = math.sqrt(sum(p.resolution ** 2 for p in parts))
        return PointCloud(pts, resolution=res)

    def tuple_image(
        self,
        indices: Sequence[int],
        b: PointCloud,
        cap: int = DEFAULT_MAX_POINTS,
    ) -> PointCloud:
        """Set-valued image of one index tuple applied to a product-space cloud."""
        indices = tuple(int(i) for i in indices)
        if len(indices) != self.factor_count:
            raise StructuralError(
                f"tuple length {len(indices)} != factor count {self.factor_count}"
            )
        if b.dim != self.dim:
            raise StructuralError(f"cloud dimension {b.dim} != product {self.dim}")
        slices = self._column_slices()
        if all(i > 0 for i in indices):
            # plain pointwise product map
            cols = []
            for s, i, sl in zip(self.factor_systems, indices, slices):
                cols.append(s.base_maps[i - 1].apply(b.points[:, sl]))
            return PointCloud(np.hstack(cols), resolution=b.resolution)
        parts = []
        res_sq = 0.0
        for s, i, sl in zip(self.factor_systems, indices, slices):
            if i == 0:
                parts.append(s.condensation.cloud.points)
                res_sq += s.condensation.cloud.resolution ** 2
            else:
                proj = unique_points(np.ascontiguousarray(b.points[:, sl]))
                parts.append(s.base_maps[i - 1].apply(proj))
                res_sq += b.resolution ** 2
        pts = cartesian_points(parts, cap=cap)
        return PointCloud(pts, resolution=math.sqrt(res_sq))


def product_condensed(systems: Sequence[CondensedIfs]) -> CondensedProductIfs:
    if len(systems) == 0:
        raise StructuralError("need at least one condensed system")
    return CondensedProductIfs(tuple(systems))


def product_inhomogeneous_attractor(
    p: CondensedProductIfs,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PointCloud:
    """Direct product-space iteration of the condensed product operator.

    The all-zero tuple's block (the product condensation set) is pinned
    exactly; all other tuple images are unioned and optionally snapped.
    """
    pinned = p.condensation_cloud(cap=max_points).points
    slices = p._column_slices()
    systems = p.factor_systems
    tuples = [t for t in p.index_tuples() if any(i > 0 for i in t)]

    def step(pts: np.ndarray) -> np.ndarray:
        cloud = PointCloud(pts)
        outs = []
        for t in tuples:
            outs.append(p.tuple_image(t, cloud, cap=max_points).points)
        return np.vstack(outs)

    pts, res = banach_iterate(
        step,
        pinned,
        p.contraction,
        tol,
        p.dim,
        snap=snap,
        pinned=pinned,
        max_points=max_points,
    )
    return PointCloud(pts, resolution=res)


@dataclass(frozen=True)
class ProductInhomogeneousReport:
    """Cross-path check: direct product iteration vs product of factor attractors."""

    distance: float
    bound: float
    ok: bool


def verify_product_inhomogeneous(
    p: CondensedProductIfs,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
    embed_cap: int = DEFAULT_MAX_POINTS,
) -> ProductInhomogeneousReport:
    """The inhomogeneous product attractor equals the product of the factor
    inhomogeneous attractors, within 2*tol plus recorded resolutions."""
    factor_clouds = [
        inhomogeneous_attractor(s, tol=tol, snap=snap, max_points=max_points)
        for s in p.factor_systems
    ]
    pts = cartesian_points([c.points for c in factor_clouds], cap=embed_cap)
    res = math.sqrt(sum(c.resolution ** 2 for c in factor_clouds))
    embedded = PointCloud(pts, resolution=res)
    direct = product_inhomogeneous_attractor(
        p, tol=tol, snap=snap, max_points=max_points
    )
    distance = hausdorff_distance(direct, embedded)
    bound = 2.0 * tol + direct.resolution + embedded.resolution
    return ProductInhomogeneousReport(distance, bound, distance <= bound)


@dataclass(frozen=True)
class DisjointnessReport:
    """Pairwise disjointness of the system's images of a given cloud."""

    disjoint: bool
    margin: float


@dataclass(frozen=True)
class ProductDisjointnessReport:
    """Disjointness of product tuple images, with the factor-wise criterion."""

    disjoint: bool
    margin: float
    factor_disjoint: tuple[bool, ...]
    consistent: bool


def _min_set_distance(sets: list[np.ndarray]) -> float:
    """Smallest distance between any two of the point sets."""
    best = math.inf
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            a, b = sets[i], sets[j]
            rows = max(1, 500_000 // max(1, b.shape[0]))
            for start in range(0, a.shape[0], rows):
                block = a[start:start + rows]
                diff = block[:, None, :] - b[None, :, :]
                d = math.sqrt(float(np.einsum("ijk,ijk->ij", diff, diff).min()))
                if d < best:
                    best = d
    return best


def pairwise_disjoint_images(
    sys: IfsSystem | CondensedIfs | CondensedProductIfs,
    on: PointCloud | Sequence[PointCloud],
) -> DisjointnessReport | ProductDisjointnessReport:
    """Are the images of the given cloud under all system maps pairwise disjoint?

    For condensed systems the condensation set counts as one of the images.
    For products, ``on`` may be one product-space cloud or per-factor clouds;
    the report carries the factor-wise verdicts alongside the product one,
    which agree exactly when the factor criterion does.
    """
    if isinstance(sys, CondensedProductIfs):
        return _product_disjointness(sys, on)
    if not isinstance(on, PointCloud):
        raise StructuralError("single-space systems need a single cloud")
    if isinstance(sys, CondensedIfs):
        sets = [sys.condensation.cloud.points]
        sets += [w.apply(on.points) for w in sys.base_maps]
    else:
        sets = [w.apply(on.points) for w in sys.maps]
    if len(sets) < 2:
        return DisjointnessReport(True, math.inf)
    margin = _min_set_distance(sets)
    return DisjointnessReport(margin > 0.0, margin)


def _product_disjointness(
    p: CondensedProductIfs,
    on: PointCloud | Sequence[PointCloud],
) -> ProductDisjointnessReport:
    if isinstance(on, PointCloud):
        cloud = on
        slices = p._column_slices()
        factor_clouds = [
            PointCloud(unique_points(np.ascontiguousarray(cloud.points[:, sl])))
            for sl in slices
        ]
    else:
        factor_clouds = list(on)
        if len(factor_clouds) != p.factor_count:
            raise StructuralError("need one cloud per factor")
        cloud = PointCloud(
            cartesian_points([c.points for c in factor_clouds]),
        )
    factor_flags = tuple(
        pairwise_disjoint_images(s, c).disjoint
        for s, c in zip(p.factor_systems, factor_clouds)
    )
    sets = [p.tuple_image(t, cloud).points for t in p.index_tuples()]
    margin = _min_set_distance(sets) if len(sets) > 1 else math.inf
    disjoint = margin > 0.0
    return ProductDisjointnessReport(
        disjoint, margin, factor_flags, disjoint == all(factor_flags)
    )
