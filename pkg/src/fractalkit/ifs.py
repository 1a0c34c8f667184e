"""Contraction maps, iterated function systems, and attractor computation.

The deterministic path iterates the Hutchinson operator with a certified
stopping rule: the a-priori geometric-series bound derived from the first
step, an a-posteriori measured-step bound when clouds are small enough to
compare cheaply, and (in snapped mode) an exact cell-set fixed-point test.
Whichever rule fires, the returned cloud's ``resolution`` is the certified
Hausdorff distance to the true attractor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Callable, Sequence

import numpy as np

from .cloud import PointCloud, hausdorff_distance, snap_points, unique_points
from .errors import CapacityError, ContractError, NumericError, StructuralError

DEFAULT_MAX_POINTS = 5_000_000

# measured-step early exit is only attempted below this pair budget
_MEASURE_PAIR_LIMIT = 1_000_000


@dataclass(frozen=True)
class AffineMap:
    """Affine contraction w(x) = linear @ x + offset with a declared Lipschitz constant.

    The declared constant is re-verified at construction: the operator
    2-norm of ``linear`` must not exceed it by more than 1e-9.
    """

    linear: np.ndarray
    offset: np.ndarray
    lipschitz: float

    def __post_init__(self):
        lin = np.atleast_2d(np.asarray(self.linear, dtype=np.float64))
        off = np.atleast_1d(np.asarray(self.offset, dtype=np.float64))
        if lin.ndim != 2 or lin.shape[0] != lin.shape[1]:
            raise StructuralError(f"linear part must be square, got shape {lin.shape}")
        if off.shape != (lin.shape[0],):
            raise StructuralError(
                f"offset shape {off.shape} does not match linear {lin.shape}"
            )
        if not (np.isfinite(lin).all() and np.isfinite(off).all()):
            raise StructuralError("affine map has non-finite entries")
        c = float(self.lipschitz)
        if not (0.0 <= c < 1.0):
            raise ContractError(f"lipschitz constant must lie in [0, 1), got {c}")
        norm = float(np.linalg.norm(lin, 2))
        if norm > c + 1e-9:
            raise ContractError(
                f"declared lipschitz {c} understates operator norm {norm:.12g}"
            )
        lin.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "lipschitz", c)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def is_similarity(self) -> bool:
        """True iff the map scales all distances by one ratio."""
        gram = self.linear.T @ self.linear
        ratio_sq = float(np.trace(gram)) / self.dim
        return bool(np.allclose(gram, ratio_sq * np.eye(self.dim), atol=1e-12))

    @property
    def similarity_ratio(self) -> float:
        if not self.is_similarity:
            raise ContractError("map is not a similarity")
        return float(np.sqrt(np.trace(self.linear.T @ self.linear) / self.dim))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[1] != self.dim:
            raise StructuralError(
                f"points have dimension {pts.shape[1]}, map expects {self.dim}"
            )
        out = pts @ self.linear.T + self.offset
        return out[0] if single else out

    def fixed_point(self) -> np.ndarray:
        """Unique solution of w(x) = x."""
        return np.linalg.solve(np.eye(self.dim) - self.linear, self.offset)


def affine_1d(scale: float, offset: float, lipschitz: float | None = None) -> AffineMap:
    """1-D map x -> scale*x + offset."""
    c = abs(scale) if lipschitz is None else lipschitz
    return AffineMap(np.array([[scale]]), np.array([offset]), c)


def diagonal_map(scales, offsets, lipschitz: float | None = None) -> AffineMap:
    """Axis-aligned map x_k -> scales[k]*x_k + offsets[k]."""
    scales = np.atleast_1d(np.asarray(scales, dtype=np.float64))
    c = float(np.max(np.abs(scales))) if lipschitz is None else lipschitz
    return AffineMap(np.diag(scales), np.asarray(offsets, dtype=np.float64), c)


def apply_map(w: AffineMap, x) -> np.ndarray:
    return w.apply(x)


@dataclass(frozen=True)
class IfsSystem:
    """Finite family of affine contractions on one space."""

    maps: tuple[AffineMap, ...]
    label: str = ""

    def __post_init__(self):
        maps = tuple(self.maps)
        if len(maps) < 1:
            raise StructuralError("an IFS needs at least one map")
        dim = maps[0].dim
        for w in maps:
            if w.dim != dim:
                raise StructuralError("all maps in an IFS must share dimension")
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def map_count(self) -> int:
        return len(self.maps)

    @property
    def contraction(self) -> float:
        return max(w.lipschitz for w in self.maps)


def compose_word(sys: IfsSystem, word: Sequence[int]) -> AffineMap:
    """Compose maps along a 1-based index word, leftmost applied last.

    Word (i1, i2, ..., in) yields f_i1 o f_i2 o ... o f_in; the composite
    Lipschitz record is the exact product of the factors' declared constants.
    """
    word = tuple(int(i) for i in word)
    if len(word) == 0:
        raise StructuralError("empty word: the identity is not part of the semigroup")
    n = sys.map_count
    for i in word:
        if not 1 <= i <= n:
            raise StructuralError(f"word index {i} outside 1..{n}")
    lin = np.eye(sys.dim)
    off = np.zeros(sys.dim)
    lip = 1.0
    for i in word:
        w = sys.maps[i - 1]
        # current composite g, next step g o w: x -> g(w(x))
        off = lin @ w.offset + off
        lin = lin @ w.linear
        lip *= w.lipschitz
    return AffineMap(lin, off, lip)


def _images(maps: Sequence[AffineMap], pts: np.ndarray) -> np.ndarray:
    return np.vstack([w.apply(pts) for w in maps])


def hutchinson(sys: IfsSystem, b: PointCloud, snap: float | None = None) -> PointCloud:
    """One application of B -> union of map images of B.

    Optional grid snapping dedups the output at the given width; the extra
    half-cell-diagonal error is added to the resolution.
    """
    if b.dim != sys.dim:
        raise StructuralError(f"cloud dimension {b.dim} does not match IFS {sys.dim}")
    pts = _images(sys.maps, b.points)
    res = sys.contraction * b.resolution
    if snap is not None:
        pts = snap_points(pts, snap)
        res += snap * math.sqrt(sys.dim) / 2.0
    else:
        pts = unique_points(pts)
    return PointCloud(pts, resolution=res)


def _measured_h(a: np.ndarray, b: np.ndarray) -> float | None:
    if a.shape[0] * b.shape[0] > _MEASURE_PAIR_LIMIT:
        return None
    return hausdorff_distance(PointCloud(a), PointCloud(b))


def banach_iterate(
    step: Callable[[np.ndarray], np.ndarray],
    seed: np.ndarray,
    contraction: float,
    tol: float,
    dim: int,
    snap: float | None = None,
    pinned: np.ndarray | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> tuple[np.ndarray, float]:
    """Iterate a set-map to its fixed point with a certified stopping rule.

    ``step`` maps a point matrix to the raw image matrix (before snapping);
    ``pinned`` rows are re-attached exactly after each snap (condensation
    sets must survive unmoved).  Returns (points, certified_resolution).
    """
    if tol <= 0:
        raise ContractError(f"tolerance must be positive, got {tol}")
    c = float(contraction)
    if not 0.0 <= c < 1.0:
        raise ContractError(f"contraction factor must lie in [0, 1), got {c}")
    eta = 0.0 if snap is None else snap * math.sqrt(dim) / 2.0

    def advance(pts: np.ndarray) -> np.ndarray:
        out = step(pts)
        if not np.isfinite(out).all():
            raise NumericError("iteration produced non-finite coordinates")
        # snap_points returns a canonically ordered cell set, so consecutive
        # iterates can be compared with a plain array_equal
        out = snap_points(out, snap) if snap is not None else unique_points(out)
        if pinned is not None:
            out = np.vstack([pinned, out])
        if out.shape[0] > max_points:
            hint = "" if snap is not None else " (enable snap dedup)"
            raise CapacityError(
                f"iteration cloud grew past {max_points} points{hint}"
            )
        return out

    snap_term = eta / (1.0 - c)
    b_prev = np.ascontiguousarray(np.asarray(seed, dtype=np.float64))
    b = advance(b_prev)
    if c == 0.0:
        # a 0-Lipschitz set map lands on its fixed point in one application
        return b, snap_term
    delta0 = _measured_h(b_prev, b)
    if delta0 is None:
        # seed too large to measure; bound the first step by the box diameter
        both = np.vstack([b_prev, b])
        delta0 = float(np.linalg.norm(both.max(axis=0) - both.min(axis=0)))
    x0 = (delta0 + eta) / (1.0 - c)
    if x0 <= tol:
        return b, min(x0, tol) + snap_term
    n_target = max(1, math.ceil(math.log(tol / x0) / math.log(c)))
    for _ in range(1, n_target):
        b_next = advance(b)
        if snap is not None and b_next.shape == b.shape and np.array_equal(b_next, b):
            # exact fixed point of the snapped operator
            return b_next, snap_term
        if snap is None:
            h = _measured_h(b, b_next)
            if h is not None and h <= tol * (1.0 - c):
                return b_next, c * tol
        b = b_next
    return b, tol + snap_term


def attractor(
    sys: IfsSystem,
    seed: PointCloud | None = None,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PointCloud:
    """Compute the attractor to a certified Hausdorff tolerance.

    The default seed stacks every map's fixed point; those lie on the
    attractor, so all iterates stay inside it (any seed converges; the
    result is seed-independent within the certified resolution).  Without
    snapping the resolution is at most ``tol``; with snapping the honest
    snap term is added.
    """
    if seed is None:
        seed = PointCloud(np.vstack([w.fixed_point() for w in sys.maps]))
    if seed.dim != sys.dim:
        raise StructuralError(f"seed dimension {seed.dim} does not match IFS {sys.dim}")
    pts, res = banach_iterate(
        lambda p: _images(sys.maps, p),
        seed.points,
        sys.contraction,
        tol,
        sys.dim,
        snap=snap,
        max_points=max_points,
    )
    return PointCloud(pts, resolution=res)


def chaos_game(
    sys: IfsSystem,
    n_points: int,
    burn_in: int = 100,
    rng_seed: int = 0,
) -> PointCloud:
    """Random-iteration orbit with uniform map selection.

    Deterministic for a given ``rng_seed``.  The orbit starts at the first
    map's fixed point, which already lies on the attractor, so every emitted
    point is on the attractor up to floating rounding; the cloud represents
    the orbit itself (resolution 0), not a covering of the attractor.
    """
    if n_points < 1:
        raise StructuralError(f"n_points must be >= 1, got {n_points}")
    if burn_in < 0:
        raise StructuralError(f"burn_in must be >= 0, got {burn_in}")
    rng = np.random.default_rng(rng_seed)
    choices = rng.integers(0, sys.map_count, size=n_points + burn_in)
    linears = [w.linear for w in sys.maps]
    offsets = [w.offset for w in sys.maps]
    x = sys.maps[0].fixed_point()
    out = np.empty((n_points, sys.dim))
    for k, i in enumerate(choices):
        x = linears[i] @ x + offsets[i]
        if k >= burn_in:
            out[k - burn_in] = x
    return PointCloud(out)


@dataclass(frozen=True)
class ProductIfs:
    """Product of factor systems: one map per index tuple, acting factor-wise.

    The tuple map for (i_1, ..., i_m) applies factor k's map i_k to the k-th
    coordinate block; its contraction factor is the max over factors.
    """

    factor_systems: tuple[IfsSystem, ...]

    def __post_init__(self):
        systems = tuple(self.factor_systems)
        if len(systems) < 1:
            raise StructuralError("product IFS needs at least one factor system")
        object.__setattr__(self, "factor_systems", systems)

    @property
    def factor_count(self) -> int:
        return len(self.factor_systems)

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.factor_systems)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.factor_systems)

    @property
    def contraction(self) -> float:
        return max(s.contraction for s in self.factor_systems)

    def index_tuples(self) -> list[tuple[int, ...]]:
        """All 1-based index tuples in lexicographic order."""
        ranges = [range(1, s.map_count + 1) for s in self.factor_systems]
        return list(iter_product(*ranges))

    def tuple_map(self, indices: Sequence[int]) -> AffineMap:
        """The product-space affine map for one index tuple."""
        indices = tuple(int(i) for i in indices)
        if len(indices) != self.factor_count:
            raise StructuralError(
                f"tuple length {len(indices)} != factor count {self.factor_count}"
            )
        blocks = []
        offs = []
        lips = []
        for sys_k, i in zip(self.factor_systems, indices):
            if not 1 <= i <= sys_k.map_count:
                raise StructuralError(f"index {i} outside 1..{sys_k.map_count}")
            w = sys_k.maps[i - 1]
            blocks.append(w.linear)
            offs.append(w.offset)
            lips.append(w.lipschitz)
        lin = _block_diag(blocks)
        return AffineMap(lin, np.concatenate(offs), max(lips))

    def as_flat_system(self, label: str = "") -> IfsSystem:
        """The product IFS as a plain IFS on the product space."""
        maps = tuple(self.tuple_map(t) for t in self.index_tuples())
        return IfsSystem(maps, label=label)


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    at = 0
    for b in blocks:
        k = b.shape[0]
        out[at:at + k, at:at + k] = b
        at += k
    return out


def make_product_ifs(systems: Sequence[IfsSystem]) -> ProductIfs:
    if len(systems) == 0:
        raise StructuralError("need at least one factor system")
    return ProductIfs(tuple(systems))


def product_attractor_direct(
    p: ProductIfs,
    tol: float = 1e-4,
    seed: PointCloud | None = None,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PointCloud:
    """Attractor of the product system iterated as one IFS in product space."""
    flat = p.as_flat_system()
    return attractor(flat, seed=seed, tol=tol, snap=snap, max_points=max_points)


@dataclass(frozen=True)
class ProductAttractorReport:
    """Cross-path check: direct product-space attractor vs product of factors."""

    distance: float
    bound: float
    ok: bool
    direct_resolution: float
    embedded_resolution: float


def verify_product_attractor(
    p: ProductIfs,
    tol: float = 1e-4,
    snap: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
    embed_cap: int | None = None,
) -> ProductAttractorReport:
    """Compare the two independent attractor constructions.

    Factor attractors are computed separately and embedded; the direct path
    iterates the product-space Hutchinson operator.  The Hausdorff distance
    between the results must stay within 2*tol plus the recorded resolutions.
    """
    from .cloud import DEFAULT_EMBED_CAP, ProductSet, embed

    factor_clouds = [
        attractor(s, tol=tol, max_points=max_points) for s in p.factor_systems
    ]
    embedded = embed(
        ProductSet(tuple(factor_clouds)),
        cap=DEFAULT_EMBED_CAP if embed_cap is None else embed_cap,
    )
    direct = product_attractor_direct(p, tol=tol, snap=snap, max_points=max_points)
    distance = hausdorff_distance(direct, embedded)
    bound = 2.0 * tol + direct.resolution + embedded.resolution
    return ProductAttractorReport(
        distance, bound, distance <= bound, direct.resolution, embedded.resolution
    )
