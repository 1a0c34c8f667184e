"""Similarity dimensions, box-counting estimates, and open-set-condition checks.

The similarity dimension of a contraction-ratio list is the unique root of
sum(c_i^s) = 1, found by bisection.  Box-counting estimates fit log N_r
against -log r over geometrically spaced scales on an axis-aligned grid
anchored at the coordinate-wise minimum.  OSC checking is exact interval
arithmetic on axis boxes, restricted to diagonal-affine maps; it is sound
for the candidate box it is given, not a decision procedure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .cloud import PointCloud
from .errors import ContractError, StructuralError, UnsupportedConfigurationError
from .ifs import IfsSystem, ProductIfs

MORAN_RESIDUAL_CAP = 1e-9


@dataclass(frozen=True)
class MoranSolution:
    """Root s of sum(ratios^s) = 1 with its residual."""

    s: float
    ratios: tuple[float, ...]
    residual: float

    def __post_init__(self):
        if self.s < 0:
            raise StructuralError(f"dimension root must be >= 0, got {self.s}")
        if not self.residual <= MORAN_RESIDUAL_CAP:
            raise StructuralError(
                f"residual {self.residual} exceeds cap {MORAN_RESIDUAL_CAP}"
            )


def moran_solve(ratios: Sequence[float]) -> MoranSolution:
    """Solve sum(c_i^s) = 1 for s by bisection.

    The sum is strictly decreasing in s (each c_i < 1), so the root is
    unique.  The initial bracket grows geometrically until the sum drops
    below 1, which is robust for heterogeneous ratios.
    """
    rs = tuple(float(r) for r in ratios)
    if len(rs) == 0:
        raise StructuralError("ratio list must be nonempty")
    for r in rs:
        if not 0.0 < r < 1.0:
            raise StructuralError(f"ratios must lie in (0, 1), got {r}")

    def f(s: float) -> float:
        return math.fsum(r ** s for r in rs) - 1.0

    if len(rs) == 1:
        # sum equals 1 exactly at s = 0
        return MoranSolution(0.0, rs, abs(f(0.0)))
    hi = 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ContractError("failed to bracket the dimension root")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    return MoranSolution(s, rs, abs(f(s)))


def box_count(cloud: PointCloud, r: float) -> int:
    """Occupied cells of the axis grid of side r anchored at the minimum corner."""
    if r <= 0:
        raise StructuralError(f"box size must be positive, got {r}")
    pts = cloud.points
    mins = pts.min(axis=0)
    cells = np.floor((pts - mins) / r).astype(np.int64)
    spans = cells.max(axis=0) + 1
    key = cells[:, 0].copy()
    for k in range(1, cells.shape[1]):
        key *= int(spans[k])
        key += cells[:, k]
    return int(np.unique(key).size)


@dataclass(frozen=True)
class DimensionEstimate:
    """Least-squares slope of log N_r against -log r, with fit diagnostics."""

    slope: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    r_squared: float

    def __post_init__(self):
        if len(self.scales) < 4:
            raise StructuralError("dimension estimate needs at least 4 scales")
        if any(c < 1 for c in self.counts):
            raise StructuralError("box counts must be >= 1")
        if any(b >= a for a, b in zip(self.scales, self.scales[1:])):
            raise StructuralError("scales must be strictly decreasing")


def box_dimension_estimate(
    cloud: PointCloud,
    r_min: float,
    r_max: float,
    n_scales: int = 8,
) -> DimensionEstimate:
    """Box-counting dimension estimate over geometrically spaced scales.

    The cloud's resolution must be at most r_min/10 so that discretization
    does not pollute the finest scale.
    """
    if n_scales < 4:
        raise StructuralError(f"need at least 4 scales, got {n_scales}")
    if not 0 < r_min < r_max:
        raise StructuralError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if cloud.resolution > r_min / 10.0:
        raise ContractError(
            f"cloud resolution {cloud.resolution:g} is too coarse for the "
            f"smallest scale {r_min:g} (need resolution <= r_min/10)"
        )
    scales = np.geomspace(r_max, r_min, n_scales)
    counts = [box_count(cloud, float(r)) for r in scales]
    x = -np.log(scales)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DimensionEstimate(
        float(slope), tuple(float(r) for r in scales), tuple(counts), r_squared
    )


def default_scale_window(cloud: PointCloud) -> tuple[float, float]:
    """Default regression window: discretization floor to a quarter diameter."""
    r_min = max(cloud.resolution * 10.0, 1e-12)
    r_max = cloud.diameter_bound() / 4.0
    if r_max <= r_min:
        r_max = r_min * 16.0
    return r_min, r_max


@dataclass(frozen=True)
class ProductDimensionReport:
    """Measured box dimension of a product attractor vs the summed factor roots."""

    predicted: float
    measured: float
    tolerance: float
    ok: bool


def product_dimension_report(
    factor_solutions: Sequence[MoranSolution],
    estimate: DimensionEstimate,
    osc_verified: bool,
    tolerance: float = 0.08,
) -> ProductDimensionReport:
    """Check |measured - sum of factor dimension roots| <= tolerance.

    Valid only when every factor is a similarity system with a verified
    open-set condition; callers must pass that verification in.
    """
    if not osc_verified:
        raise ContractError(
            "product dimension prediction requires verified open-set condition"
        )
    predicted = float(sum(sol.s for sol in factor_solutions))
    deviation = abs(estimate.slope - predicted)
    return ProductDimensionReport(
        predicted, estimate.slope, tolerance, deviation <= tolerance
    )


@dataclass(frozen=True)
class InhomogeneousDimensionReport:
    """Measured dimension of an inhomogeneous product attractor vs the
    sum of per-factor max(attractor dimension, condensation dimension)."""

    predicted: float
    measured: float
    tolerance: float
    status: str  # "pass" | "fail" | "inconclusive"

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def inhomogeneous_dimension_report(
    factor_dims: Sequence[tuple[float, float]],
    estimate: DimensionEstimate,
    disjoint: bool | None,
    tolerance: float = 0.1,
) -> InhomogeneousDimensionReport:
    """Check the dimension of an inhomogeneous product attractor.

    ``factor_dims`` holds (homogeneous dimension, condensation dimension)
    per factor; the prediction is the sum of per-factor maxima.  The upper
    bound needs pairwise-disjoint images, so without that hypothesis the
    report is inconclusive rather than failed.
    """
    predicted = float(sum(max(s, d) for s, d in factor_dims))
    if disjoint is not True:
        return InhomogeneousDimensionReport(
            predicted, estimate.slope, tolerance, "inconclusive"
        )
    status = "pass" if abs(estimate.slope - predicted) <= tolerance else "fail"
    return InhomogeneousDimensionReport(predicted, estimate.slope, tolerance, status)


# ---------------------------------------------------------------------------
# open set condition on axis boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisBox:
    """Open axis-aligned box (lo_k, hi_k) per coordinate."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise StructuralError("box bounds must be equal-length vectors")
        if not (lo < hi).all():
            raise StructuralError("box must be nonempty (lo < hi on every axis)")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]


def _diagonal_image(w, box: AxisBox) -> tuple[np.ndarray, np.ndarray]:
    diag = np.diagonal(w.linear)
    if np.count_nonzero(w.linear - np.diag(diag)) != 0:
        raise UnsupportedConfigurationError(
            "OSC box checking supports diagonal-affine maps only"
        )
    a = diag * box.lo + w.offset
    b = diag * box.hi + w.offset
    return np.minimum(a, b), np.maximum(a, b)


@dataclass(frozen=True)
class OscBoxReport:
    """Open-set-condition verdict for one candidate box.

    ``holds`` means the union of open images fits in the box and the open
    images are pairwise disjoint (touching closures allowed).  ``margin`` is
    the smallest pairwise gap between image boxes; ``containment_slack`` the
    tightest distance from an image face to the candidate's face.  A failed
    check is evidence only against this candidate, not against OSC itself.
    """

    holds: bool
    margin: float
    containment_slack: float


def osc_check_boxes(sys: IfsSystem, candidate: AxisBox) -> OscBoxReport:
    """Exact interval arithmetic OSC check for diagonal-affine maps."""
    if candidate.dim != sys.dim:
        raise StructuralError(
            f"candidate box dimension {candidate.dim} != system {sys.dim}"
        )
    images = [_diagonal_image(w, candidate) for w in sys.maps]
    containment = math.inf
    for lo, hi in images:
        slack = min(float((lo - candidate.lo).min()), float((candidate.hi - hi).min()))
        containment = min(containment, slack)
    min_gap = math.inf
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            lo_i, hi_i = images[i]
            lo_j, hi_j = images[j]
            # open boxes are disjoint iff some axis has a nonnegative gap
            gap = float((np.maximum(lo_i, lo_j) - np.minimum(hi_i, hi_j)).max())
            min_gap = min(min_gap, gap)
    holds = containment >= 0.0 and (min_gap == math.inf or min_gap >= 0.0)
    return OscBoxReport(holds, min_gap, containment)


@dataclass(frozen=True)
class OscProductReport:
    """Product OSC verdict with its factor-wise breakdown.

    The product check runs directly on the product-space system; factor OSC
    for every factor is equivalent to product OSC (with the product box), so
    ``consistent`` should always be true.  When a factor fails, ``witness``
    names two product index tuples whose images overlap.
    """

    holds: bool
    factor_reports: tuple[OscBoxReport, ...]
    product_report: OscBoxReport
    consistent: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None


def osc_check_product(p: ProductIfs, candidates: Sequence[AxisBox]) -> OscProductReport:
    """Verify factor-vs-product OSC agreement for a tuple of candidate boxes."""
    if len(candidates) != p.factor_count:
        raise StructuralError("need one candidate box per factor")
    factor_reports = tuple(
        osc_check_boxes(s, box) for s, box in zip(p.factor_systems, candidates)
    )
    product_box = AxisBox(
        np.concatenate([b.lo for b in candidates]),
        np.concatenate([b.hi for b in candidates]),
    )
    product_report = osc_check_boxes(p.as_flat_system(), product_box)
    holds = product_report.holds
    consistent = holds == all(rep.holds for rep in factor_reports)

    witness = None
    if not holds:
        witness = _overlap_witness(p, candidates, factor_reports)
    return OscProductReport(holds, factor_reports, product_report, consistent, witness)


def _overlap_witness(p, candidates, factor_reports):
    """Lift a failing factor pair to a pair of overlapping product tuples."""
    for k, rep in enumerate(factor_reports):
        if rep.holds:
            continue
        sys_k = p.factor_systems[k]
        images = [_diagonal_image(w, candidates[k]) for w in sys_k.maps]
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                lo_i, hi_i = images[i]
                lo_j, hi_j = images[j]
                if float((np.maximum(lo_i, lo_j) - np.minimum(hi_i, hi_j)).max()) < 0:
                    base = [1] * p.factor_count
                    t1 = list(base)
                    t2 = list(base)
                    t1[k] = i + 1
                    t2[k] = j + 1
                    return tuple(t1), tuple(t2)
    return None


def equal_ratio_dimension(n_maps: int, ratio: float) -> float:
    """Closed form log(N)/log(1/c) for N equal contraction ratios."""
    if n_maps < 1 or not 0 < ratio < 1:
        raise StructuralError("need n_maps >= 1 and ratio in (0, 1)")
    if n_maps == 1:
        return 0.0
    return math.log(n_maps) / math.log(1.0 / ratio)
