"""Verification battery: cross-path checks with certified bounds.

Every report names the mathematical statement it verifies, the measured
quantities, and the certified bound; a check may only fail when a measured
value exceeds its bound, and may only be inconclusive when a hypothesis
could not be verified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import systems
from .cloud import (
    PointCloud,
    ProductSet,
    check_equivalence_bounds,
    embed,
    hausdorff_distance,
    union_hausdorff_check,
)
from .condensation import (
    decomposition_check,
    pairwise_disjoint_images,
    product_condensed,
    verify_product_inhomogeneous,
)
from .dimension import (
    AxisBox,
    box_dimension_estimate,
    equal_ratio_dimension,
    inhomogeneous_dimension_report,
    moran_solve,
    osc_check_boxes,
    osc_check_product,
    product_dimension_report,
)
from .errors import StructuralError
from .fif import (
    InterpolationData,
    build_fif_maps,
    fif_fixed_point,
    join_up_check,
    norms_and_equivalence,
    product_fif,
    rb_apply,
)
from .ifs import (
    IfsSystem,
    ProductIfs,
    attractor,
    hutchinson,
    product_attractor_direct,
    verify_product_attractor,
)


@dataclass(frozen=True)
class VerificationReport:
    """One named check: measured quantities against a certified bound."""

    name: str
    anchor: str
    measured: dict[str, float] = field(default_factory=dict)
    bound: float | None = None
    status: str = "pass"

    def __post_init__(self):
        if self.status not in ("pass", "fail", "inconclusive"):
            raise StructuralError(f"unknown status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        parts = [f"[{self.status.upper():^12s}] {self.name}"]
        if self.measured:
            kv = ", ".join(f"{k}={v:.6g}" for k, v in self.measured.items())
            parts.append(f"({kv})")
        if self.bound is not None:
            parts.append(f"bound={self.bound:.6g}")
        return " ".join(parts)


def _bounded(name, anchor, value, bound, **extra) -> VerificationReport:
    measured = {"value": value, **extra}
    status = "pass" if value <= bound else "fail"
    return VerificationReport(name, anchor, measured, bound, status)


def _flag(name, anchor, ok, **measured) -> VerificationReport:
    return VerificationReport(
        name, anchor, dict(measured), None, "pass" if ok else "fail"
    )


# ---------------------------------------------------------------------------
# metric suite
# ---------------------------------------------------------------------------

def _random_product_set(rng, m, max_points=20, dim_per_factor=1) -> ProductSet:
    factors = []
    for _ in range(m):
        n = int(rng.integers(1, max_points + 1))
        factors.append(PointCloud(rng.random((n, dim_per_factor))))
    return ProductSet(tuple(factors))


def metric_suite(n_pairs: int = 200, rng_seed: int = 0) -> list[VerificationReport]:
    rng = np.random.default_rng(rng_seed)
    worst_low = 0.0
    worst_high = 0.0
    for _ in range(n_pairs):
        a = _random_product_set(rng, 2)
        b = _random_product_set(rng, 2)
        rep = check_equivalence_bounds(a, b)
        worst_low = max(worst_low, rep.factorwise / math.sqrt(2) - rep.embedded)
        worst_high = max(worst_high, rep.embedded - rep.factorwise)
    reports = [
        _bounded(
            f"metric equivalence sandwich on {n_pairs} random pairs",
            "product-vs-embedded Hausdorff metric equivalence",
            max(worst_low, worst_high),
            1e-12,
            worst_lower_violation=worst_low,
            worst_upper_violation=worst_high,
        )
    ]
    worst = -math.inf
    for _ in range(50):
        k = int(rng.integers(1, 5))
        cs = [PointCloud(rng.random((int(rng.integers(1, 12)), 2))) for _ in range(k)]
        ds = [PointCloud(rng.random((int(rng.integers(1, 12)), 2))) for _ in range(k)]
        rep = union_hausdorff_check(cs, ds)
        worst = max(worst, rep.lhs - rep.rhs)
    reports.append(
        _bounded(
            "union Hausdorff bound on 50 random collections",
            "Hausdorff distance of unions vs max over pieces",
            worst,
            1e-12,
        )
    )
    return reports


# ---------------------------------------------------------------------------
# attractor suite
# ---------------------------------------------------------------------------

def hutchinson_factorization_check(
    p: ProductIfs, n_seeds: int = 20, rng_seed: int = 0
) -> VerificationReport:
    """Exact set equality of the product-space operator on an embedded cloud
    and the embedding of the factor-wise operator images."""
    from .cloud import points_equal_as_sets

    rng = np.random.default_rng(rng_seed)
    flat = p.as_flat_system()
    failures = 0
    for _ in range(n_seeds):
        factor_clouds = []
        for s in p.factor_systems:
            n = int(rng.integers(1, 6))
            factor_clouds.append(PointCloud(rng.random((n, s.dim))))
        embedded = embed(ProductSet(tuple(factor_clouds)))
        lhs = hutchinson(flat, embedded)
        rhs = embed(ProductSet(tuple(hutchinson(s, c) for s, c in zip(p.factor_systems, factor_clouds))))
        if not points_equal_as_sets(lhs.points, rhs.points):
            failures += 1
    return _flag(
        f"Hutchinson factorization, {n_seeds} random seeds",
        "product-space operator equals product of factor operators",
        failures == 0,
        failures=failures,
    )


def product_attractor_check(
    p: ProductIfs,
    tol: float,
    name: str,
    snap: float | None = None,
    fault_offset: float = 0.0,
) -> VerificationReport:
    """Cross-path product attractor check.

    ``fault_offset`` perturbs the direct path's system (negative-control
    hook); the factor path stays clean, so any nonzero fault must surface as
    a failure once it exceeds the certified bound.
    """
    if fault_offset:
        flat = p.as_flat_system()
        maps = list(flat.maps)
        first = maps[0]
        from .ifs import AffineMap

        maps[0] = AffineMap(
            first.linear, first.offset + fault_offset, first.lipschitz
        )
        direct = attractor(IfsSystem(tuple(maps)), tol=tol, snap=snap)
        factor_clouds = [attractor(s, tol=tol) for s in p.factor_systems]
        embedded = embed(ProductSet(tuple(factor_clouds)))
        distance = hausdorff_distance(direct, embedded)
        bound = 2 * tol + direct.resolution + embedded.resolution
        return _bounded(name, "product attractor factorization", distance, bound)
    rep = verify_product_attractor(p, tol=tol, snap=snap)
    return _bounded(
        name,
        "product attractor factorization",
        rep.distance,
        rep.bound,
    )


def attractor_suite(rng_seed: int = 0) -> list[VerificationReport]:
    reports = [
        hutchinson_factorization_check(systems.cantor_square(), rng_seed=rng_seed),
        hutchinson_factorization_check(systems.interval_times_sparse(), rng_seed=rng_seed + 1),
        product_attractor_check(
            systems.cantor_square(), tol=3.0 ** -6, name="product attractor: cantor x cantor"
        ),
        product_attractor_check(
            systems.interval_times_sparse(),
            tol=6.0 ** -4,
            snap=6.0 ** -4 / 4,
            name="product attractor: interval x sparse triple",
        ),
    ]
    return reports


# ---------------------------------------------------------------------------
# inhomogeneous suite
# ---------------------------------------------------------------------------

def inhomogeneous_suite(rng_seed: int = 0) -> list[VerificationReport]:
    reports = []
    dec1 = decomposition_check(systems.geometric_halving_condensed(), depth=10, tol=3.0 ** -8)
    reports.append(
        _bounded(
            "orbital decomposition: halving with condensation point",
            "inhomogeneous attractor equals orbital set joined with attractor",
            dec1.distance,
            dec1.bound,
        )
    )
    dec2 = decomposition_check(systems.cantor_band_condensed(), depth=8, tol=3.0 ** -6)
    reports.append(
        _bounded(
            "orbital decomposition: cantor with band condensation",
            "inhomogeneous attractor equals orbital set joined with attractor",
            dec2.distance,
            dec2.bound,
        )
    )
    band = product_condensed([systems.cantor_band_condensed(), systems.cantor_band_condensed()])
    rep = verify_product_inhomogeneous(band, tol=3.0 ** -5, snap=3.0 ** -5 / 4)
    reports.append(
        _bounded(
            "inhomogeneous product: cantor-band squared",
            "inhomogeneous product attractor factorization",
            rep.distance,
            rep.bound,
        )
    )
    return reports


# ---------------------------------------------------------------------------
# OSC suite
# ---------------------------------------------------------------------------

def osc_pairings() -> list[tuple[str, IfsSystem]]:
    return [
        ("cantor-thirds", systems.cantor_thirds()),
        ("binary-halves", systems.binary_halves()),
        ("sixths-triple", systems.sixths_triple()),
        ("overlapping-halves", systems.overlapping_halves()),
        ("overlapping-thirds", systems.overlapping_thirds()),
        ("overlapping-wide", systems.overlapping_wide()),
    ]


def osc_suite() -> list[VerificationReport]:
    unit = AxisBox(np.array([0.0]), np.array([1.0]))
    named = osc_pairings()
    mismatches = 0
    pairings = 0
    witness_missing = 0
    for i in range(len(named)):
        for j in range(i, len(named)):
            if pairings >= 9:
                break
            name_a, sys_a = named[i]
            name_b, sys_b = named[j]
            p = ProductIfs((sys_a, sys_b))
            rep = osc_check_product(p, [unit, unit])
            expected = all(r.holds for r in rep.factor_reports)
            if rep.holds != expected or not rep.consistent:
                mismatches += 1
            if not rep.holds and rep.witness is None:
                witness_missing += 1
            pairings += 1
    return [
        _flag(
            f"open-set-condition product equivalence over {pairings} pairings",
            "factor OSC for all factors iff product OSC",
            mismatches == 0 and witness_missing == 0,
            mismatches=mismatches,
            witness_missing=witness_missing,
        )
    ]


# ---------------------------------------------------------------------------
# dimension suite
# ---------------------------------------------------------------------------

def dimension_suite(depth: int = 10) -> list[VerificationReport]:
    reports = []
    sol = moran_solve([1 / 3, 1 / 3])
    reports.append(
        _bounded(
            "similarity dimension of the cantor ratios",
            "root of the ratio-power sum equation",
            abs(sol.s - equal_ratio_dimension(2, 1 / 3)),
            1e-9,
        )
    )
    # cantor attractor cloud at the given depth from the left endpoint
    cantor = systems.cantor_thirds()
    cloud = attractor(cantor, seed=PointCloud(np.array([[0.0]])), tol=3.0 ** -depth)
    est = box_dimension_estimate(cloud, r_min=3.0 ** -6, r_max=3.0 ** -2, n_scales=5)
    reports.append(
        _bounded(
            f"box dimension of depth-{depth} cantor cloud",
            "box-count slope matches the similarity dimension",
            abs(est.slope - equal_ratio_dimension(2, 1 / 3)),
            0.05,
            slope=est.slope,
            r_squared=est.r_squared,
        )
    )
    square = systems.cantor_square()
    unit = AxisBox(np.array([0.0]), np.array([1.0]))
    osc_rep = osc_check_product(square, [unit, unit])
    factor_clouds = [
        attractor(s, seed=PointCloud(np.array([[0.0]])), tol=3.0 ** -depth)
        for s in square.factor_systems
    ]
    emb = embed(ProductSet(tuple(factor_clouds)), cap=50_000_000)
    est2 = box_dimension_estimate(emb, r_min=3.0 ** -5, r_max=3.0 ** -2, n_scales=4)
    prep = product_dimension_report(
        [moran_solve([1 / 3, 1 / 3]), moran_solve([1 / 3, 1 / 3])],
        est2,
        osc_verified=osc_rep.holds,
    )
    reports.append(
        _bounded(
            "product dimension: cantor x cantor",
            "product attractor dimension equals the sum of factor roots",
            abs(prep.measured - prep.predicted),
            prep.tolerance,
            predicted=prep.predicted,
            measured=prep.measured,
        )
    )
    return reports


# ---------------------------------------------------------------------------
# interpolation suite
# ---------------------------------------------------------------------------

def _tent_data() -> InterpolationData:
    return InterpolationData(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))


def fif_suite(rng_seed: int = 0) -> list[VerificationReport]:
    rng = np.random.default_rng(rng_seed)
    reports = []
    maps = build_fif_maps(_tent_data(), [0.5, -0.5])
    g = fif_fixed_point(maps, grid_size=2 ** 12, tol=1e-8)
    knot_dev = float(np.abs(g.at(maps.data.x) - maps.data.y).max())
    reports.append(
        _bounded(
            "knot reproduction of the interpolation fixed point",
            "graph fixed point interpolates the data",
            knot_dev,
            1e-7,
        )
    )
    # measured contraction of the operator on random pinned pairs
    worst = 0.0
    b = float(np.abs(maps.alphas).max())
    for _ in range(20):
        va = rng.standard_normal(g.values.shape[0])
        vb = rng.standard_normal(g.values.shape[0])
        for v in (va, vb):
            v[0] = maps.data.y[0]
            v[-1] = maps.data.y[-1]
        from .fif import SampledFunction

        fa = SampledFunction(g.x0, g.x1, va, maps.data.y[0], maps.data.y[-1])
        fb = SampledFunction(g.x0, g.x1, vb, maps.data.y[0], maps.data.y[-1])
        num = float(np.abs(rb_apply(maps, fa).values - rb_apply(maps, fb).values).max())
        den = float(np.abs(va - vb).max())
        worst = max(worst, num / den)
    reports.append(
        _bounded(
            "measured interpolation-operator contraction ratio",
            "vertical scaling bounds the operator contraction",
            worst,
            b + 0.02,
        )
    )
    pf = product_fif(
        [(_tent_data(), [0.5, -0.5]), (_tent_data(), [0.3, 0.3])],
        grid_size=2 ** 10,
        tol=1e-8,
    )
    reports.append(
        _bounded(
            "product interpolation residual",
            "product operator fixes the tuple of factor fixed points",
            max(pf.residuals),
            1e-8,
        )
    )
    norm_rep = norms_and_equivalence(pf)
    reports.append(
        _flag(
            "norm sandwich on the product interpolation function",
            "sup norm vs factor-wise norm equivalence",
            norm_rep.ok,
            norm_sup=norm_rep.norm_sup,
            norm_factorwise=norm_rep.norm_factorwise,
        )
    )
    ju = join_up_check([m for m in pf.maps])
    reports.append(
        _bounded(
            "corner join-up of the product graph maps",
            "graph maps send domain corners onto knots",
            ju.max_deviation,
            1e-12,
        )
    )
    return reports


SUITES = {
    "metric": metric_suite,
    "attractor": attractor_suite,
    "inhomogeneous": inhomogeneous_suite,
    "osc": osc_suite,
    "dimension": dimension_suite,
    "fif": fif_suite,
}


def verify_all(only: str | None = None) -> list[VerificationReport]:
    """Run the verification battery (optionally a single suite)."""
    if only is not None and only not in SUITES:
        raise StructuralError(
            f"unknown suite {only!r}; choose from {sorted(SUITES)}"
        )
    names = [only] if only else list(SUITES)
    reports: list[VerificationReport] = []
    for name in names:
        reports.extend(SUITES[name]())
    return reports
