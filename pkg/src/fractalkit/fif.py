"""Fractal interpolation functions and their coordinate-wise products.

Interpolation data plus vertical scalings determine affine interval maps
L_n (domain) and F_n (graph height); the fixed point of the induced
function-space operator (Tf)(x) = F_n(L_n^-1(x), f(L_n^-1(x))) is a
continuous function through the knots.  Functions are held as uniform-grid
samples with piecewise-linear reads; products are built factor-by-factor
and verified against one application of the product operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .errors import ContractError, NumericError, StructuralError

ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class InterpolationData:
    """Knots (x_i, y_i) with strictly increasing x."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=np.float64))
        y = np.atleast_1d(np.asarray(self.y, dtype=np.float64))
        if x.ndim != 1 or x.shape != y.shape:
            raise StructuralError("knots must be two equal-length vectors")
        if x.shape[0] < 2:
            raise StructuralError("need at least two knots")
        if not (np.diff(x) > 0).all():
            raise StructuralError("knot abscissae must be strictly increasing")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise StructuralError("knots contain non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def interval_count(self) -> int:
        return self.x.shape[0] - 1

    @property
    def span(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])


@dataclass(frozen=True)
class FifMaps:
    """Affine interval maps of one interpolation problem.

    Per interval n: L_n(x) = l_slope*x + l_intercept takes the whole span to
    interval n, and F_n(x, y) = alpha*y + f_xslope*x + f_intercept satisfies
    the endpoint conditions F_n(x_0, y_0) = y_{n-1}, F_n(x_N, y_N) = y_n.
    The Lipschitz records are |l_slope| (domain), |f_xslope| (the graph map
    in x) and |alpha| (in y).
    """

    data: InterpolationData
    alphas: np.ndarray
    l_slope: np.ndarray
    l_intercept: np.ndarray
    f_xslope: np.ndarray
    f_intercept: np.ndarray

    @property
    def interval_count(self) -> int:
        return self.data.interval_count

    def l_apply(self, n: int, x):
        return self.l_slope[n] * np.asarray(x) + self.l_intercept[n]

    def l_invert(self, n: int, x):
        return (np.asarray(x) - self.l_intercept[n]) / self.l_slope[n]

    def f_apply(self, n: int, x, y):
        return (
            self.alphas[n] * np.asarray(y)
            + self.f_xslope[n] * np.asarray(x)
            + self.f_intercept[n]
        )


def build_fif_maps(data: InterpolationData, alphas: Sequence[float]) -> FifMaps:
    """Solve the endpoint conditions for the affine interval maps.

    Vertical scalings must satisfy |alpha_n| < 1; the domain maps need
    at least two intervals to be contractions.
    """
    al = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    n = data.interval_count
    if al.shape != (n,):
        raise StructuralError(f"need {n} vertical scalings, got shape {al.shape}")
    if not (np.abs(al) < 1.0).all():
        raise ContractError("vertical scalings must satisfy |alpha| < 1")
    x, y = data.x, data.y
    span = x[-1] - x[0]
    l_slope = np.diff(x) / span
    if not (np.abs(l_slope) < 1.0).all():
        raise ContractError(
            "domain maps must contract: use at least two intervals"
        )
    l_intercept = x[:-1] - l_slope * x[0]
    f_xslope = (np.diff(y) - al * (y[-1] - y[0])) / span
    f_intercept = y[:-1] - al * y[0] - f_xslope * x[0]
    maps = FifMaps(data, al, l_slope, l_intercept, f_xslope, f_intercept)
    for i in range(n):
        checks = (
            abs(maps.l_apply(i, x[0]) - x[i]),
            abs(maps.l_apply(i, x[-1]) - x[i + 1]),
            abs(maps.f_apply(i, x[0], y[0]) - y[i]),
            abs(maps.f_apply(i, x[-1], y[-1]) - y[i + 1]),
        )
        if max(checks) > ENDPOINT_TOL * max(1.0, float(np.abs(y).max())):
            raise NumericError(f"endpoint conditions violated on interval {i}")
    return maps


@dataclass(frozen=True)
class ContractionBounds:
    """Hyperbolicity data of the graph IFS in the skewed metric
    |dx| + theta*|dy|.

    ``rate_x`` bounds the metric's horizontal expansion, ``rate_y`` the
    vertical one; ``factor`` = max of the two must be < 1.  When the
    textbook theta lands exactly on rate_x = 1 it is shrunk slightly
    (``boundary_adjusted``); with no x-coupling at all theta defaults to 1.
    """

    theta: float
    rate_x: float
    rate_y: float
    factor: float
    boundary_adjusted: bool = False
    degenerate_x: bool = False


def contraction_bounds(maps: FifMaps) -> ContractionBounds:
    """Compute the skew parameter theta and the contraction factor."""
    lip_l = np.abs(maps.l_slope)
    lip_fx = np.abs(maps.f_xslope)
    lip_fy = np.abs(maps.alphas)
    rate_y = float(lip_fy.max())
    a_max = float(lip_fx.max())
    c_max = float(lip_l.max())
    if a_max == 0.0:
        theta = 1.0
        rate_x = c_max
        factor = max(rate_x, rate_y)
        if factor >= 1.0:
            raise ContractError(f"contraction factor {factor} is not < 1")
        return ContractionBounds(theta, rate_x, rate_y, factor, degenerate_x=True)
    theta = float((1.0 - lip_l).min()) / a_max
    rate_x = float((lip_l + theta * lip_fx).max())
    adjusted = False
    if rate_x >= 1.0 - 1e-12:
        theta *= (1.0 - 1e-6) * (1.0 - c_max) / (theta * a_max)
        rate_x = float((lip_l + theta * lip_fx).max())
        adjusted = True
    factor = max(rate_x, rate_y)
    if factor >= 1.0:
        raise ContractError(f"contraction factor {factor} is not < 1")
    return ContractionBounds(theta, rate_x, rate_y, factor, boundary_adjusted=adjusted)


@dataclass(frozen=True)
class SampledFunction:
    """Continuous function on an interval sampled on a uniform grid.

    Endpoint values are pinned to the stated (y0, y1).  Reads between
    samples are piecewise linear.
    """

    x0: float
    x1: float
    values: np.ndarray
    y0: float
    y1: float

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 1 or vals.shape[0] < 2:
            raise StructuralError("sampled function needs at least 2 samples")
        if not np.isfinite(vals).all():
            raise StructuralError("sampled function has non-finite values")
        if not self.x1 > self.x0:
            raise StructuralError("domain must be a nonempty interval")
        scale = max(1.0, float(np.abs(vals).max()))
        if abs(vals[0] - self.y0) > ENDPOINT_TOL * scale or abs(
            vals[-1] - self.y1
        ) > ENDPOINT_TOL * scale:
            raise StructuralError("sample endpoints do not match the pinned values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grid_size(self) -> int:
        return self.values.shape[0] - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.values.shape[0])

    def at(self, x) -> np.ndarray:
        """Piecewise-linear read at arbitrary abscissae."""
        return np.interp(np.asarray(x, dtype=np.float64), self.grid, self.values)

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())


def linear_interpolant(data: InterpolationData, grid_size: int) -> SampledFunction:
    """Piecewise-linear interpolant of the knots on a uniform grid."""
    if grid_size < data.interval_count:
        raise StructuralError("grid must be at least as fine as the knot intervals")
    xs = np.linspace(data.x[0], data.x[-1], grid_size + 1)
    vals = np.interp(xs, data.x, data.y)
    vals[0] = data.y[0]
    vals[-1] = data.y[-1]
    return SampledFunction(
        float(data.x[0]), float(data.x[-1]), vals, float(data.y[0]), float(data.y[-1])
    )


def _check_pinned(maps: FifMaps, f: SampledFunction):
    data = maps.data
    scale = max(1.0, float(np.abs(data.y).max()))
    if (
        abs(f.x0 - data.x[0]) > ENDPOINT_TOL
        or abs(f.x1 - data.x[-1]) > ENDPOINT_TOL
        or abs(f.y0 - data.y[0]) > ENDPOINT_TOL * scale
        or abs(f.y1 - data.y[-1]) > ENDPOINT_TOL * scale
    ):
        raise ContractError("input function is not pinned to the knot endpoints")


def rb_apply_at(maps: FifMaps, f: SampledFunction, xs) -> np.ndarray:
    """Evaluate the interpolation operator of ``maps`` on ``f`` at ``xs``.

    For x in interval n this is F_n(L_n^-1(x), f(L_n^-1(x))); at interior
    knots both adjacent intervals give the knot value, so the assignment of
    knots to intervals is immaterial.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    knots = maps.data.x
    idx = np.clip(np.searchsorted(knots, xs, side="right") - 1, 0, maps.interval_count - 1)
    u = (xs - maps.l_intercept[idx]) / maps.l_slope[idx]
    u = np.clip(u, knots[0], knots[-1])
    fu = f.at(u)
    return maps.alphas[idx] * fu + maps.f_xslope[idx] * u + maps.f_intercept[idx]


def rb_apply(maps: FifMaps, f: SampledFunction) -> SampledFunction:
    """One application of the interpolation operator on the sample grid."""
    _check_pinned(maps, f)
    xs = f.grid
    vals = rb_apply_at(maps, f, xs)
    # the operator reproduces the endpoints exactly; re-pin to keep the
    # invariant bit-tight across iterations
    vals[0] = maps.data.y[0]
    vals[-1] = maps.data.y[-1]
    return SampledFunction(f.x0, f.x1, vals, f.y0, f.y1)


def fif_fixed_point(
    maps: FifMaps,
    grid_size: int = 4096,
    tol: float = 1e-8,
    max_sweeps: int | None = None,
) -> SampledFunction:
    """Iterate the interpolation operator to its fixed point.

    Starts from the piecewise-linear interpolant and stops once the sup-norm
    step falls below tol*(1 - rate_y).  Five consecutive growing steps raise
    a numeric error naming the measured ratio.
    """
    if tol <= 0:
        raise ContractError(f"tolerance must be positive, got {tol}")
    bounds = contraction_bounds(maps)
    b = bounds.rate_y
    g = linear_interpolant(maps.data, grid_size)
    if max_sweeps is None:
        max_sweeps = 200 if b == 0.0 else int(
            max(8, math.ceil(math.log(1e-17) / math.log(b))) + 20
        )
    prev_delta = math.inf
    growth = 0
    for _ in range(max_sweeps):
        g_next = rb_apply(maps, g)
        delta = float(np.abs(g_next.values - g.values).max())
        if delta <= tol * (1.0 - b):
            return g_next
        if delta > prev_delta:
            growth += 1
            if growth >= 5:
                raise NumericError(
                    f"iteration diverging: step ratio {delta / prev_delta:.6g}"
                )
        else:
            growth = 0
        prev_delta = delta
        g = g_next
    raise NumericError(f"no convergence within {max_sweeps} sweeps (last step {prev_delta:g})")


@dataclass(frozen=True)
class ProductFif:
    """Coordinate-wise product of factor interpolation functions.

    The product operator acts factor-by-factor, so the tuple of factor
    fixed points is the product fixed point; ``residuals`` records how much
    one application of the product operator moved each component.
    """

    factors: tuple[SampledFunction, ...]
    maps: tuple[FifMaps, ...]
    residuals: tuple[float, ...]

    @property
    def factor_count(self) -> int:
        return len(self.factors)

    def evaluate(self, coords: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Component values g_k(x_k) for per-factor abscissae."""
        if len(coords) != self.factor_count:
            raise StructuralError("need one abscissa block per factor")
        return [g.at(x) for g, x in zip(self.factors, coords)]


def product_fif(
    per_factor: Sequence[tuple[InterpolationData, Sequence[float]]],
    grid_size: int = 4096,
    tol: float = 1e-8,
) -> ProductFif:
    """Compute factor fixed points independently and verify the product.

    One application of the product operator (component-wise) must move no
    sample by more than tol; the per-component residuals are stored.
    """
    if len(per_factor) == 0:
        raise StructuralError("need at least one factor")
    maps = tuple(build_fif_maps(data, al) for data, al in per_factor)
    factors = tuple(fif_fixed_point(m, grid_size=grid_size, tol=tol) for m in maps)
    residuals = []
    for m, g in zip(maps, factors):
        moved = rb_apply(m, g)
        residuals.append(float(np.abs(moved.values - g.values).max()))
    if any(r > tol for r in residuals):
        raise NumericError(
            f"product operator residuals {residuals} exceed tolerance {tol}"
        )
    return ProductFif(factors, maps, tuple(residuals))


@dataclass(frozen=True)
class NormReport:
    """Sup norm of the product function vs the factor-wise combination.

    ``norm_sup`` maximizes the Euclidean length of the component vector over
    the sample lattice; ``norm_factorwise`` is the root-sum-of-squares of
    per-factor sup norms.  The sandwich is
    norm_factorwise/sqrt(m) <= norm_sup <= norm_factorwise.
    """

    norm_sup: float
    norm_factorwise: float
    factor_count: int
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def norms_and_equivalence(
    functions: ProductFif | Sequence[SampledFunction],
    samples_per_factor: int = 65,
    tol: float = 1e-9,
) -> NormReport:
    """Evaluate both norms on a shared product lattice and check the sandwich."""
    factors = functions.factors if isinstance(functions, ProductFif) else tuple(functions)
    if len(factors) == 0:
        raise StructuralError("need at least one factor function")
    if samples_per_factor ** len(factors) > 50_000_000:
        raise StructuralError("sample lattice too large; reduce samples_per_factor")
    values = []
    for g in factors:
        xs = np.linspace(g.x0, g.x1, samples_per_factor)
        values.append(g.at(xs))
    norm_factorwise = math.sqrt(sum(float((v ** 2).max()) for v in values))
    # accumulate sum of squared components over the full lattice
    total = values[0] ** 2
    for v in values[1:]:
        total = total[..., None] + v ** 2
    norm_sup = math.sqrt(float(total.max()))
    m = len(factors)
    lower_ok = norm_factorwise / math.sqrt(m) <= norm_sup + tol
    upper_ok = norm_sup <= norm_factorwise + tol
    return NormReport(norm_sup, norm_factorwise, m, lower_ok, upper_ok)


def _corner_index(i: int, j_is_right: bool) -> int:
    # interval i (1-based) sends the left domain corner to knot i-1 and the
    # right corner to knot i
    return i if j_is_right else i - 1


@dataclass(frozen=True)
class JoinUpReport:
    """Corner consistency of the product graph maps across all index tuples."""

    ok: bool
    max_deviation: float
    tuples_checked: int


def join_up_check(maps_list: Sequence[FifMaps], tol: float = ENDPOINT_TOL) -> JoinUpReport:
    """Verify that every product graph map sends domain corners onto knots.

    For every index tuple and every choice of corner per factor, the product
    map (L, F) must land on the knot selected by shifting the interval index
    down when the corner is the left endpoint.
    """
    if len(maps_list) == 0:
        raise StructuralError("need at least one factor")
    worst = 0.0
    count = 0
    interval_ranges = [range(1, m.interval_count + 1) for m in maps_list]
    for tup in iter_product(*interval_ranges):
        for corners in iter_product((False, True), repeat=len(maps_list)):
            count += 1
            for m, i, right in zip(maps_list, tup, corners):
                x = m.data.x[-1] if right else m.data.x[0]
                y = m.data.y[-1] if right else m.data.y[0]
                target = _corner_index(i, right)
                dev_x = abs(float(m.l_apply(i - 1, x)) - float(m.data.x[target]))
                dev_y = abs(float(m.f_apply(i - 1, x, y)) - float(m.data.y[target]))
                worst = max(worst, dev_x, dev_y)
    return JoinUpReport(worst <= tol, worst, count)
