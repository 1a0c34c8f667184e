"""Attractors of (product) iterated function systems, condensation sets,
fractal dimensions, and fractal interpolation functions."""

from .cloud import (
    EquivalenceReport,
    PointCloud,
    ProductPoint,
    ProductSet,
    check_equivalence_bounds,
    embed,
    hausdorff_distance,
    merge_clouds,
    product_hausdorff,
    product_metric,
    union_hausdorff_check,
)
from .condensation import (
    CondensationSet,
    CondensedIfs,
    CondensedProductIfs,
    condensed_hutchinson,
    decomposition_check,
    inhomogeneous_attractor,
    interval_net,
    orbital_set,
    pairwise_disjoint_images,
    product_condensed,
    product_inhomogeneous_attractor,
    verify_product_inhomogeneous,
)
from .dimension import (
    AxisBox,
    DimensionEstimate,
    MoranSolution,
    box_count,
    box_dimension_estimate,
    default_scale_window,
    equal_ratio_dimension,
    inhomogeneous_dimension_report,
    moran_solve,
    osc_check_boxes,
    osc_check_product,
    product_dimension_report,
)
from .errors import (
    CapacityError,
    ContractError,
    NumericError,
    StructuralError,
    UnsupportedConfigurationError,
)
from .fif import (
    ContractionBounds,
    FifMaps,
    InterpolationData,
    ProductFif,
    SampledFunction,
    build_fif_maps,
    contraction_bounds,
    fif_fixed_point,
    join_up_check,
    linear_interpolant,
    norms_and_equivalence,
    product_fif,
    rb_apply,
    rb_apply_at,
)
from .ifs import (
    AffineMap,
    IfsSystem,
    ProductIfs,
    affine_1d,
    apply_map,
    attractor,
    chaos_game,
    compose_word,
    diagonal_map,
    hutchinson,
    make_product_ifs,
    product_attractor_direct,
    verify_product_attractor,
)
from .render import Viewport, ppm_bytes, rasterize, render, viewport_for
from .verify import VerificationReport, verify_all

__version__ = "0.1.0"
