"""Canonical test-battery systems used across checks, the CLI, and tests."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud
from .condensation import CondensationSet, CondensedIfs, interval_net
from .ifs import IfsSystem, ProductIfs, affine_1d, diagonal_map


def cantor_thirds() -> IfsSystem:
    """Middle-thirds Cantor system {x/3, x/3 + 2/3} on [0, 1]."""
    return IfsSystem(
        (affine_1d(1 / 3, 0.0), affine_1d(1 / 3, 2 / 3)),
        label="cantor-thirds",
    )


def binary_halves() -> IfsSystem:
    """{x/2, x/2 + 1/2}; attractor is the full interval [0, 1]."""
    return IfsSystem(
        (affine_1d(0.5, 0.0), affine_1d(0.5, 0.5)),
        label="binary-halves",
    )


def sixths_triple() -> IfsSystem:
    """Three maps of ratio 1/6 at offsets 0, 1/2, 5/6."""
    return IfsSystem(
        (affine_1d(1 / 6, 0.0), affine_1d(1 / 6, 0.5), affine_1d(1 / 6, 5 / 6)),
        label="sixths-triple",
    )


def sierpinski() -> IfsSystem:
    """Three half-scale maps whose attractor fills the triangle
    (0,0), (1,0), (1/2, 1)."""
    return IfsSystem(
        (
            diagonal_map([0.5, 0.5], [0.0, 0.0]),
            diagonal_map([0.5, 0.5], [0.5, 0.0]),
            diagonal_map([0.5, 0.5], [0.25, 0.5]),
        ),
        label="sierpinski",
    )


def overlapping_halves() -> IfsSystem:
    """{x/2, x/2 + 1/4}: images of (0,1) overlap, no OSC on that box."""
    return IfsSystem(
        (affine_1d(0.5, 0.0), affine_1d(0.5, 0.25)),
        label="overlapping-halves",
    )


def overlapping_thirds() -> IfsSystem:
    """{x/2, x/2 + 1/3}: overlapping pair."""
    return IfsSystem(
        (affine_1d(0.5, 0.0), affine_1d(0.5, 1 / 3)),
        label="overlapping-thirds",
    )


def overlapping_wide() -> IfsSystem:
    """{0.6x, 0.6x + 0.4}: overlapping pair with touching hull."""
    return IfsSystem(
        (affine_1d(0.6, 0.0), affine_1d(0.6, 0.4)),
        label="overlapping-wide",
    )


def interval_times_sparse() -> ProductIfs:
    """Product of the interval system with the sparse 1/6 triple."""
    return ProductIfs((binary_halves(), sixths_triple()))


def cantor_square() -> ProductIfs:
    """Cantor set times Cantor set."""
    return ProductIfs((cantor_thirds(), cantor_thirds()))


def cantor_band_condensed(net_points: int = 33) -> CondensedIfs:
    """Cantor base maps with the middle band [4/9, 5/9] as condensation set."""
    return CondensedIfs(cantor_thirds(), CondensationSet(interval_net(4 / 9, 5 / 9, net_points)))


def geometric_halving_condensed() -> CondensedIfs:
    """Single map x/2 with condensation {1}; attractor {2^-k} u {0}."""
    base = IfsSystem((affine_1d(0.5, 0.0),), label="halving")
    return CondensedIfs(base, CondensationSet(PointCloud(np.array([[1.0]]))))
