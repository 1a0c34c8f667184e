"""Condensation systems: the condensed operator, orbital sets, decomposition,
and inhomogeneous products.

The two-factor product battery mirrors the Cantor-with-middle-band example:
base maps x/3 and x/3 + 2/3 with the band [4/9, 5/9] as condensation set,
whose product tuple images are explicit rectangles.
"""

import math

import numpy as np
import pytest

from fractalkit.cloud import PointCloud, hausdorff_distance
from fractalkit.condensation import (
    CondensationSet,
    CondensedIfs,
    condensed_hutchinson,
    decomposition_check,
    inhomogeneous_attractor,
    interval_net,
    orbital_set,
    pairwise_disjoint_images,
    product_condensed,
    verify_product_inhomogeneous,
)
from fractalkit.errors import CapacityError, StructuralError
from fractalkit.ifs import IfsSystem, affine_1d, attractor
from fractalkit.systems import (
    binary_halves,
    cantor_band_condensed,
    cantor_thirds,
    geometric_halving_condensed,
    overlapping_halves,
)


def pts(*rows):
    return PointCloud(np.array(rows, dtype=float))


class TestCondensedOperator:
    def test_no_base_maps_returns_condensation(self):
        sys = CondensedIfs(None, CondensationSet(pts([0.5])))
        out = condensed_hutchinson(sys, pts([0.0], [1.0]))
        assert np.array_equal(out.points, np.array([[0.5]]))

    def test_output_contains_condensation_exactly(self, rng):
        sys = cantor_band_condensed(9)
        b = PointCloud(rng.random((7, 1)))
        out = condensed_hutchinson(sys, b)
        got = {tuple(p) for p in out.points}
        for p in sys.condensation.cloud.points:
            assert tuple(p) in got

    def test_images_by_enumeration(self):
        # C = {1/2}, base = cantor maps, B = C:
        # output = {1/2} u {1/6} u {2/3 + 1/6}
        sys = CondensedIfs(cantor_thirds(), CondensationSet(pts([0.5])))
        out = condensed_hutchinson(sys, pts([0.5]))
        assert sorted(out.points[:, 0]) == pytest.approx([1 / 6, 1 / 2, 5 / 6])

    def test_empty_condensation_rejected(self):
        with pytest.raises(StructuralError):
            CondensationSet(PointCloud(np.empty((0, 1))))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(StructuralError):
            CondensedIfs(cantor_thirds(), CondensationSet(pts([0.0, 0.0])))


class TestOrbitalSet:
    def test_depth_zero_is_condensation(self):
        sys = geometric_halving_condensed()
        orb = orbital_set(sys, 0)
        assert np.array_equal(orb.cloud.points, np.array([[1.0]]))

    def test_halving_word_enumeration(self):
        sys = geometric_halving_condensed()
        orb = orbital_set(sys, 3)
        assert sorted(orb.cloud.points[:, 0]) == pytest.approx([1 / 8, 1 / 4, 1 / 2, 1.0])

    def test_nesting(self):
        sys = cantor_band_condensed(5)
        small = orbital_set(sys, 2).cloud.points
        large = {tuple(p) for p in orbital_set(sys, 3).cloud.points}
        assert all(tuple(p) in large for p in small)

    def test_truncation_bound_decays_geometrically(self):
        sys = geometric_halving_condensed()
        b3 = orbital_set(sys, 3).truncation_bound
        b4 = orbital_set(sys, 4).truncation_bound
        assert b4 == pytest.approx(b3 / 2)

    def test_capacity_guard(self):
        sys = cantor_band_condensed(33)
        with pytest.raises(CapacityError):
            orbital_set(sys, 25, cap=100_000)


class TestInhomogeneousAttractor:
    def test_halving_with_point_condensation(self):
        # attractor is {1, 1/2, 1/4, ...} u {0}
        tol = 1e-6
        out = inhomogeneous_attractor(geometric_halving_condensed(), tol=tol)
        vals = np.sort(out.points[:, 0])
        expect = [0.0] + [0.5 ** k for k in range(22, -1, -1)]
        for e in expect:
            assert np.abs(vals - e).min() <= tol
        assert out.resolution <= tol

    def test_condensation_at_fixed_point_gives_homogeneous(self):
        # C = {0} is the fixed point of x/2, so the inhomogeneous attractor
        # collapses onto the homogeneous one
        base = IfsSystem((affine_1d(0.5, 0.0),))
        sys = CondensedIfs(base, CondensationSet(pts([0.0])))
        tol = 1e-8
        inhomog = inhomogeneous_attractor(sys, tol=tol)
        homog = attractor(base, seed=pts([0.0]), tol=tol)
        assert hausdorff_distance(inhomog, homog) <= 2 * tol

    def test_sierpinski_with_disc_condensation_hull(self):
        # condensation: small circle inside the triangle; the attractor keeps
        # every copy inside the triangle hull
        from fractalkit.systems import sierpinski

        angles = np.linspace(0, 2 * math.pi, 40, endpoint=False)
        circle = np.column_stack(
            [0.5 + 0.1 * np.cos(angles), 0.35 + 0.1 * np.sin(angles)]
        )
        sys = CondensedIfs(
            sierpinski(), CondensationSet(PointCloud(circle, resolution=0.02))
        )
        out = inhomogeneous_attractor(sys, tol=2.0 ** -7)
        x, y = out.points[:, 0], out.points[:, 1]
        eps = 2.0 ** -6
        assert (y >= -eps).all() and (y <= 1 + eps).all()
        assert (x >= y / 2 - eps).all() and (x <= 1 - y / 2 + eps).all()
        # the condensation circle itself must be present exactly
        got = {tuple(p) for p in out.points}
        assert all(tuple(p) in got for p in circle)


class TestDecomposition:
    def test_halving_decomposition_both_sides_enumerable(self):
        rep = decomposition_check(geometric_halving_condensed(), depth=10, tol=3.0 ** -8)
        assert rep.ok
        assert rep.distance <= rep.bound

    def test_condensation_inside_homogeneous_attractor(self):
        # C = {0} lies in the Cantor set, so F_C stays within tolerance of it
        sys = CondensedIfs(cantor_thirds(), CondensationSet(pts([0.0])))
        rep = decomposition_check(sys, depth=8, tol=3.0 ** -7)
        assert rep.ok

    def test_cantor_band_factor(self):
        rep = decomposition_check(cantor_band_condensed(17), depth=8, tol=3.0 ** -7)
        assert rep.ok

    def test_requires_base_maps(self):
        sys = CondensedIfs(None, CondensationSet(pts([0.5])))
        with pytest.raises(StructuralError):
            decomposition_check(sys, depth=3, tol=1e-4)


class TestCondensedProduct:
    def test_single_factor_same_attractor(self):
        sys = cantor_band_condensed(9)
        p = product_condensed([sys])
        tol = 1e-4
        from fractalkit.condensation import product_inhomogeneous_attractor

        direct = product_inhomogeneous_attractor(p, tol=tol)
        single = inhomogeneous_attractor(sys, tol=tol)
        assert hausdorff_distance(direct, single) <= 2 * tol

    def test_tuple_rectangles(self):
        # on the full square, the zero-zero tuple gives the band-by-band
        # square and mixed tuples give band-by-third rectangles
        p = product_condensed([cantor_band_condensed(9), cantor_band_condensed(9)])
        grid = np.linspace(0, 1, 21)
        square = PointCloud(
            np.column_stack([np.repeat(grid, 21), np.tile(grid, 21)])
        )

        def bbox(tup):
            img = p.tuple_image(tup, square)
            return (
                img.points[:, 0].min(), img.points[:, 0].max(),
                img.points[:, 1].min(), img.points[:, 1].max(),
            )

        assert bbox((0, 0)) == pytest.approx([4 / 9, 5 / 9, 4 / 9, 5 / 9])
        assert bbox((0, 1)) == pytest.approx([4 / 9, 5 / 9, 0.0, 1 / 3])
        assert bbox((0, 2)) == pytest.approx([4 / 9, 5 / 9, 2 / 3, 1.0])
        assert bbox((1, 0)) == pytest.approx([0.0, 1 / 3, 4 / 9, 5 / 9])
        assert bbox((2, 0)) == pytest.approx([2 / 3, 1.0, 4 / 9, 5 / 9])

    def test_product_contraction_is_factor_max(self):
        p = product_condensed([cantor_band_condensed(5), geometric_halving_condensed()])
        assert p.contraction == 0.5

    def test_product_factorization(self):
        p = product_condensed([cantor_band_condensed(17), cantor_band_condensed(17)])
        tol = 3.0 ** -5
        rep = verify_product_inhomogeneous(p, tol=tol, snap=tol / 4)
        assert rep.ok
        assert rep.distance <= rep.bound

    def test_degenerate_condensation_reduces_to_homogeneous_product(self):
        # condensation at the left fixed point of each factor: the product
        # inhomogeneous attractor matches the homogeneous product
        from fractalkit.cloud import ProductSet, embed
        from fractalkit.condensation import product_inhomogeneous_attractor

        sys = CondensedIfs(cantor_thirds(), CondensationSet(pts([0.0])))
        p = product_condensed([sys, sys])
        tol = 3.0 ** -5
        direct = product_inhomogeneous_attractor(p, tol=tol, snap=tol / 4)
        factor = attractor(cantor_thirds(), tol=tol)
        homog = embed(ProductSet((factor, factor)))
        assert hausdorff_distance(direct, homog) <= 2 * tol + direct.resolution + homog.resolution


class TestDisjointness:
    def test_cantor_images_disjoint_with_third_margin(self):
        net = interval_net(0.0, 1.0, 101)
        rep = pairwise_disjoint_images(cantor_thirds(), net)
        assert rep.disjoint
        assert rep.margin == pytest.approx(1 / 3, abs=0.02)

    def test_overlapping_images_not_disjoint(self):
        net = interval_net(0.0, 1.0, 101)
        rep = pairwise_disjoint_images(overlapping_halves(), net)
        assert not rep.disjoint
        assert rep.margin == 0.0

    def test_single_map_vacuous(self):
        sys = IfsSystem((affine_1d(0.5, 0.0),))
        rep = pairwise_disjoint_images(sys, interval_net(0.0, 1.0, 11))
        assert rep.disjoint and rep.margin == math.inf

    def test_condensed_includes_condensation_image(self):
        # band [4/9, 5/9] separates the two Cantor images by 1/9
        sys = cantor_band_condensed(9)
        cloud = inhomogeneous_attractor(sys, tol=1e-4)
        rep = pairwise_disjoint_images(sys, cloud)
        assert rep.disjoint
        assert 0.0 < rep.margin <= 1 / 9 + 1e-6

    def test_product_consistency_both_directions(self):
        band = cantor_band_condensed(9)
        p = product_condensed([band, band])
        cloud_factors = [
            inhomogeneous_attractor(band, tol=1e-3),
            inhomogeneous_attractor(band, tol=1e-3),
        ]
        rep = pairwise_disjoint_images(p, cloud_factors)
        assert rep.consistent
        assert rep.disjoint == all(rep.factor_disjoint)

        # an overlapping factor breaks both the factor and the product verdicts
        bad = CondensedIfs(
            overlapping_halves(),
            CondensationSet(interval_net(0.1, 0.2, 5)),
        )
        rep_bad = pairwise_disjoint_images(
            product_condensed([bad, band]),
            [interval_net(0.0, 1.0, 41), cloud_factors[0]],
        )
        assert not rep_bad.disjoint
        assert rep_bad.consistent
