"""IFS maps, Hutchinson operator, attractors, and product systems.

Expected values: map images and compositions are hand-evaluated symbolic
compositions; attractor checks use the certified resolution contract and
cross-path comparisons.
"""

import math

import numpy as np
import pytest

from fractalkit.cloud import PointCloud, ProductSet, embed, hausdorff_distance, points_equal_as_sets
from fractalkit.errors import CapacityError, ContractError, StructuralError
from fractalkit.ifs import (
    AffineMap,
    IfsSystem,
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
from fractalkit.systems import (
    binary_halves,
    cantor_square,
    cantor_thirds,
    interval_times_sparse,
    sierpinski,
    sixths_triple,
)


def pts(*rows):
    return PointCloud(np.array(rows, dtype=float))


class TestAffineMap:
    def test_collapse_to_offset(self):
        w = affine_1d(0.0, 0.7)
        assert apply_map(w, np.array([3.0])) == pytest.approx(0.7)

    def test_cantor_left_map(self):
        w = affine_1d(1 / 3, 0.0)
        assert apply_map(w, np.array([1.0]))[0] == pytest.approx(1 / 3)

    def test_cantor_right_map(self):
        w = affine_1d(1 / 3, 2 / 3)
        assert apply_map(w, np.array([1.0]))[0] == pytest.approx(1.0)

    def test_understated_lipschitz_rejected(self):
        with pytest.raises(ContractError):
            AffineMap(np.array([[0.9]]), np.array([0.0]), 0.5)

    def test_expansion_rejected(self):
        with pytest.raises(ContractError):
            affine_1d(1.2, 0.0)

    def test_dimension_mismatch(self):
        w = diagonal_map([0.5, 0.5], [0.0, 0.0])
        with pytest.raises(StructuralError):
            w.apply(np.array([1.0]))

    def test_similarity_flag(self):
        assert diagonal_map([0.5, 0.5], [0.0, 0.0]).is_similarity
        assert not diagonal_map([0.5, 0.25], [0.0, 0.0]).is_similarity
        rot = 0.5 * np.array([[np.cos(1.0), -np.sin(1.0)], [np.sin(1.0), np.cos(1.0)]])
        assert AffineMap(rot, np.zeros(2), 0.5 + 1e-12).is_similarity

    def test_fixed_point(self):
        w = affine_1d(0.5, 0.5)
        assert w.fixed_point()[0] == pytest.approx(1.0)


class TestComposeWord:
    def test_single_letter(self):
        sys = cantor_thirds()
        w = compose_word(sys, (1,))
        assert np.array_equal(w.linear, sys.maps[0].linear)
        assert np.array_equal(w.offset, sys.maps[0].offset)

    def test_left_left(self):
        w = compose_word(cantor_thirds(), (1, 1))
        assert w.linear[0, 0] == pytest.approx(1 / 9)
        assert w.offset[0] == 0.0

    def test_right_then_left(self):
        # f2 o f1: x -> f2(x/3) = x/9 + 2/3
        w = compose_word(cantor_thirds(), (2, 1))
        assert w.linear[0, 0] == pytest.approx(1 / 9)
        assert w.offset[0] == pytest.approx(2 / 3)

    def test_lipschitz_is_exact_product(self):
        sys = cantor_thirds()
        w = compose_word(sys, (1, 2, 1, 2))
        expected = 1.0
        for _ in range(4):
            expected *= 1 / 3
        assert w.lipschitz == expected

    def test_empty_word_rejected(self):
        with pytest.raises(StructuralError):
            compose_word(cantor_thirds(), ())

    def test_out_of_range_index(self):
        with pytest.raises(StructuralError):
            compose_word(cantor_thirds(), (3,))


class TestHutchinson:
    def test_fixed_point_of_single_map(self):
        sys = IfsSystem((affine_1d(0.5, 0.5),))
        out = hutchinson(sys, pts([1.0]))
        assert np.array_equal(out.points, np.array([[1.0]]))

    def test_cantor_endpoints(self):
        out = hutchinson(cantor_thirds(), pts([0.0], [1.0]))
        assert sorted(out.points[:, 0]) == pytest.approx([0.0, 1 / 3, 2 / 3, 1.0])

    def test_cantor_two_levels(self):
        out = hutchinson(cantor_thirds(), hutchinson(cantor_thirds(), pts([0.0], [1.0])))
        assert len(out) == 8
        # every point sits inside a level-2 interval [a, a + 1/9]
        starts = np.array([0, 2 / 9, 2 / 3, 8 / 9])
        for p in out.points[:, 0]:
            assert ((p >= starts - 1e-12) & (p <= starts + 1 / 9 + 1e-12)).any()

    def test_monotone_inclusion(self, rng):
        sys = cantor_thirds()
        b = rng.random((10, 1))
        a = b[:6]
        img_a = hutchinson(sys, PointCloud(a)).points
        img_b = hutchinson(sys, PointCloud(b)).points
        set_b = {tuple(p) for p in img_b}
        assert all(tuple(p) in set_b for p in img_a)

    def test_contraction_in_hausdorff(self, rng):
        sys = cantor_thirds()
        c = sys.contraction
        for _ in range(40):
            a = PointCloud(rng.random((6, 1)))
            b = PointCloud(rng.random((9, 1)))
            lhs = hausdorff_distance(hutchinson(sys, a), hutchinson(sys, b))
            assert lhs <= c * hausdorff_distance(a, b) + 1e-12

    def test_resolution_scales(self):
        b = PointCloud(np.array([[0.0]]), resolution=0.3)
        assert hutchinson(cantor_thirds(), b).resolution == pytest.approx(0.1)


class TestAttractor:
    def test_single_map_fixed_point(self):
        sys = IfsSystem((affine_1d(0.5, 0.0),))
        out = attractor(sys, seed=pts([1.0]), tol=1e-6)
        assert np.abs(out.points).max() <= 1e-6

    def test_cantor_certified(self):
        tol = (1 / 3) ** 10
        out = attractor(cantor_thirds(), seed=pts([0.0], [1.0]), tol=tol)
        vals = np.sort(out.points[:, 0])
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert out.resolution <= tol
        # oracle: enumerate the level-12 construction intervals; the true
        # Cantor set meets each of them, so distance-to-set and distance-to-
        # intervals agree within the interval length
        level = 12
        starts = np.array([0.0])
        for _ in range(level):
            starts = np.concatenate([starts / 3, starts / 3 + 2 / 3])
        starts = np.sort(starts)
        width = 3.0 ** -level
        idx = np.clip(np.searchsorted(starts, vals) - 1, 0, len(starts) - 1)
        dist = np.minimum(
            np.abs(vals - np.clip(vals, starts[idx], starts[idx] + width)),
            np.abs(vals - starts[np.minimum(idx + 1, len(starts) - 1)]),
        )
        assert dist.max() <= tol + width

    def test_sierpinski_hull(self):
        out = attractor(sierpinski(), seed=pts([0.0, 0.0]), tol=2.0 ** -8)
        x, y = out.points[:, 0], out.points[:, 1]
        eps = 2.0 ** -8
        assert (y >= -eps).all() and (y <= 1 + eps).all()
        # inside the triangle (0,0), (1,0), (1/2,1): x between y/2 and 1-y/2
        assert (x >= y / 2 - eps).all() and (x <= 1 - y / 2 + eps).all()

    def test_seed_invariance(self, rng):
        tol = 1e-5
        a = attractor(cantor_thirds(), seed=pts([0.3]), tol=tol)
        b = attractor(cantor_thirds(), seed=PointCloud(rng.random((5, 1))), tol=tol)
        assert hausdorff_distance(a, b) <= 2 * tol

    def test_snap_mode_certifies(self):
        tol = 1e-4
        out = attractor(binary_halves(), tol=tol, snap=tol / 4)
        assert out.resolution <= tol + (tol / 4) / 2 / (1 - 0.5)
        # attractor is [0,1]; cloud must cover it at the recorded resolution
        grid = np.linspace(0, 1, 2001)[:, None]
        cover = hausdorff_distance(out, PointCloud(grid))
        assert cover <= out.resolution + 5e-4  # grid spacing slack

    def test_capacity_error_without_snap(self):
        with pytest.raises(CapacityError):
            attractor(cantor_square().as_flat_system(), tol=3.0 ** -12, max_points=1000)

    def test_bad_tolerance(self):
        with pytest.raises(ContractError):
            attractor(cantor_thirds(), tol=0.0)


class TestChaosGame:
    def test_single_map_contracts_to_fixed_point(self):
        sys = IfsSystem((affine_1d(0.5, 0.5),))
        out = chaos_game(sys, n_points=50, burn_in=40, rng_seed=7)
        assert np.abs(out.points - 1.0).max() <= 0.5 ** 40

    def test_determinism(self):
        a = chaos_game(cantor_thirds(), 1000, burn_in=10, rng_seed=42)
        b = chaos_game(cantor_thirds(), 1000, burn_in=10, rng_seed=42)
        assert np.array_equal(a.points, b.points)
        c = chaos_game(cantor_thirds(), 1000, burn_in=10, rng_seed=43)
        assert not np.array_equal(a.points, c.points)

    def test_orbit_lands_on_deterministic_attractor(self):
        # orbit starts on the attractor, so one-sided distance is tiny
        orbit = chaos_game(cantor_thirds(), 20_000, burn_in=20, rng_seed=1)
        det = np.sort(attractor(
            cantor_thirds(), seed=pts([0.0], [1.0]), tol=(1 / 3) ** 13
        ).points[:, 0])
        vals = orbit.points[:, 0]
        idx = np.clip(np.searchsorted(det, vals), 1, len(det) - 1)
        d = np.minimum(np.abs(vals - det[idx - 1]), np.abs(vals - det[idx]))
        assert d.max() <= 1e-6

    def test_invalid_counts(self):
        with pytest.raises(StructuralError):
            chaos_game(cantor_thirds(), 0)


class TestProductIfs:
    def test_single_factor_same_system(self):
        sys = cantor_thirds()
        p = make_product_ifs([sys])
        flat = p.as_flat_system()
        assert flat.map_count == sys.map_count
        for a, b in zip(flat.maps, sys.maps):
            assert np.array_equal(a.linear, b.linear)
            assert np.array_equal(a.offset, b.offset)

    def test_third_by_half_contraction(self):
        # four product maps, each with factor max(1/3, 1/2) = 1/2
        f = cantor_thirds()
        g = binary_halves()
        p = make_product_ifs([f, g])
        flat = p.as_flat_system()
        assert flat.map_count == 4
        assert all(w.lipschitz == 0.5 for w in flat.maps)

    def test_two_by_three_enumeration(self):
        p = interval_times_sparse()
        tuples = p.index_tuples()
        assert tuples == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]
        # spot-check one tuple map: (2, 3) acts as (x/2 + 1/2, y/6 + 5/6)
        w = p.tuple_map((2, 3))
        out = w.apply(np.array([1.0, 1.0]))
        assert out == pytest.approx([1.0, 1.0])

    def test_empty_product_rejected(self):
        with pytest.raises(StructuralError):
            make_product_ifs([])

    def test_hutchinson_factorization_exact(self, rng):
        p = interval_times_sparse()
        flat = p.as_flat_system()
        for _ in range(100):
            b1 = PointCloud(rng.random((int(rng.integers(1, 5)), 1)))
            b2 = PointCloud(rng.random((int(rng.integers(1, 5)), 1)))
            emb = embed(ProductSet((b1, b2)))
            lhs = hutchinson(flat, emb)
            rhs = embed(ProductSet((
                hutchinson(p.factor_systems[0], b1),
                hutchinson(p.factor_systems[1], b2),
            )))
            assert points_equal_as_sets(lhs.points, rhs.points)


class TestProductAttractor:
    def test_single_factor_matches_attractor(self):
        p = make_product_ifs([cantor_thirds()])
        tol = 1e-5
        direct = product_attractor_direct(p, tol=tol)
        plain = attractor(cantor_thirds(), tol=tol)
        assert hausdorff_distance(direct, plain) <= 2 * tol

    def test_cantor_square_matches_embedded_product(self):
        rep = verify_product_attractor(cantor_square(), tol=3.0 ** -6)
        assert rep.ok
        assert rep.distance <= rep.bound

    def test_interval_times_sparse_matches(self):
        tol = 6.0 ** -3
        rep = verify_product_attractor(interval_times_sparse(), tol=tol, snap=tol / 4)
        assert rep.ok

    def test_fault_injection_detected(self):
        # perturbing one direct-path map by 1e-2 must break the bound
        from fractalkit.verify import product_attractor_check

        rep = product_attractor_check(
            cantor_square(), tol=3.0 ** -6, name="fault", fault_offset=1e-2
        )
        assert rep.status == "fail"
