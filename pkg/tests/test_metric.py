"""Point-cloud metrics: Hausdorff distance, product metrics, embeddings.

Oracle notes: expected values are computed by brute-force max-min over all
pairs (the defining formula), or by hand for the tiny cases.
"""

import math

import numpy as np
import pytest

from fractalkit.cloud import (
    PointCloud,
    ProductPoint,
    ProductSet,
    _directed_sq_brute,
    _directed_sq_grid_2d,
    check_equivalence_bounds,
    embed,
    hausdorff_distance,
    merge_clouds,
    product_hausdorff,
    product_metric,
    snap_points,
    union_hausdorff_check,
    unique_points,
)
from fractalkit.errors import CapacityError, StructuralError


def cloud(*pts):
    return PointCloud(np.array(pts, dtype=float))


def brute_hausdorff(a, b):
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


class TestProductMetric:
    def test_three_four_five(self):
        x = ProductPoint((np.array([0.0]), np.array([0.0])))
        y = ProductPoint((np.array([3.0]), np.array([4.0])))
        assert product_metric(x, y) == 5.0

    def test_identity(self):
        x = ProductPoint((np.array([1.0, 2.0]), np.array([3.0])))
        assert product_metric(x, x) == 0.0

    def test_hand_evaluated_mixed_dims(self):
        x = ProductPoint((np.array([0.0, 0.0]), np.array([1.0])))
        y = ProductPoint((np.array([1.0, 0.0]), np.array([3.0])))
        assert product_metric(x, y) == pytest.approx(math.sqrt(5.0), abs=1e-15)

    def test_structure_mismatch(self):
        x = ProductPoint((np.array([0.0]),))
        y = ProductPoint((np.array([0.0]), np.array([0.0])))
        with pytest.raises(StructuralError):
            product_metric(x, y)

    def test_symmetry_and_triangle_randomized(self, rng):
        for _ in range(200):
            pts = [
                ProductPoint((rng.random(2), rng.random(3)))
                for _ in range(3)
            ]
            x, y, z = pts
            assert product_metric(x, y) == product_metric(y, x)
            assert product_metric(x, z) <= (
                product_metric(x, y) + product_metric(y, z) + 1e-12
            )


class TestHausdorff:
    def test_singletons(self):
        assert hausdorff_distance(cloud([0.0]), cloud([1.0])) == 1.0

    def test_identity(self):
        a = cloud([0.0], [0.7], [1.0])
        assert hausdorff_distance(a, a) == 0.0

    def test_asymmetric_sets(self):
        # brute force: sup over {0,1} of dist to {0} is 1; other direction 0
        assert hausdorff_distance(cloud([0.0], [1.0]), cloud([0.0])) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            hausdorff_distance(cloud([0.0]), cloud([0.0, 1.0]))

    def test_matches_brute_force_randomized(self, rng):
        for _ in range(50):
            a = rng.random((int(rng.integers(1, 30)), 2))
            b = rng.random((int(rng.integers(1, 30)), 2))
            got = hausdorff_distance(PointCloud(a), PointCloud(b))
            assert got == brute_hausdorff(a, b)

    def test_metric_axioms_randomized(self, rng):
        clouds = [PointCloud(rng.random((8, 2))) for _ in range(12)]
        for a in clouds[:4]:
            for b in clouds[4:8]:
                assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
                for c in clouds[8:]:
                    assert hausdorff_distance(a, c) <= (
                        hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12
                    )

    def test_grid_accelerator_bit_identical_1000_points(self, rng):
        # regression contract for the bucketed path: identical output to the
        # brute-force formula on a 1e3-point suite
        for trial in range(6):
            a = rng.random((1000, 2))
            b = rng.random((1000, 2)) * (10.0 ** (trial - 2))
            brute = _directed_sq_brute(a, b)
            grid = _directed_sq_grid_2d(a, b)
            assert grid == brute

    def test_grid_accelerator_on_clustered_data(self, rng):
        centers = rng.random((5, 2)) * 10
        a = np.vstack([c + 0.01 * rng.standard_normal((200, 2)) for c in centers])
        b = np.vstack([c + 0.01 * rng.standard_normal((150, 2)) for c in centers[:3]])
        assert _directed_sq_grid_2d(a, b) == _directed_sq_brute(a, b)
        assert _directed_sq_grid_2d(b, a) == _directed_sq_brute(b, a)


class TestProductHausdorff:
    def test_identity(self):
        a = ProductSet((cloud([0.0], [1.0]), cloud([0.5])))
        assert product_hausdorff(a, a) == 0.0

    def test_unit_grid_vs_origin(self):
        # per-factor h([0,1]-grid, {0}) = 1, so the product metric is sqrt(2)
        grid = cloud(*[[x] for x in np.linspace(0, 1, 11)])
        origin = cloud([0.0])
        a = ProductSet((grid, grid))
        b = ProductSet((origin, origin))
        assert product_hausdorff(a, b) == pytest.approx(math.sqrt(2.0), abs=1e-15)

    def test_single_factor_collapses_bitwise(self, rng):
        for _ in range(20):
            x = PointCloud(rng.random((7, 2)))
            y = PointCloud(rng.random((9, 2)))
            assert product_hausdorff(ProductSet((x,)), ProductSet((y,))) == \
                hausdorff_distance(x, y)

    def test_factor_mismatch(self):
        a = ProductSet((cloud([0.0]),))
        b = ProductSet((cloud([0.0]), cloud([0.0])))
        with pytest.raises(StructuralError):
            product_hausdorff(a, b)


class TestEmbed:
    def test_two_by_two(self):
        ps = ProductSet((cloud([0.0], [1.0]), cloud([0.0], [1.0])))
        out = embed(ps)
        expect = {(0, 0), (0, 1), (1, 0), (1, 1)}
        assert {tuple(p) for p in out.points} == expect

    def test_single_factor_is_identity(self):
        c = cloud([0.3], [0.7])
        out = embed(ProductSet((c,)))
        assert np.array_equal(out.points, c.points)

    def test_sizes_multiply(self):
        ps = ProductSet((cloud([0.0]), cloud([0.0], [1.0], [2.0])))
        assert len(embed(ps)) == 3

    def test_resolution_combines(self):
        a = PointCloud(np.zeros((1, 1)), resolution=3.0 * 1e-3)
        b = PointCloud(np.zeros((1, 1)), resolution=4.0 * 1e-3)
        assert embed(ProductSet((a, b))).resolution == pytest.approx(5e-3)

    def test_capacity_cap(self):
        big = PointCloud(np.arange(2000, dtype=float)[:, None])
        with pytest.raises(CapacityError):
            embed(ProductSet((big, big)), cap=10_000)


class TestEquivalenceBounds:
    def test_identical_sets(self):
        a = ProductSet((cloud([0.0], [1.0]), cloud([0.5])))
        rep = check_equivalence_bounds(a, a)
        assert rep.factorwise == 0.0 and rep.embedded == 0.0 and rep.ok

    def test_unit_square_vs_origin(self):
        grid = cloud(*[[x] for x in np.linspace(0, 1, 7)])
        a = ProductSet((grid, grid))
        b = ProductSet((cloud([0.0]), cloud([0.0])))
        rep = check_equivalence_bounds(a, b)
        assert rep.factorwise == pytest.approx(math.sqrt(2.0), abs=1e-15)
        assert rep.embedded == pytest.approx(math.sqrt(2.0), abs=1e-15)
        assert rep.ok

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_randomized_sandwich(self, rng, m):
        for _ in range(60):
            a = ProductSet(tuple(
                PointCloud(rng.random((int(rng.integers(1, 8)), 1))) for _ in range(m)
            ))
            b = ProductSet(tuple(
                PointCloud(rng.random((int(rng.integers(1, 8)), 1))) for _ in range(m)
            ))
            rep = check_equivalence_bounds(a, b)
            assert rep.ok, (rep.factorwise, rep.embedded, m)


class TestUnionBound:
    def test_single_pair_is_equality(self, rng):
        c = PointCloud(rng.random((5, 2)))
        d = PointCloud(rng.random((6, 2)))
        rep = union_hausdorff_check([c], [d])
        assert rep.lhs == rep.rhs and rep.ok

    def test_hand_case(self):
        rep = union_hausdorff_check(
            [cloud([0.0]), cloud([2.0])], [cloud([1.0]), cloud([2.0])]
        )
        assert rep.rhs == 1.0 and rep.lhs <= 1.0 and rep.ok

    def test_identical_collections(self, rng):
        cs = [PointCloud(rng.random((4, 1))) for _ in range(3)]
        rep = union_hausdorff_check(cs, cs)
        assert rep.lhs == 0.0 and rep.ok

    def test_randomized(self, rng):
        for _ in range(100):
            k = int(rng.integers(1, 5))
            cs = [PointCloud(rng.random((int(rng.integers(1, 9)), 2))) for _ in range(k)]
            ds = [PointCloud(rng.random((int(rng.integers(1, 9)), 2))) for _ in range(k)]
            assert union_hausdorff_check(cs, ds).ok

    def test_length_mismatch(self):
        with pytest.raises(StructuralError):
            union_hausdorff_check([cloud([0.0])], [cloud([0.0]), cloud([1.0])])


class TestCloudValidation:
    def test_empty_rejected(self):
        with pytest.raises(StructuralError):
            PointCloud(np.empty((0, 2)))

    def test_nan_rejected(self):
        with pytest.raises(StructuralError):
            PointCloud(np.array([[np.nan]]))

    def test_negative_resolution_rejected(self):
        with pytest.raises(StructuralError):
            PointCloud(np.array([[0.0]]), resolution=-1.0)

    def test_points_immutable(self):
        c = cloud([0.0], [1.0])
        with pytest.raises(ValueError):
            c.points[0] = 5.0


class TestSnapAndUnique:
    def test_unique_points_dedups(self):
        pts = np.array([[0.0, 1.0], [0.0, 1.0], [2.0, 3.0]])
        assert unique_points(pts).shape == (2, 2)

    def test_unique_points_handles_negative_zero(self):
        pts = np.array([[-0.0], [0.0]])
        assert unique_points(pts).shape == (1, 1)

    def test_snap_moves_at_most_half_diagonal(self, rng):
        pts = rng.standard_normal((500, 3)) * 5
        w = 0.05
        snapped = snap_points(pts, w)
        d = np.sqrt(((pts[:, None, :] - snapped[None, :, :]) ** 2).sum(-1)).min(axis=1)
        assert d.max() <= w * math.sqrt(3) / 2 + 1e-12

    def test_snap_idempotent_on_grid(self, rng):
        pts = rng.integers(-10, 10, size=(100, 2)).astype(float) * 0.25
        out = snap_points(pts, 0.25)
        again = snap_points(out, 0.25)
        assert np.array_equal(np.sort(out, axis=0), np.sort(again, axis=0))

    def test_merge_clouds_resolution(self):
        a = PointCloud(np.zeros((1, 1)), resolution=0.5)
        b = PointCloud(np.ones((1, 1)), resolution=0.1)
        assert merge_clouds([a, b]).resolution == 0.5
