"""Unit tests for steering vectors, angle maps, and coverage ranges."""

import math

import numpy as np
import pytest

from quadbeam.geometry import (
    ArrayGeometry,
    Direction,
    boresight,
    coverage_contains,
    steering_matrix,
    steering_vector,
    upa_for_direction,
    virtual_azimuth,
    virtual_elevation,
)

SQRT2 = math.sqrt(2.0)


def random_direction(rng):
    return Direction(rng.uniform(-math.pi, math.pi), rng.uniform(0.0, math.pi))


class TestSteeringVector:
    def test_single_element_is_one(self):
        geom = ArrayGeometry(1, 1)
        vec = steering_vector(geom, 1, Direction(0.7, 1.1))
        assert vec.shape == (1,)
        assert vec[0] == pytest.approx(1.0)

    def test_two_element_hand_values(self):
        # n_y = -1/2, +1/2 toward (pi/2, pi/2): phases -pi/2, +pi/2
        geom = ArrayGeometry(2, 1)
        vec = steering_vector(geom, 1, Direction(math.pi / 2, math.pi / 2))
        expected = np.array([-1j, 1j]) / SQRT2
        np.testing.assert_allclose(vec, expected, atol=1e-12)

    def test_boresight_is_flat(self):
        geom = ArrayGeometry(8, 8)
        vec = steering_vector(geom, 2, boresight(2))
        np.testing.assert_allclose(vec, np.full(64, 1.0 / 8.0), atol=1e-12)

    def test_invalid_upa_raises(self):
        with pytest.raises(ValueError):
            steering_vector(ArrayGeometry(2, 2), 5, Direction(0.0, 1.0))

    def test_unit_norm(self):
        geom = ArrayGeometry(5, 3)
        rng = np.random.default_rng(7)
        for _ in range(50):
            vec = steering_vector(geom, int(rng.integers(1, 5)), random_direction(rng))
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-12

    def test_rotation_identity(self):
        geom = ArrayGeometry(4, 6)
        rng = np.random.default_rng(11)
        for upa in (2, 3, 4):
            d = random_direction(rng)
            rotated = Direction(d.azimuth - (upa - 1) * math.pi / 2, d.elevation)
            np.testing.assert_allclose(
                steering_vector(geom, upa, d), steering_vector(geom, 1, rotated), atol=1e-12
            )

    def test_inner_products_bounded(self):
        geom = ArrayGeometry(6, 6)
        rng = np.random.default_rng(3)
        for _ in range(30):
            a = steering_vector(geom, 1, random_direction(rng))
            b = steering_vector(geom, 1, random_direction(rng))
            assert abs(np.vdot(a, a)) == pytest.approx(1.0, abs=1e-12)
            assert abs(np.vdot(a, b)) <= 1.0 + 1e-12

    def test_element_ordering_is_z_major(self):
        # with u = 0 the phase depends on n_z only; rows of constant n_z are contiguous
        geom = ArrayGeometry(3, 2)
        cols = steering_matrix(geom, 0.0, 0.5)
        vec = cols[:, 0] * math.sqrt(geom.n_elements)
        np.testing.assert_allclose(vec[:3], vec[0], atol=1e-12)
        np.testing.assert_allclose(vec[3:], vec[3], atol=1e-12)
        assert abs(vec[0] - vec[3]) > 0.1


class TestAngleMaps:
    @pytest.mark.parametrize(
        "theta,expected",
        [(math.pi / 2, 0.0), (math.pi / 4, -SQRT2 / 2), (3 * math.pi / 4, SQRT2 / 2)],
    )
    def test_virtual_elevation_values(self, theta, expected):
        assert virtual_elevation(theta) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize(
        "upa,phi,expected",
        [(1, 0.0, 0.0), (3, math.pi, 2 * SQRT2), (1, math.pi / 4, SQRT2 / 2)],
    )
    def test_virtual_azimuth_values(self, upa, phi, expected):
        assert virtual_azimuth(upa, phi) == pytest.approx(expected, abs=1e-12)

    def test_virtual_elevation_monotone(self):
        theta = np.linspace(0.0, math.pi, 1000)
        vals = [virtual_elevation(t) for t in theta]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_virtual_azimuth_monotone_on_coverage(self):
        for upa in (1, 2, 3, 4):
            center = (upa - 1) * math.pi / 2
            phi = np.linspace(center - math.pi / 4, center + math.pi / 4, 1000)
            vals = [virtual_azimuth(upa, p) for p in phi]
            assert all(b > a for a, b in zip(vals, vals[1:]))
            assert vals[0] == pytest.approx(-SQRT2 / 2 + SQRT2 * (upa - 1), abs=1e-12)
            assert vals[-1] == pytest.approx(SQRT2 / 2 + SQRT2 * (upa - 1), abs=1e-12)


class TestCoverage:
    def test_examples(self):
        assert coverage_contains(1, Direction(0.0, math.pi / 2))
        assert not coverage_contains(1, Direction(math.pi / 2, math.pi / 2))
        assert coverage_contains(4, Direction(3 * math.pi / 2, math.pi / 4))

    def test_boundaries_closed(self):
        assert coverage_contains(1, Direction(math.pi / 4, math.pi / 2))
        assert coverage_contains(2, Direction(math.pi / 4, math.pi / 2))
        assert coverage_contains(1, Direction(0.0, math.pi / 4))
        assert coverage_contains(1, Direction(0.0, 3 * math.pi / 4))

    def test_upa_for_direction_examples(self):
        assert upa_for_direction(Direction(0.1, 1.6)) == 1
        assert upa_for_direction(Direction(math.pi, math.pi / 2)) == 3
        assert upa_for_direction(Direction(0.0, 0.1)) is None

    def test_boundary_ties_to_lower_index(self):
        assert upa_for_direction(Direction(math.pi / 4, math.pi / 2)) == 1
        assert upa_for_direction(Direction(3 * math.pi / 4, math.pi / 2)) == 2

    def test_partition_of_azimuth_circle(self):
        # off the boundaries every served direction belongs to exactly one UPA
        rng = np.random.default_rng(5)
        for _ in range(500):
            az = rng.uniform(-math.pi, math.pi)
            el = rng.uniform(math.pi / 4 + 1e-6, 3 * math.pi / 4 - 1e-6)
            d = Direction(az, el)
            hits = [u for u in (1, 2, 3, 4) if coverage_contains(u, d)]
            if len(hits) != 1:  # boundary draws are measure zero but guard anyway
                assert min(abs((az - b) % (math.pi / 2)) for b in (math.pi / 4,)) < 1e-9
            assert upa_for_direction(d) == hits[0]

    def test_direction_normalizes_azimuth(self):
        d = Direction(3 * math.pi, 1.0)
        assert -math.pi < d.azimuth <= math.pi
        assert d.azimuth == pytest.approx(math.pi)
        with pytest.raises(ValueError):
            Direction(0.0, -0.1)
