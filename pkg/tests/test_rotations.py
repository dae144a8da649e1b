import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adjquat.errors import AxisNotUnit, NotUnit
from adjquat.extract import SECTOR_PATTERNS, sample_sector_quaternion
from adjquat.rotations import (
    axis_angle_from_quat,
    canonical_sign,
    quat_from_axis_angle,
    quat_mul,
    quat2_from_angle,
    rot2_from_angle,
    rot2_from_cs,
    rot2_from_quat2,
    rot3_from_axis_angle,
    rot3_from_quat,
    shepperd_extract,
)
from tests.conftest import random_quats, sign_dist

S2 = 1 / np.sqrt(2)
unit_quats = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
    lambda v: np.linalg.norm(v) > 1e-3
).map(lambda v: np.array(v) / np.linalg.norm(v))


class TestRot3FromQuat:
    def test_identity(self):
        np.testing.assert_array_equal(rot3_from_quat([1.0, 0, 0, 0]), np.eye(3))

    def test_half_turn_x(self):
        np.testing.assert_array_equal(rot3_from_quat([0.0, 1, 0, 0]), np.diag([1.0, -1, -1]))

    def test_quarter_turn_z(self):
        np.testing.assert_allclose(rot3_from_quat([S2, 0, 0, S2]),
                                   [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)

    def test_not_unit(self):
        with pytest.raises(NotUnit):
            rot3_from_quat([1.0, 1, 0, 0])

    @settings(max_examples=200, deadline=None)
    @given(unit_quats)
    def test_double_cover_exact(self, q):
        np.testing.assert_array_equal(rot3_from_quat(q), rot3_from_quat(-q))

    @settings(max_examples=200, deadline=None)
    @given(unit_quats)
    def test_orthonormal(self, q):
        r = rot3_from_quat(q)
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_homomorphism(self, rng):
        a = random_quats(rng, 1000)
        b = random_quats(rng, 1000)
        lhs = rot3_from_quat(quat_mul(a, b))
        np.testing.assert_allclose(lhs, rot3_from_quat(a) @ rot3_from_quat(b), atol=1e-12)


class TestAxisAngle:
    def test_zero_angle(self, rng):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        np.testing.assert_allclose(rot3_from_axis_angle(0.0, n), np.eye(3), atol=0)

    def test_half_turn_z(self):
        np.testing.assert_allclose(rot3_from_axis_angle(np.pi, [0, 0, 1.0]),
                                   np.diag([-1.0, -1, 1]), atol=1e-15)

    def test_cyclic_permutation(self):
        # frozen from a 30-digit evaluation of the axis-angle formula
        r = rot3_from_axis_angle(2 * np.pi / 3, np.ones(3) / np.sqrt(3))
        np.testing.assert_allclose(r, [[0, 0, 1], [1, 0, 0], [0, 1, 0]], atol=1e-15)

    @pytest.mark.parametrize("theta,axis,expected", [
        (0.0, [0, 0, 1.0], [1, 0, 0, 0]),
        (np.pi, [1.0, 0, 0], [0, 1, 0, 0]),
        (2 * np.pi, [0, 0, 1.0], [-1, 0, 0, 0]),
    ])
    def test_quat_from_axis_angle(self, theta, axis, expected):
        np.testing.assert_allclose(quat_from_axis_angle(theta, axis), expected, atol=1e-15)

    def test_axis_not_unit(self):
        with pytest.raises(AxisNotUnit):
            quat_from_axis_angle(1.0, [1.0, 1.0, 0])
        with pytest.raises(AxisNotUnit):
            rot3_from_axis_angle(1.0, [0.0, 0.0, 2.0])

    def test_consistency_grid(self, rng):
        thetas = np.array([0, np.pi - 1e-8, np.pi, np.pi + 1e-8, 2 * np.pi, 0.3, 3 * np.pi, 4 * np.pi - 1e-3])
        axes = rng.normal(size=(20, 3))
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        for th in thetas:
            for n in axes:
                np.testing.assert_allclose(rot3_from_quat(quat_from_axis_angle(th, n)),
                                           rot3_from_axis_angle(th, n), atol=1e-12)

    def test_axis_angle_roundtrip(self, rng):
        q = random_quats(rng, 200)
        th, n = axis_angle_from_quat(q)
        assert np.all((th >= 0) & (th < 4 * np.pi))
        np.testing.assert_allclose(quat_from_axis_angle(th, n), q, atol=1e-12)


class TestRot2:
    def test_identity(self):
        np.testing.assert_array_equal(rot2_from_quat2([1.0, 0]), np.eye(2))

    def test_quarter_turn(self):
        np.testing.assert_allclose(rot2_from_quat2([S2, S2]), [[0, -1], [1, 0]], atol=1e-15)

    def test_half_turn(self):
        np.testing.assert_array_equal(rot2_from_quat2([0.0, 1]), -np.eye(2))

    def test_matches_angle_form(self, rng):
        for th in rng.uniform(0, 4 * np.pi, 50):
            p = quat2_from_angle(th)
            np.testing.assert_allclose(rot2_from_quat2(p), rot2_from_angle(th), atol=1e-14)
            c, s = p[0] ** 2 - p[1] ** 2, 2 * p[0] * p[1]
            np.testing.assert_allclose(rot2_from_quat2(p), rot2_from_cs(c, s), atol=0)
            assert np.linalg.det(rot2_from_quat2(p)) == pytest.approx(1.0, abs=1e-12)

    def test_not_unit(self):
        with pytest.raises(NotUnit):
            rot2_from_quat2([1.0, 1.0])


class TestCanonicalSign:
    def test_positive_scalar(self):
        np.testing.assert_array_equal(canonical_sign([-0.5, 0.5, 0.5, 0.5]), [0.5, -0.5, -0.5, -0.5])

    def test_tie_rule(self):
        np.testing.assert_array_equal(canonical_sign([1e-12, 0.0, -1.0, 0.0]), [-1e-12, 0.0, 1.0, -0.0])


class TestShepperd:
    def test_identity(self):
        np.testing.assert_array_equal(shepperd_extract(np.eye(3)), [1.0, 0, 0, 0])

    def test_negative_trace_branch(self):
        np.testing.assert_allclose(shepperd_extract(np.diag([1.0, -1, -1])), [0, 1, 0, 0], atol=0)

    @pytest.mark.parametrize("diag,expected", [
        ([-1.0, 1, -1], [0, 0, 1, 0]),
        ([-1.0, -1, 1], [0, 0, 0, 1]),
    ])
    def test_other_branches(self, diag, expected):
        np.testing.assert_allclose(shepperd_extract(np.diag(diag)), expected, atol=0)

    def test_roundtrip_random(self, rng):
        q = random_quats(rng, 10000)
        assert sign_dist(shepperd_extract(rot3_from_quat(q)), q).max() <= 1e-12

    @pytest.mark.parametrize("zeros", SECTOR_PATTERNS, ids=lambda z: "".join(map(str, sorted(z))))
    def test_roundtrip_sectors(self, rng, zeros):
        q = np.array([sample_sector_quaternion(rng, zeros) for _ in range(200)])
        assert sign_dist(shepperd_extract(rot3_from_quat(q)), q).max() <= 1e-12

    def test_canonical_output(self, rng):
        q = shepperd_extract(rot3_from_quat(random_quats(rng, 100)))
        assert np.all(q[:, 0] >= 0)
