import numpy as np
import pytest

from adjquat.errors import DegenerateData, ShapeMismatch
from adjquat.extract import extract_quat2_noisy
from adjquat.linalg import eigenvalues_sym4, max_eigenvalue_sym4
from adjquat.match import (
    cross_covariance,
    exact_data_eigenvalue,
    match2d,
    match3d,
    match_loss,
    profile_matrix_3d,
)
from adjquat.rotations import quat2_from_angle, rot2_from_angle, rot3_from_quat, shepperd_extract
from tests.conftest import random_quats, sign_dist


def cloud(rng, d, k=50):
    return rng.uniform(-1, 1, (d, k))


class TestCrossCovariance:
    def test_single_point(self):
        x = np.array([[1.0], [0], [0]])
        expected = np.zeros((3, 3))
        expected[0, 0] = 1
        np.testing.assert_array_equal(cross_covariance(x, x), expected)

    def test_two_points(self):
        x = np.array([[1.0, 0], [0, 1], [0, 0]])
        np.testing.assert_array_equal(cross_covariance(x, x), np.diag([1.0, 1, 0]))

    def test_orthonormal_frame(self, rng):
        r = rot3_from_quat(random_quats(rng, 1)[0])
        np.testing.assert_allclose(cross_covariance(np.eye(3), r @ np.eye(3)), r.T, atol=1e-15)

    @pytest.mark.parametrize("dx,du", [(2, 2), (3, 3), (3, 2), (2, 1)])
    def test_shapes(self, rng, dx, du):
        assert cross_covariance(cloud(rng, dx), cloud(rng, du)).shape == (dx, du)

    def test_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            cross_covariance(cloud(rng, 3, 5), cloud(rng, 3, 6))
        with pytest.raises(ShapeMismatch):
            cross_covariance(cloud(rng, 2), cloud(rng, 3))


class TestMatch2D:
    def test_identity(self, rng):
        x = cloud(rng, 2)
        res = match2d(x, x)
        np.testing.assert_allclose(res.adjugate, [[1, 0], [0, 0]], atol=1e-15)
        np.testing.assert_allclose(res.r_opt, np.eye(2), atol=1e-15)

    def test_quarter_turn(self, rng):
        x = cloud(rng, 2)
        res = match2d(x, rot2_from_angle(np.pi / 2) @ x)
        np.testing.assert_allclose(res.r_opt, [[0, -1], [1, 0]], atol=1e-15)
        assert res.loss <= 1e-28

    def test_constraints_and_halfangle(self, rng):
        for th in rng.uniform(0, 2 * np.pi, 50):
            x = cloud(rng, 2)
            res = match2d(x, rot2_from_angle(th) @ x)
            a, b, g = res.adjugate[0, 0], res.adjugate[1, 1], res.adjugate[0, 1]
            assert a + b == pytest.approx(1.0, abs=1e-10)
            assert abs(a * b - g * g) <= 1e-10
            assert sign_dist(res.q_opt, quat2_from_angle(th)) <= 1e-10

    def test_noisy_optimality(self, rng):
        for th in rng.uniform(0, 2 * np.pi, 100):
            x = cloud(rng, 2)
            r = rot2_from_angle(th)
            u = r @ x + 0.1 * rng.standard_normal(x.shape)
            assert match2d(x, u).loss <= match_loss(r, x, u) + 1e-12

    def test_agrees_with_profile_route(self, rng):
        for _ in range(50):
            x, u = cloud(rng, 2), cloud(rng, 2)
            res = match2d(x, u)
            adj, _, _ = extract_quat2_noisy(cross_covariance(x, u).T)
            np.testing.assert_allclose(res.adjugate, adj.matrix, atol=1e-10)

    def test_degenerate(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        u = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(DegenerateData):
            match2d(x, u)


class TestMatch3D:
    def test_profile_examples(self):
        np.testing.assert_array_equal(profile_matrix_3d(np.eye(3)), np.diag([3.0, -1, -1, -1]))
        np.testing.assert_array_equal(profile_matrix_3d(np.diag([1.0, 1, -1])), np.diag([1.0, 1, 1, -3]))
        np.testing.assert_array_equal(profile_matrix_3d(np.zeros((3, 3))), np.zeros((4, 4)))

    def test_profile_quadratic_form(self, rng):
        e = rng.normal(size=(3, 3))
        for q in random_quats(rng, 20):
            assert q @ profile_matrix_3d(e) @ q == pytest.approx(np.trace(rot3_from_quat(q) @ e))

    def test_identity(self, rng):
        x = cloud(rng, 3)
        res = match3d(x, x)
        np.testing.assert_allclose(res.q_opt, [1, 0, 0, 0], atol=1e-12)
        assert res.lambda_opt == pytest.approx(np.sum(x * x), rel=1e-12)

    def test_exact_roundtrip(self, rng):
        for q in random_quats(rng, 100):
            x = cloud(rng, 3)
            r = rot3_from_quat(q)
            res = match3d(x, r @ x)
            assert sign_dist(res.q_opt, q) <= 1e-10
            assert res.loss <= 1e-18 * np.sum(x * x)
            assert np.linalg.norm(res.r_opt - rot3_from_quat(shepperd_extract(r))) <= 1e-9

    def test_noisy_optimality(self, rng):
        for q in random_quats(rng, 100):
            x = cloud(rng, 3)
            r = rot3_from_quat(q)
            u = r @ x + 0.1 * rng.standard_normal(x.shape)
            res = match3d(x, u)
            assert res.loss <= match_loss(r, x, u) + 1e-12
            assert res.loss == pytest.approx(float(np.sum((res.r_opt @ x - u) ** 2)), rel=1e-12)

    def test_spectrum_rotation_invariant(self, rng):
        for q in random_quats(rng, 100):
            x = cloud(rng, 3)
            a = eigenvalues_sym4(profile_matrix_3d(cross_covariance(x, rot3_from_quat(q) @ x))).roots
            b = eigenvalues_sym4(profile_matrix_3d(cross_covariance(x, x))).roots
            np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9 * np.abs(b).max())

    def test_symmetric_data_degenerate(self):
        from adjquat.errors import DegenerateAdjugate
        # E = -I gives K0 = diag(-3, 1, 1, 1)
        x = np.eye(3)
        with pytest.raises(DegenerateAdjugate):
            match3d(x, -x)


class TestExactEigenvalue:
    def test_single_point(self):
        assert exact_data_eigenvalue([[1.0], [2.0], [2.0]]) == 9.0

    def test_zero_point(self):
        assert exact_data_eigenvalue(np.zeros((3, 1))) == 0.0

    def test_matches_eigen_solver(self, rng):
        for _ in range(100):
            x = cloud(rng, 3)
            lam = max_eigenvalue_sym4(profile_matrix_3d(cross_covariance(x, x)))
            assert lam == pytest.approx(exact_data_eigenvalue(x), rel=1e-10)
