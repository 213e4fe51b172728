"""
Tests for the Mobius Hessian, the Jacobi eigensolver and boundary data.
"""

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from halfspace_liouville.exceptions import DomainError, InputError, ParameterError
from halfspace_liouville.fields import FieldSpec, jet, make_field
from halfspace_liouville.hessian import (
    boundary_values,
    conformal_hessian,
    eigen_residual,
    eigenvalues,
    hessian_eigenvalues,
    jacobi_eigh,
    one_var_spectrum,
    radial_eigenvalues,
    ricci_transform,
    w_tensor,
)


def bubble(a=1.0, b=1.0, xbar=(0.0, 0.0, 0.0)):
    return make_field(FieldSpec("bubble", len(xbar), {"a": a, "b": b, "xbar": list(xbar)}))


symmetric_matrices = st.integers(min_value=2, max_value=6).flatmap(
    lambda n: st.lists(
        st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False),
        min_size=n * n,
        max_size=n * n,
    ).map(lambda xs: (lambda m: 0.5 * (m + m.T))(np.array(xs).reshape(n, n)))
)


class TestJacobi(unittest.TestCase):

    @settings(max_examples=60, deadline=None)
    @given(symmetric_matrices)
    def test_matches_lapack(self, m):
        ours = eigenvalues(m)
        ref = np.sort(np.linalg.eigvalsh(m))[::-1]
        scale = max(1.0, float(np.max(np.abs(m))))
        np.testing.assert_allclose(ours, ref, atol=1e-10 * scale)

    @settings(max_examples=30, deadline=None)
    @given(symmetric_matrices)
    def test_eigen_residual_small(self, m):
        self.assertLessEqual(eigen_residual(m), 1e-10)

    def test_sorted_descending(self):
        vals = eigenvalues(np.diag([1.0, 3.0, -2.0]))
        np.testing.assert_array_equal(vals, [3.0, 1.0, -2.0])

    def test_zero_matrix(self):
        vals, vecs = jacobi_eigh(np.zeros((3, 3)))
        np.testing.assert_array_equal(vals, np.zeros(3))
        np.testing.assert_array_equal(vecs, np.eye(3))

    def test_rejects_asymmetric(self):
        with self.assertRaises(InputError):
            eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with self.assertRaises(InputError):
            eigenvalues(np.ones((2, 3)))


class TestConformalHessian(unittest.TestCase):

    def test_bubble_spectrum_is_constant(self):
        """A[v] = 2 a^-2 b I for every bubble at every point."""
        for a, b, xbar in ((1.0, 1.0, (0.0, 0.0, 0.0)), (2.0, 0.3, (1.0, -1.0, 0.5)),
                           (0.5, 4.0, (0.0, 0.0, 0.0, 2.0))):
            v = bubble(a, b, xbar)
            for x in np.random.default_rng(1).normal(size=(5, len(xbar))):
                with self.subTest(a=a, b=b, x=x.tolist()):
                    matrix = conformal_hessian(jet(v, x))
                    scale = 2.0 * b / a**2
                    np.testing.assert_allclose(matrix, scale * np.eye(len(xbar)), atol=1e-10 * scale)

    def test_w_tensor_scaling(self):
        v = bubble(2.0, 0.3, (1.0, -1.0, 0.5))
        j = jet(v, [0.2, 0.1, 0.7])
        np.testing.assert_allclose(w_tensor(j), math.exp(2.0 * j.value) * conformal_hessian(j), rtol=1e-12)

    def test_log_power_direction(self):
        """A[alpha log|x|] is a multiple of (1, -1, ..., -1)."""
        alpha, n = 0.5, 4
        v = make_field(FieldSpec("log_power", n, {"alpha": alpha}))
        x = np.array([0.4, -1.0, 0.3, 0.8])
        r = float(np.linalg.norm(x))
        factor = alpha * (alpha + 2.0) / (2.0 * r ** (2 * alpha + 2))
        expected = factor * np.array([1, -1, -1, -1])
        np.testing.assert_allclose(hessian_eigenvalues(jet(v, x)), expected, rtol=1e-10)

    def test_radial_formula(self):
        alpha, n = -0.6, 3
        v = make_field(FieldSpec("log_power", n, {"alpha": alpha}))
        x = np.array([0.5, 0.5, 1.0])
        r = float(np.linalg.norm(x))
        expected = radial_eigenvalues(r, alpha * math.log(r), alpha / r, -alpha / r**2, n)
        np.testing.assert_allclose(hessian_eigenvalues(jet(v, x)), expected, rtol=1e-10)
        with self.assertRaises(DomainError):
            radial_eigenvalues(0.0, 0.0, 0.0, 0.0, n)

    def test_one_variable_formula(self):
        v = make_field(FieldSpec("one_var_min_f", 3, {"mu": 3.0, "c": 1.0}))
        j = jet(v, [0.3, -0.2, 0.7])
        expected = one_var_spectrum(3, j.value, j.gradient[-1], j.hessian[-1, -1])
        np.testing.assert_allclose(hessian_eigenvalues(j), expected, rtol=1e-12, atol=1e-14)

    def test_finite_difference_spectrum(self):
        v = bubble(1.0, 1.0, (0.0, 0.0, 1.0))
        fd = hessian_eigenvalues(jet(v, [0.5, 0.5, 0.5], "finite_difference"))
        np.testing.assert_allclose(fd, np.full(3, 2.0), atol=1e-5)


class TestBoundaryValues(unittest.TestCase):

    def test_bubble_neumann_datum(self):
        """e^{-v} dv/dx_n = 2 b xbar_n / a on the whole boundary."""
        a, b, xn = 2.0, 0.5, 1.5
        v = bubble(a, b, (0.3, 0.0, xn))
        for x in ([0.0, 0.0, 0.0], [1.0, -2.0, 0.0]):
            j = jet(v, x)
            self.assertAlmostEqual(boundary_values(j, "neumann"), 2.0 * b * xn / a, places=12)
            self.assertAlmostEqual(boundary_values(j, "geometric"), -2.0 * b * xn / a, places=12)

    def test_off_boundary(self):
        with self.assertRaises(DomainError):
            boundary_values(jet(bubble(), [0.0, 0.0, 1.0]), "neumann")

    def test_unknown_convention(self):
        with self.assertRaises(ParameterError):
            boundary_values(jet(bubble(), [0.0, 0.0, 0.0]), "outward")


class TestRicci(unittest.TestCase):

    def test_known_value(self):
        np.testing.assert_allclose(ricci_transform([1.0, 1.0, 1.0], "schouten_to_ricci"), [4.0, 4.0, 4.0])
        np.testing.assert_allclose(ricci_transform([4.0, 4.0, 4.0], "ricci_to_schouten"), [1.0, 1.0, 1.0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=3, max_size=7))
    def test_inverse(self, lams):
        back = ricci_transform(ricci_transform(lams, "schouten_to_ricci"), "ricci_to_schouten")
        np.testing.assert_allclose(back, np.sort(lams)[::-1], atol=1e-10)

    def test_lambda_star_image(self):
        for n in range(3, 7):
            with self.subTest(n=n):
                out = ricci_transform([1.0] + [-1.0] * (n - 1), "schouten_to_ricci")
                expected = 2.0 * (n - 2) * np.array([0.0] + [-1.0] * (n - 1))
                np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_normalized_bubble_has_unit_ricci(self):
        """4(n - 1) b a^-2 = 1 gives Ricci eigenvalues all 1."""
        n, a = 4, 2.0
        v = bubble(a, a * a / (4.0 * (n - 1)), (0.5, -1.0, 0.0, 2.0))
        for x in ([0.0, 0.0, 0.0, 0.0], [1.0, 2.0, -1.0, 0.5]):
            lams = hessian_eigenvalues(jet(v, x))
            np.testing.assert_allclose(ricci_transform(lams, "schouten_to_ricci"), np.ones(n), atol=1e-10)

    def test_dimension_two(self):
        with self.assertRaises(DomainError):
            ricci_transform([1.0, 2.0], "schouten_to_ricci")

    def test_unknown_direction(self):
        with self.assertRaises(ParameterError):
            ricci_transform([1.0, 2.0, 3.0], "sideways")


if __name__ == "__main__":
    unittest.main()
