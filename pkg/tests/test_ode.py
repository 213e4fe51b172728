"""
Tests for the one-variable equation: first integral, threshold,
classification, the Dormand-Prince integrator and the general operator path.
"""

import math
import unittest

import numpy as np

from halfspace_liouville.cones import make_cone, make_symfunc
from halfspace_liouville.exceptions import DomainError, InputError, IntegrationError, ParameterError
from halfspace_liouville.fields import FieldSpec, make_field
from halfspace_liouville.ode import (
    BLOWUP,
    GLOBAL,
    OdeParams,
    OdeState,
    convexity_check,
    dopri54,
    expected_classification,
    first_integral,
    integrate_general,
    integrate_model,
    invert_lambda1,
    threshold_v0_bound,
    threshold_w0,
    trajectory_from_field,
)

PARAMS = OdeParams(3.0, 6.0)


class TestClosedForms(unittest.TestCase):

    def test_params(self):
        self.assertEqual(PARAMS.theta, 1.0)
        self.assertEqual(PARAMS.q_exp, 2.0)
        with self.assertRaises(ParameterError):
            OdeParams(1.0, 6.0)

    def test_threshold(self):
        self.assertAlmostEqual(threshold_w0(3.0, 6.0, 0.0), 1.0, places=14)
        self.assertAlmostEqual(threshold_w0(3.0, 6.0, 1.0), math.exp(-2.0), places=14)
        for mu, p in ((3.0, 4.0), (3.0, 3.0), (1.0, 6.0)):
            with self.subTest(mu=mu, p=p):
                with self.assertRaises(DomainError):
                    threshold_w0(mu, p, 0.0)

    def test_threshold_zeroes_the_first_integral(self):
        for mu, p, v0 in ((3.0, 6.0, 0.0), (2.0, 5.0, 0.3), (4.0, 7.5, -0.2)):
            with self.subTest(mu=mu, p=p, v0=v0):
                w0 = threshold_w0(mu, p, v0)
                value = first_integral(OdeParams(mu, p), OdeState(0.0, math.exp(v0), w0))
                self.assertAlmostEqual(value, 0.0, places=12)

    def test_v0_bound(self):
        bound = threshold_v0_bound(3.0, 6.0, 1.0)
        # c e^{v0} equals the threshold at the bound
        self.assertAlmostEqual(math.exp(bound), threshold_w0(3.0, 6.0, bound), places=12)
        with self.assertRaises(DomainError):
            threshold_v0_bound(3.0, 6.0, -1.0)

    def test_first_integral_log_branch(self):
        # q = theta when p = mu + 1
        params = OdeParams(3.0, 4.0)
        self.assertAlmostEqual(first_integral(params, OdeState(0.0, math.e, 0.0)), 2.0)

    def test_first_integral_needs_positive_phi(self):
        with self.assertRaises(DomainError):
            first_integral(PARAMS, OdeState(0.0, 0.0, 1.0))

    def test_expected_classification(self):
        self.assertEqual(expected_classification(PARAMS, 0.0, 1.1), GLOBAL)
        self.assertEqual(expected_classification(PARAMS, 0.0, 0.9), BLOWUP)
        self.assertEqual(expected_classification(PARAMS, 0.0, -2.0), BLOWUP)


class TestDormandPrince(unittest.TestCase):

    def test_exponential(self):
        run = dopri54(lambda t, y: y, 0.0, [1.0], 1.0, lambda y: False)
        self.assertEqual(run.status, "completed")
        self.assertAlmostEqual(run.ts[-1], 1.0, places=12)
        self.assertAlmostEqual(run.ys[-1][0], math.e, delta=1e-8)

    def test_blowup_certificate(self):
        # y' = y^2 blows up at t = 1
        run = dopri54(lambda t, y: y * y, 0.0, [1.0], 2.0, lambda y: abs(y[0]) > 1e8)
        self.assertEqual(run.status, "blowup")
        self.assertLess(abs(run.ts[-1] - 1.0), 1e-6)
        self.assertLess(run.h_last, 1e-12 * max(1.0, run.ts[-1]))

    def test_thresholds_alone_do_not_stop_a_smooth_run(self):
        run = dopri54(lambda t, y: np.ones(1), 0.0, [0.0], 3.0, lambda y: y[0] > 1.0)
        self.assertEqual(run.status, "completed")
        self.assertAlmostEqual(run.ys[-1][0], 3.0, places=9)

    def test_underflow_without_certificate(self):
        with self.assertRaises(IntegrationError):
            dopri54(lambda t, y: y * y, 0.0, [1.0], 2.0, lambda y: False)


class TestModel(unittest.TestCase):

    def test_first_integral_is_conserved(self):
        traj = integrate_model(PARAMS, 0.0, 1.3, 50.0)
        self.assertEqual(traj.classification, GLOBAL)
        self.assertLessEqual(traj.max_drift, 1e-7)
        self.assertAlmostEqual(traj.t[-1], 50.0, places=9)

    def test_classification_on_both_sides_of_the_threshold(self):
        """Outside the band |I0| <= 0.05 the computed class is the predicted one."""
        for w0 in (0.5, 0.9, 0.97, 1.03, 1.1, 2.0, -0.5):
            with self.subTest(w0=w0):
                traj = integrate_model(PARAMS, 0.0, w0, 200.0)
                self.assertEqual(traj.classification, expected_classification(PARAMS, 0.0, w0))

    def test_threshold_sweep(self):
        """w0 at 0.90/0.95 of the threshold blows up, 1.05/1.10 is global."""
        factors = ((0.90, BLOWUP), (0.95, BLOWUP), (1.05, GLOBAL), (1.10, GLOBAL))
        for mu, p in ((3.0, 6.0), (2.0, 4.0), (1.5, 3.0)):
            params = OdeParams(mu, p)
            for v0 in (-1.0, 0.0, 1.0):
                star = threshold_w0(mu, p, v0)
                for factor, expected in factors:
                    with self.subTest(mu=mu, p=p, v0=v0, factor=factor):
                        traj = integrate_model(params, v0, factor * star, 200.0)
                        self.assertEqual(traj.classification, expected)

    def test_fast_growth_past_the_thresholds_is_global(self):
        """phi passes 1e12 before t_max without any step underflow."""
        params = OdeParams(1.5, 3.0)
        self.assertEqual(expected_classification(params, 1.0, 20.0), GLOBAL)
        traj = integrate_model(params, 1.0, 20.0, 200.0)
        self.assertEqual(traj.classification, GLOBAL)
        self.assertIsNone(traj.t_plus)
        self.assertAlmostEqual(traj.t[-1], 200.0, places=9)
        self.assertGreater(float(np.max(traj.phi)), 1e12)

    def test_classification_matches_the_sign_of_the_first_integral(self):
        """blowup exactly when w0 <= 0 or I0 < 0, over seeded random parameters."""
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 200:
            mu = float(rng.uniform(1.5, 3.0))
            p = mu + 1.0 + float(rng.uniform(1.0, 2.0))
            v0 = float(rng.uniform(-1.0, 1.0))
            factor = float(rng.uniform(-0.5, 2.0))
            # keep clear of the separatrix, where t_max = 200 cannot resolve the class
            if abs(factor - 1.0) < 0.1:
                continue
            params = OdeParams(mu, p)
            w0 = factor * threshold_w0(mu, p, v0)
            i0 = first_integral(params, OdeState(0.0, math.exp(v0), w0))
            self.assertGreater(abs(i0), 1e-3)
            expected = BLOWUP if (w0 <= 0 or i0 < 0) else GLOBAL
            with self.subTest(mu=mu, p=p, v0=v0, w0=w0):
                traj = integrate_model(params, v0, w0, 200.0)
                self.assertEqual(traj.classification, expected)
            checked += 1

    def test_blowup_reports_time(self):
        traj = integrate_model(PARAMS, 0.0, 0.5, 200.0)
        self.assertEqual(traj.classification, BLOWUP)
        self.assertIsNotNone(traj.t_plus)
        lo, hi = traj.t_plus_bracket
        self.assertLessEqual(lo, hi)
        self.assertLess(traj.t_plus, 200.0)

    def test_dense_output(self):
        traj = integrate_model(PARAMS, 0.0, 1.3, 5.0)
        np.testing.assert_allclose(traj.interpolate(traj.t[3]), traj.v[3])
        self.assertEqual(len(traj.rows()), traj.t.size)
        self.assertEqual(len(traj.samples), traj.t.size)

    def test_invalid_t_max(self):
        with self.assertRaises(ParameterError):
            integrate_model(PARAMS, 0.0, 1.0, 0.0)

    def test_model_is_concave_in_phi(self):
        """For mu = 3, (e^v)'' = -e^{-3v} < 0 along every trajectory."""
        traj = integrate_model(PARAMS, 0.0, 1.3, 20.0)
        report = convexity_check(3.0, traj)
        self.assertTrue(report.all_nonpositive)
        self.assertLess(report.max_second_difference, 0.0)


class TestGeneralOperators(unittest.TestCase):

    def test_invert_lambda1(self):
        f = make_symfunc("sigma_k", 3, 1)
        self.assertAlmostEqual(invert_lambda1(f, -0.5, 2.0), 3.0, places=12)

    def test_affine_operator_reproduces_the_model(self):
        f = make_symfunc("affine", 3, 3.0)
        general = integrate_general(f, f.cone, 6.0, 1.1, 0.0, 5.0, params=PARAMS)
        model = integrate_model(PARAMS, 0.0, 1.1, 5.0)
        self.assertEqual(general.classification, GLOBAL)
        self.assertFalse(general.cone_exit)
        self.assertAlmostEqual(general.t[-1], model.t[-1], places=9)
        self.assertAlmostEqual(general.v[-1], model.v[-1], delta=1e-7)
        self.assertLessEqual(general.max_drift, 1e-7)

    def test_affine_and_model_agree_in_sup_norm(self):
        """Both integrators stay within 1e-7 of each other on [0, 10]."""
        f = make_symfunc("affine", 3, 3.0)
        gaps = []
        for t_end in np.linspace(0.5, 10.0, 20):
            general = integrate_general(f, f.cone, 6.0, 1.1, 0.0, float(t_end), params=PARAMS)
            model = integrate_model(PARAMS, 0.0, 1.1, float(t_end))
            self.assertEqual(general.classification, GLOBAL)
            gaps.append(abs(float(general.v[-1]) - float(model.v[-1])))
        self.assertLessEqual(max(gaps), 1e-7)

    def test_no_global_solution_in_the_nonexistence_range(self):
        """For affine f, bc > 0 and p in {0, mu + 1} every run blows up or leaves the cone."""
        rng = np.random.default_rng(7)
        for i in range(30):
            mu = float(rng.uniform(1.5, 3.0))
            bc = float(rng.uniform(0.2, 1.0))
            v0 = float(rng.uniform(-0.5, 0.5))
            p = 0.0 if i % 2 == 0 else mu + 1.0
            f = make_symfunc("affine", 3, mu)
            with self.subTest(mu=mu, p=p, bc=bc, v0=v0):
                traj = integrate_general(f, f.cone, p, bc, v0, 200.0)
                self.assertTrue(traj.classification == BLOWUP or traj.cone_exit)

    def test_cone_exit_is_recorded(self):
        """sigma_1 with p = 0 on the positive cone leaves it as soon as v' != 0."""
        f = make_symfunc("sigma_k", 3, 1, make_cone("gamma_k", 3, 3))
        traj = integrate_general(f, f.cone, 0.0, 1.0, 0.0, 1.0)
        self.assertTrue(traj.cone_exit)
        self.assertEqual(traj.cone_exit_t, 0.0)

    def test_trajectory_from_field(self):
        v = make_field(FieldSpec("one_var_min_f", 3, {"mu": 3.0, "c": 1.0}))
        traj = trajectory_from_field(v, 0.0, 2.0, 11, make_cone("min_mu", 3, 3.0))
        np.testing.assert_allclose(traj.v, np.log1p(traj.t), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(traj.w, 1.0 / (1.0 + traj.t), rtol=1e-12)
        with self.assertRaises(InputError):
            trajectory_from_field(v, 1.0, 0.0, 11)

    def test_convexity_needs_samples(self):
        v = make_field(FieldSpec("one_var_min_f", 3, {"mu": 3.0, "c": 1.0}))
        with self.assertRaises(InputError):
            convexity_check(3.0, trajectory_from_field(v, 0.0, 1.0, 3))


if __name__ == "__main__":
    unittest.main()
