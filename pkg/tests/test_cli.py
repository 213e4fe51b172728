"""
End-to-end tests of the halfspace-liouville command line.
"""

import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest

from halfspace_liouville import cli
from halfspace_liouville.cli import COMMANDS, build_parser, run
from halfspace_liouville.config import get_section

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
BUBBLE = os.path.join(FIXTURES, "bubble.json")
BUBBLE_WIDE = os.path.join(FIXTURES, "bubble_wide.json")
SMALL_GRID = os.path.join(FIXTURES, "small_grid.json")
MAP = os.path.join(FIXTURES, "inversion_map.json")
THIRD = repr(1.0 / 3.0)


def run_cli(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = run(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class TestParser(unittest.TestCase):

    def test_every_command_is_registered(self):
        parser = build_parser()
        for command in COMMANDS:
            with self.subTest(command=command):
                with contextlib.redirect_stdout(io.StringIO()):
                    with self.assertRaises(SystemExit) as ctx:
                        parser.parse_args([command, "--help"])
                self.assertEqual(ctx.exception.code, 0)

    def test_unknown_flag(self):
        code, _, _ = run_cli("eig", "--field", BUBBLE, "--point", "0,0,1", "--bogus")
        self.assertEqual(code, 2)

    def test_c_and_h_are_exclusive(self):
        code, _, _ = run_cli("threshold", "--mu", "3", "--p", "6", "--c", "1", "--h", "1")
        self.assertEqual(code, 2)

    def test_tolerances_come_from_the_cli_section(self):
        section = get_section("cli")
        self.assertEqual(cli.INVARIANCE_TOL_ANALYTIC, section["invariance_tol_analytic"])
        self.assertEqual(cli.INVARIANCE_TOL_FD, section["invariance_tol_fd"])
        self.assertEqual(cli.EIGEN_RESIDUAL_TOL, section["eigen_residual_tol"])
        self.assertEqual(cli.RIGIDITY_RADIUS_TOL, section["rigidity_radius_tol"])
        self.assertEqual(cli.RIGIDITY_KELVIN_TOL, section["rigidity_kelvin_tol"])


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_eig(self):
        code, out, err = run_cli("eig", "--field", BUBBLE, "--point", "0.5,0,0",
                                 "--convention", "neumann", "--cone", "gamma_k:1", "--no-timestamp")
        self.assertEqual(code, 0, err)
        self.assertIn("✅", err)
        report = json.loads(out)
        self.assertEqual(report["command"], "eig")
        for lam in report["eigenvalues"]:
            self.assertAlmostEqual(lam, 1.0 / 3.0, places=10)
        self.assertAlmostEqual(report["boundary"]["value"], 1.0 / 3.0, places=10)
        self.assertEqual(report["cone_status"], "interior")
        self.assertTrue(report["pass"])
        self.assertNotIn("generated_at", report)

    def test_output_is_deterministic(self):
        argv = ("eig", "--field", BUBBLE, "--point", "0.2,0.1,0.7", "--no-timestamp")
        self.assertEqual(run_cli(*argv)[1], run_cli(*argv)[1])

    def test_missing_field_file(self):
        missing = os.path.join(self.temp_dir, "none.json")
        code, out, err = run_cli("eig", "--field", missing, "--point", "0,0,1")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("❌", err)

    def test_boundary_convention_off_the_boundary(self):
        code, _, _ = run_cli("eig", "--field", BUBBLE, "--point", "0,0,1", "--convention", "neumann")
        self.assertEqual(code, 2)

    def test_invariance(self):
        code, out, err = run_cli("invariance", "--field", BUBBLE, "--samples", "20", "--no-timestamp")
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertLessEqual(report["max_relative_gap"], 1e-9)
        self.assertEqual(report["map"], "random")

    def test_invariance_with_a_map_file(self):
        code, out, err = run_cli("invariance", "--field", BUBBLE, "--map", MAP, "--samples", "5")
        self.assertEqual(code, 0, err)
        self.assertEqual(len(json.loads(out)["map"]), 3)

    def test_cone(self):
        code, out, err = run_cli("cone", "--cone", "gamma_k:1", "--n", "3", "--lams=1,0,-0.5")
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertAlmostEqual(report["constants"]["mu_minus"], 2.0, places=8)
        self.assertEqual(report["status"], "interior")

    def test_conditions(self):
        code, out, err = run_cli("conditions", "--f", "sigma_k:1", "--samples", "16", "--p", "2", "--c", "1")
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertIn("nonexistence_applies", report)
        self.assertTrue(report["h1"])

    def test_ode_model(self):
        code, out, err = run_cli("ode", "--mu", "3", "--p", "6", "--w0", "1.3", "--tmax", "5")
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertEqual(report["classification"], "global")
        self.assertEqual(report["checks"]["expected_classification"], "global")

    def test_ode_csv_and_svg(self):
        csv_path = os.path.join(self.temp_dir, "traj.csv")
        svg_path = os.path.join(self.temp_dir, "traj.svg")
        code, out, err = run_cli("ode", "--mu", "3", "--p", "6", "--w0", "1.3", "--tmax", "10",
                                 "--out", csv_path, "--svg", svg_path)
        self.assertEqual(code, 0, err)
        self.assertEqual(out, "")
        self.assertTrue(os.path.exists(csv_path))
        self.assertTrue(os.path.exists(svg_path))
        with open(os.path.join(self.temp_dir, "traj.json"), encoding="utf-8") as f:
            sidecar = json.load(f)
        self.assertEqual(sidecar["classification"], "global")
        self.assertTrue(sidecar["pass"])

    def test_ode_general_operator(self):
        code, out, err = run_cli(
            "ode", "--f", "affine:3", "--mu", "3", "--p", "6", "--c", "1.1", "--tmax", "5"
        )
        self.assertEqual(code, 0, err)
        self.assertEqual(json.loads(out)["classification"], "global")

    def test_threshold(self):
        code, out, err = run_cli("threshold", "--mu", "3", "--p", "6", "--no-timestamp")
        self.assertEqual(code, 0, err)
        self.assertAlmostEqual(json.loads(out)["threshold_w0"], 1.0, places=14)

    def test_threshold_outside_its_range(self):
        code, _, _ = run_cli("threshold", "--mu", "3", "--p", "3")
        self.assertEqual(code, 2)

    def test_threshold_sweep(self):
        code, out, err = run_cli("threshold", "--mu", "3", "--p", "6", "--verify")
        self.assertEqual(code, 0, err)
        sweep = json.loads(out)["sweep"]
        self.assertEqual([s["classification"] for s in sweep], ["blowup", "blowup", "global", "global"])

    def test_spheres_on_a_bubble(self):
        code, out, err = run_cli("spheres", "--field", BUBBLE, "--grid", SMALL_GRID)
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertEqual(report["verdict"], "finite")
        self.assertAlmostEqual(report["bubble"][0]["closed_form"], 7.0 ** 0.5, places=12)

    def test_spheres_fixed_radius(self):
        code, out, err = run_cli("spheres", "--field", BUBBLE_WIDE, "--lam", "1.0", "--grid", SMALL_GRID)
        self.assertEqual(code, 0, err)
        self.assertEqual(json.loads(out)["lam"], 1.0)

    def test_rigidity(self):
        code, out, err = run_cli("rigidity", "--field", BUBBLE, "--f", "sigma_k:1", "--c", THIRD,
                                 "--grid", SMALL_GRID)
        self.assertEqual(code, 0, err)
        self.assertTrue(json.loads(out)["fit"]["is_bubble"])

    def test_rigidity_failure_still_writes_the_report(self):
        path = os.path.join(self.temp_dir, "rigidity.json")
        code, out, err = run_cli("rigidity", "--field", BUBBLE_WIDE, "--f", "sigma_k:1", "--c", THIRD,
                                 "--grid", SMALL_GRID, "--out", path)
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("❌", err)
        with open(path, encoding="utf-8") as f:
            report = json.load(f)
        self.assertFalse(report["pass"])

    def test_rigidity_needs_a_boundary_constant(self):
        code, _, _ = run_cli("rigidity", "--field", BUBBLE, "--f", "sigma_k:1", "--grid", SMALL_GRID)
        self.assertEqual(code, 2)

    def test_counterexample(self):
        code, out, err = run_cli("counterexample", "--kind", "log_power", "--alpha", "0.5")
        self.assertEqual(code, 0, err)
        report = json.loads(out)
        self.assertEqual(report["kind"], "log_power")
        self.assertTrue(report["report"]["pass"])

    def test_counterexample_with_mean_curvature(self):
        code, out, err = run_cli("counterexample", "--kind", "boundary_drift", "--h", "1")
        self.assertEqual(code, 0, err)
        self.assertEqual(json.loads(out)["params"]["c"], -1.0)

    def test_residual(self):
        code, out, err = run_cli("residual", "--field", BUBBLE, "--f", "sigma_k:1", "--c", THIRD,
                                 "--grid", SMALL_GRID)
        self.assertEqual(code, 0, err)
        self.assertEqual(json.loads(out)["method"], "analytic")

    def test_ricci(self):
        code, out, err = run_cli("ricci", "--lams=1,1,1")
        self.assertEqual(code, 0, err)
        self.assertEqual(json.loads(out)["result"], [4.0, 4.0, 4.0])


if __name__ == "__main__":
    unittest.main()
