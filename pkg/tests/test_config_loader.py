"""
Tests for the numerical configuration loader.
"""

import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

from halfspace_liouville.config import ConfigLoader, get_config_loader, get_section
from halfspace_liouville.config.config_loader import CONFIG_ENV_VAR, REQUIRED_SECTIONS


class TestConfigLoader(unittest.TestCase):
    """Test cases for ConfigLoader."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write(self, name, content):
        path = os.path.join(self.temp_dir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
        return path

    def test_packaged_config_is_valid(self):
        """The shipped numerics.json passes validation and has every section."""
        loader = ConfigLoader()
        self.assertEqual(loader.validate_config(), [])
        for section in REQUIRED_SECTIONS:
            self.assertIn(section, loader.get_config())

    def test_packaged_config_matches_defaults(self):
        loader = ConfigLoader()
        defaults = loader._get_default_config()
        for section in REQUIRED_SECTIONS:
            self.assertEqual(loader.get_section(section), defaults[section], section)

    def test_partial_override_merges_with_defaults(self):
        """A user file naming one key keeps the rest of the section."""
        path = self._write("override.json", json.dumps({"ode": {"rtol": 1e-8}}))
        loader = ConfigLoader(path)
        ode = loader.get_section("ode")
        self.assertEqual(ode["rtol"], 1e-8)
        self.assertEqual(ode["atol"], 1e-12)
        self.assertEqual(loader.get_section("cones")["mu_max"], 1e6)

    def test_missing_file_falls_back_to_defaults(self):
        missing = os.path.join(self.temp_dir, "nope.json")
        with self.assertLogs("halfspace_liouville.config.config_loader", level="WARNING"):
            loader = ConfigLoader(missing)
        self.assertEqual(loader.get_section("liouville")["lam_max"], 1e3)

    def test_invalid_json_falls_back_to_defaults(self):
        path = self._write("broken.json", "{ not json")
        with self.assertLogs("halfspace_liouville.config.config_loader", level="ERROR"):
            loader = ConfigLoader(path)
        self.assertEqual(loader.get_section("grids")["resolution"], 5)

    def test_validate_reports_bad_values(self):
        path = self._write(
            "bad.json",
            json.dumps({"cones": {"sample_shell": [2.0, 1.0]}, "ode": {"rtol": -1}}),
        )
        errors = ConfigLoader(path).validate_config()
        self.assertTrue(any("sample_shell" in e for e in errors))
        self.assertTrue(any("ode.rtol" in e for e in errors))

    def test_environment_variable_selects_file(self):
        path = self._write("env.json", json.dumps({"grids": {"seed": 7}}))
        with patch.dict(os.environ, {CONFIG_ENV_VAR: path}):
            loader = ConfigLoader()
        self.assertEqual(loader.get_section("grids")["seed"], 7)

    def test_reload_picks_up_changes(self):
        path = self._write("reload.json", json.dumps({"grids": {"seed": 1}}))
        loader = ConfigLoader(path)
        self._write("reload.json", json.dumps({"grids": {"seed": 2}}))
        loader.reload_config()
        self.assertEqual(loader.get_section("grids")["seed"], 2)

    def test_sections_are_copies(self):
        loader = ConfigLoader()
        section = loader.get_section("liouville")
        section["shell_factors"].append(1000.0)
        self.assertNotIn(1000.0, loader.get_section("liouville")["shell_factors"])

    def test_global_loader_is_shared(self):
        self.assertIs(get_config_loader(), get_config_loader())
        self.assertEqual(get_section("cones")["membership_tol"], 1e-9)


if __name__ == "__main__":
    unittest.main()
