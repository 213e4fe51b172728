"""
Configuration loader for halfspace-liouville.

Numerical tolerances, iteration caps and grid defaults live in
``numerics.json`` next to this module. The loader falls back to the
built-in defaults when the file is missing or malformed, so the numerical
modules can always initialise their constants at import time.
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "HALFSPACE_LIOUVILLE_CONFIG"

REQUIRED_SECTIONS = ("fields", "hessian", "cones", "ode", "liouville", "grids", "cli")


class ConfigLoader:
    """
    Configuration loader with fallback to built-in defaults.

    Sections present in the file override the defaults key by key, so a
    user file only needs to name the values it changes.
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize the configuration loader.

        Args:
            config_path: Optional path to a JSON file. If None, the
                ``HALFSPACE_LIOUVILLE_CONFIG`` environment variable is
                consulted, then the packaged ``numerics.json``.
        """
        if config_path is None:
            config_path = os.environ.get(CONFIG_ENV_VAR)
        if config_path is None:
            self.config_path = Path(__file__).parent / "numerics.json"
        else:
            self.config_path = Path(config_path)

        self._config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from file, merged over the defaults."""
        config = self._get_default_config()
        try:
            if self.config_path.exists():
                with open(self.config_path, "r", encoding="utf-8") as f:
                    loaded = json.load(f)
                for section, values in loaded.items():
                    if isinstance(values, dict) and isinstance(config.get(section), dict):
                        config[section].update(values)
                    else:
                        config[section] = values
                logger.debug("Configuration loaded from %s", self.config_path)
            else:
                logger.warning(
                    "Configuration file not found at %s, using defaults", self.config_path
                )
        except json.JSONDecodeError as e:
            logger.error("Invalid JSON in configuration file: %s", e)
        except OSError as e:
            logger.error("Error loading configuration: %s", e)
        self._config = config

    def _get_default_config(self) -> Dict[str, Any]:
        """Built-in defaults, identical to the packaged numerics.json."""
        return {
            "metadata": {
                "version": "1.0.0",
                "description": "Built-in numerical defaults",
            },
            "fields": {
                "r_min": 1e-8,
                "fd_tol_value": 1e-12,
                "fd_tol_gradient": 1e-7,
                "fd_tol_hessian": 1e-4,
            },
            "hessian": {
                "symmetry_tol": 1e-12,
                "jacobi_max_sweeps": 64,
                "boundary_tol": 1e-12,
                "max_jacobi_dimension": 16,
            },
            "cones": {
                "mu_max": 1e6,
                "membership_tol": 1e-9,
                "mu_bisection_tol": 1e-10,
                "sample_shell": [0.5, 2.0],
                "level_set_band": 0.01,
            },
            "ode": {
                "rtol": 1e-10,
                "atol": 1e-12,
                "blowup_w": 1e8,
                "blowup_phi_low": 1e-12,
                "blowup_phi_high": 1e12,
                "step_underflow": 1e-12,
                "max_steps": 2000000,
                "bracket_doublings": 60,
                "drift_tol": 1e-7,
                "threshold_band": 1e-3,
            },
            "liouville": {
                "lam_max": 1e3,
                "lam_tol": 1e-10,
                "comparison_tol": 1e-12,
                "grazing_factor": 1e-4,
                "residual_tol_analytic": 1e-8,
                "residual_tol_fd": 1e-4,
                "rigidity_tol": 1e-8,
                "fit_tol": 1e-4,
                "starter_radii": [1e-2, 1e-3, 1e-4],
                "counterexample_samples": 50,
                "shell_factors": [1.0, 1.0001, 1.01, 1.1, 1.5, 2.0, 4.0, 10.0, 100.0],
            },
            "grids": {
                "resolution": 5,
                "halton_count": 32,
                "seed": 0,
                "shell_directions": 16,
            },
            "cli": {
                "invariance_tol_analytic": 1e-9,
                "invariance_tol_fd": 1e-4,
                "eigen_residual_tol": 1e-10,
                "rigidity_radius_tol": 1e-5,
                "rigidity_kelvin_tol": 1e-6,
            },
        }

    def get_section(self, name: str) -> Dict[str, Any]:
        """Get a copy of one configuration section."""
        return copy.deepcopy(self._config.get(name, {}))

    def get_config(self) -> Dict[str, Any]:
        """Get the complete configuration dictionary."""
        return copy.deepcopy(self._config)

    def reload_config(self) -> None:
        """Reload configuration from file."""
        self._load_config()

    def validate_config(self) -> List[str]:
        """
        Validate configuration structure and return any issues.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []
        for section in REQUIRED_SECTIONS:
            if section not in self._config:
                errors.append(f"Missing required configuration section: {section}")

        for section, key in (
            ("cones", "mu_max"),
            ("liouville", "lam_max"),
            ("ode", "rtol"),
            ("ode", "atol"),
            ("fields", "r_min"),
            ("cli", "invariance_tol_analytic"),
            ("cli", "invariance_tol_fd"),
            ("cli", "eigen_residual_tol"),
            ("cli", "rigidity_radius_tol"),
            ("cli", "rigidity_kelvin_tol"),
        ):
            value = self._config.get(section, {}).get(key)
            if not isinstance(value, (int, float)) or value <= 0:
                errors.append(f"{section}.{key} must be a positive number")

        shell = self._config.get("cones", {}).get("sample_shell")
        if not (isinstance(shell, list) and len(shell) == 2 and 0 < shell[0] < shell[1]):
            errors.append("cones.sample_shell must be [low, high] with 0 < low < high")

        return errors


# Global configuration instance for easy access
_config_loader: Optional[ConfigLoader] = None


def get_config_loader() -> ConfigLoader:
    """Get the global configuration loader instance."""
    global _config_loader
    if _config_loader is None:
        _config_loader = ConfigLoader()
    return _config_loader


def reload_config() -> None:
    """Reload the global configuration."""
    if _config_loader is not None:
        _config_loader.reload_config()


def get_section(name: str) -> Dict[str, Any]:
    """Get one section of the global configuration."""
    return get_config_loader().get_section(name)
