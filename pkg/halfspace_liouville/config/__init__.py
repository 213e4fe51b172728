"""
Configuration package for halfspace-liouville.

Holds the numerical defaults file and the loader that every numerical
module reads its constants from.
"""

from .config_loader import ConfigLoader, get_config_loader, get_section, reload_config

__all__ = ["ConfigLoader", "get_config_loader", "get_section", "reload_config"]
