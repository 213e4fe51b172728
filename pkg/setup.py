#!/usr/bin/env python3
"""
Setup script for the halfspace-liouville package.

Metadata lives in pyproject.toml; this shim keeps legacy editable installs
working and reads the version from the package.
"""

import os

from setuptools import find_packages, setup


def read_readme():
    """Read the README.md file for the long description."""
    readme_path = os.path.join(os.path.dirname(__file__), "README.md")
    if os.path.exists(readme_path):
        with open(readme_path, "r", encoding="utf-8") as f:
            return f.read()
    return "Numerical toolkit for conformally invariant fully nonlinear equations on the half space."


def get_version():
    """Extract version from halfspace_liouville/__init__.py."""
    init_path = os.path.join(os.path.dirname(__file__), "halfspace_liouville", "__init__.py")
    if os.path.exists(init_path):
        with open(init_path, "r", encoding="utf-8") as f:
            for line in f:
                if line.startswith("__version__"):
                    return line.split("=")[1].strip().strip("\"'")
    return "1.0.0"


setup(
    name="halfspace-liouville",
    version=get_version(),
    author="ViewtifulSlayer",
    description="Numerical toolkit for conformally invariant fully nonlinear equations on the half space",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(where=".", include=["halfspace_liouville*"]),
    package_data={"halfspace_liouville": ["config/*.json"]},
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0",
            "pytest-cov>=4.0",
            "hypothesis>=6.0",
            "black>=22.0",
            "flake8>=5.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "halfspace-liouville=halfspace_liouville.cli:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
