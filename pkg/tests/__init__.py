"""
halfspace-liouville tests.

Fixtures under tests/fixtures hold the field, grid, map and custom-cone
files shared by the module and command-line tests.
"""
