"""
Tests for sample grids and seeded sample sets.
"""

import json
import os
import shutil
import tempfile
import unittest

import numpy as np

from halfspace_liouville.exceptions import InputError, SpecFormatError
from halfspace_liouville.grids import (
    GridSpec,
    annulus_samples,
    ball_samples,
    default_grid,
    hemisphere_directions,
    load_grid,
)

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


class TestGridSpec(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_default_grid(self):
        grid = default_grid(3)
        pts = grid.points()
        self.assertEqual(len(pts), 5**3 + 32)
        self.assertTrue(np.all(pts[:, -1] >= 0.0))
        self.assertEqual(len(grid.boundary_points()), 25)
        self.assertEqual(len(grid.boundary_points()) + len(grid.interior_points()), len(pts))

    def test_lower_corner_is_clipped_to_the_half_space(self):
        grid = GridSpec(lower=(-1.0, -2.0), upper=(1.0, 2.0), resolution=(3, 3), halton_count=0)
        np.testing.assert_array_equal(np.unique(grid.points()[:, -1]), [0.0, 1.0, 2.0])

    def test_points_are_deterministic(self):
        np.testing.assert_array_equal(default_grid(3, seed=4).points(), default_grid(3, seed=4).points())
        self.assertFalse(np.array_equal(default_grid(3, seed=4).scatter(), default_grid(3, seed=5).scatter()))

    def test_excluding_drops_a_ball(self):
        grid = default_grid(3)
        center = np.zeros(3)
        smaller = grid.excluding(center, 1.5)
        self.assertTrue(np.all(np.linalg.norm(smaller.points() - center, axis=1) >= 1.5))
        self.assertLess(len(smaller.points()), len(grid.points()))
        self.assertEqual(len(grid.excluded), 0)

    def test_validation(self):
        bad = [
            dict(lower=(0.0,), upper=(1.0,), resolution=(3,)),
            dict(lower=(0.0, 0.0), upper=(1.0, 1.0), resolution=(1, 3)),
            dict(lower=(1.0, 0.0), upper=(0.0, 1.0), resolution=(3, 3)),
            dict(lower=(0.0, -2.0), upper=(1.0, 0.0), resolution=(3, 3)),
            dict(lower=(0.0, 0.0), upper=(1.0, 1.0), resolution=(3, 3), excluded=(((0.0, 0.0), -1.0),)),
        ]
        for kwargs in bad:
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(InputError):
                    GridSpec(**kwargs)

    def test_load_fixture(self):
        grid = load_grid(os.path.join(FIXTURES, "small_grid.json"))
        self.assertEqual(grid.resolution, (4, 4, 4))
        self.assertEqual(len(grid.points()), 64 + 8)
        self.assertEqual(grid.to_dict()["point_count"], 72)

    def test_dict_round_trip_keeps_exclusions(self):
        grid = default_grid(2).excluding((0.0, 0.0), 1.0)
        again = GridSpec.from_dict(grid.to_dict())
        self.assertEqual(again, grid)

    def test_malformed_files(self):
        path = os.path.join(self.temp_dir, "grid.json")
        for content in ("[1, 2]", '{"upper": [1, 1]}', '{"lower": [0, 0], "upper": ["a", 1]}', "{"):
            with self.subTest(content=content):
                with open(path, "w", encoding="utf-8") as f:
                    f.write(content)
                with self.assertRaises(SpecFormatError):
                    load_grid(path)

    def test_invalid_values_in_file(self):
        path = os.path.join(self.temp_dir, "grid.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"lower": [0, 0], "upper": [1, 1], "resolution": 1}, f)
        with self.assertRaises(InputError):
            load_grid(path)


class TestSampleSets(unittest.TestCase):

    def test_hemisphere_directions(self):
        dirs = hemisphere_directions(3, count=10, seed=0)
        self.assertGreaterEqual(len(dirs), 2 * 2 + 1)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
        self.assertTrue(np.all(dirs[:, -1] >= 0.0))

    def test_ball_samples(self):
        pts = ball_samples(3, 0.5, 40, seed=1)
        radii = np.linalg.norm(pts, axis=1)
        self.assertEqual(pts.shape, (40, 3))
        self.assertTrue(np.all(radii < 0.5))
        self.assertTrue(np.all(radii > 0.0))
        self.assertTrue(np.all(pts[:, -1] > 0.0))

    def test_boundary_ball_samples(self):
        pts = ball_samples(3, 0.5, 20, seed=1, boundary=True)
        np.testing.assert_array_equal(pts[:, -1], np.zeros(20))

    def test_annulus_samples(self):
        center = np.array([0.0, 0.0, 1.0])
        pts = annulus_samples(center, 3.0, 10.0, 50, seed=2)
        radii = np.linalg.norm(pts - center, axis=1)
        self.assertTrue(np.all((radii > 3.0) & (radii < 10.0)))
        self.assertTrue(np.all(pts[:, -1] > 0.0))


if __name__ == "__main__":
    unittest.main()
