from io import StringIO
import unittest

import numpy as np
from parameterized import parameterized

from chiralkit.exceptions import ContractViolation
from chiralkit.mesh import TriMesh, disk, euler_characteristic, icosphere, implicit_surface, weld


def grid(n=48, extent=1.05):
    axis = np.linspace(-extent, extent, n)
    return np.meshgrid(axis, axis, axis, indexing='ij')


class TestGenerators(unittest.TestCase):
    @parameterized.expand([(0, 12, 20), (2, 162, 320), (4, 2562, 5120)])
    def test_when_subdividing_the_icosphere_it_stays_a_sphere(self, level, vertices, faces):
        mesh = icosphere(level, center=(1.0, 0.0, 0.0), radius=0.5)
        self.assertEqual(vertices, len(mesh.vertices))
        self.assertEqual(faces, len(mesh.faces))
        self.assertEqual(2, euler_characteristic(mesh))
        np.testing.assert_allclose(0.5, np.linalg.norm(mesh.vertices - [1.0, 0.0, 0.0], axis=1))

    def test_when_building_a_disk_it_has_one_boundary_loop(self):
        mesh = disk(rings=4, sectors=12)
        summary = mesh.summary()
        self.assertEqual(1, summary['euler_characteristic'])
        self.assertEqual(1, summary['boundary_loops'])
        self.assertEqual(1, summary['components'])

    def test_when_faces_reference_missing_vertices_it_raises(self):
        with self.assertRaises(ContractViolation):
            TriMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]))

    def test_when_welding_duplicates_are_merged_and_collapsed_faces_dropped(self):
        vertices = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0], [0, 0, 0]])
        faces = np.array([[0, 1, 2], [3, 2, 4], [0, 3, 1]])
        merged, welded = weld(vertices, faces)
        self.assertEqual(3, len(merged))
        self.assertEqual(2, len(welded))

    def test_when_writing_obj_faces_are_one_based(self):
        stream = StringIO()
        TriMesh(np.eye(3), np.array([[0, 1, 2]])).write_obj(stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(['v 1 0 0', 'v 0 1 0', 'v 0 0 1', 'f 1 2 3'], lines)


class TestImplicitSurfaces(unittest.TestCase):
    def test_when_extracting_a_sphere_it_is_closed_and_connected(self):
        x, y, z = grid()
        mesh = implicit_surface(x * x + y * y + z * z, 0.25, 1.05)
        self.assertEqual(2, mesh.euler_characteristic())
        self.assertEqual(1, mesh.connected_components())
        self.assertEqual(0, mesh.boundary_loops())

    def test_when_clipping_a_plane_to_a_ball_it_is_a_disk(self):
        x, _, _ = grid()
        mesh = implicit_surface(x, 0.1, 1.05, ball_radius=0.5)
        self.assertEqual(1, mesh.euler_characteristic())
        self.assertEqual(1, mesh.boundary_loops())
        self.assertLessEqual(np.linalg.norm(mesh.vertices, axis=1).max(), 0.5 + 1e-12)

    def test_when_clipping_to_a_ball_the_boundary_lies_on_the_sphere(self):
        x, y, _ = grid()
        mesh = implicit_surface(x + 0.3 * y, 0.05, 1.05, ball_radius=0.5)
        rim = np.unique(mesh.boundary_edges())
        np.testing.assert_allclose(0.5, np.linalg.norm(mesh.vertices[rim], axis=1), rtol=1e-12)

    def test_when_the_level_is_not_attained_the_surface_is_empty(self):
        x, y, z = grid(16)
        mesh = implicit_surface(x * x + y * y + z * z, -1.0, 1.05)
        self.assertEqual(0, len(mesh.faces))
        self.assertEqual(0, mesh.euler_characteristic())
        self.assertEqual(0, mesh.connected_components())
