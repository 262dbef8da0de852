"""
=======
mesh.py
=======

Triangle meshes: generators (icosphere, disk), marching-cubes extraction of
implicit surfaces clipped to a ball, topology counts and OBJ export.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from skimage.measure import marching_cubes

from chiralkit.exceptions import ContractViolation

logger = logging.getLogger(__name__)


@dataclass
class TriMesh:
    """
    A triangulated surface.

    Attributes
    ----------
    vertices : numpy.ndarray
        (V, 3) float coordinates
    faces : numpy.ndarray
        (F, 3) vertex indices
    values : numpy.ndarray, optional
        one scalar per vertex
    """
    vertices: np.ndarray
    faces: np.ndarray
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ContractViolation('Mesh faces reference vertices that do not exist')
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=float)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @property
    def edges(self):
        """Unique undirected edges, (E, 2) with the smaller index first."""
        if not self.faces.size:
            return np.zeros((0, 2), dtype=np.int64)
        pairs = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    @property
    def used_vertices(self):
        return np.unique(self.faces) if self.faces.size else np.zeros(0, dtype=np.int64)

    def euler_characteristic(self):
        return len(self.used_vertices) - len(self.edges) + len(self.faces)

    def _vertex_components(self, edges):
        n = len(self.vertices)
        graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
        return labels

    def connected_components(self):
        """Number of connected pieces (isolated unused vertices ignored)."""
        if not self.faces.size:
            return 0
        labels = self._vertex_components(self.edges)
        return len(np.unique(labels[self.used_vertices]))

    def boundary_edges(self):
        pairs = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        edges, counts = np.unique(np.sort(pairs, axis=1), axis=0, return_counts=True)
        return edges[counts == 1]

    def boundary_loops(self):
        boundary = self.boundary_edges()
        if not len(boundary):
            return 0
        labels = self._vertex_components(boundary)
        return len(np.unique(labels[np.unique(boundary)]))

    def write_obj(self, stream):
        """Wavefront OBJ: ``v`` lines then 1-based ``f`` lines."""
        for v in self.vertices:
            stream.write('v {:.12g} {:.12g} {:.12g}\n'.format(*v))
        for f in self.faces:
            stream.write('f {} {} {}\n'.format(*(f + 1)))

    def summary(self):
        return {
            'vertices': int(len(self.used_vertices)),
            'edges': int(len(self.edges)),
            'faces': int(len(self.faces)),
            'euler_characteristic': int(self.euler_characteristic()),
            'components': int(self.connected_components()),
            'boundary_loops': int(self.boundary_loops()),
        }


def euler_characteristic(mesh):
    """V - E + F."""
    return mesh.euler_characteristic()


def weld(vertices, faces, decimals=10):
    """Merges vertices that agree to ``decimals`` places and drops collapsed faces."""
    if not len(vertices):
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)
    keys = np.round(vertices, decimals)
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged = np.zeros_like(unique)
    np.add.at(merged, inverse, vertices)
    merged /= np.bincount(inverse)[:, None]
    faces = inverse[faces]
    keep = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 2] != faces[:, 0])
    return merged, faces[keep]


def icosphere(subdivisions=5, center=(0.0, 0.0, 0.0), radius=1.0):
    """
    Subdivided icosahedron: 10 * 4^n + 2 vertices (level 4: 2562, level 5: 10242).
    """
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    vertices = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
                (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
                (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    vertices = [np.array(v, dtype=float) / np.linalg.norm(v) for v in vertices]
    for _ in range(subdivisions):
        midpoints = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoints:
                m = vertices[i] + vertices[j]
                vertices.append(m / np.linalg.norm(m))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = refined
    points = np.asarray(center, dtype=float) + radius * np.array(vertices)
    return TriMesh(points, np.array(faces))


def disk(rings=8, sectors=16, radius=1.0):
    """A triangulated flat disk in the plane z = 0 (chi = 1)."""
    vertices = [(0.0, 0.0, 0.0)]
    for ring in range(1, rings + 1):
        r = radius * ring / rings
        for k in range(sectors):
            a = 2 * math.pi * k / sectors
            vertices.append((r * math.cos(a), r * math.sin(a), 0.0))

    def index(ring, k):
        return 0 if ring == 0 else 1 + (ring - 1) * sectors + k % sectors

    faces = []
    for k in range(sectors):
        faces.append((0, index(1, k), index(1, k + 1)))
    for ring in range(1, rings):
        for k in range(sectors):
            a, b = index(ring, k), index(ring, k + 1)
            c, d = index(ring + 1, k), index(ring + 1, k + 1)
            faces.extend([(a, c, d), (a, d, b)])
    return TriMesh(np.array(vertices), np.array(faces))


def _clip_to_ball(vertices, faces, radius):
    """
    Cuts every triangle at the sphere |p| = radius and keeps the inside part.
    Cut points are shared between the two triangles on either side of an edge.
    """
    vertices = np.asarray(vertices, dtype=float)
    inside = np.linalg.norm(vertices, axis=1) <= radius
    out_vertices = list(vertices)
    cuts = {}

    def cut(i, j):
        key = (min(i, j), max(i, j))
        if key not in cuts:
            a, b = vertices[key[0]], vertices[key[1]]
            d = b - a
            qa, qb, qc = d @ d, 2 * a @ d, a @ a - radius ** 2
            disc = max(qb * qb - 4 * qa * qc, 0.0)
            roots = [(-qb - math.sqrt(disc)) / (2 * qa), (-qb + math.sqrt(disc)) / (2 * qa)]
            s = min((r for r in roots if -1e-12 <= r <= 1 + 1e-12), key=lambda r: abs(r - 0.5), default=0.5)
            point = a + min(max(s, 0.0), 1.0) * d
            out_vertices.append(point * (radius / np.linalg.norm(point)))
            cuts[key] = len(out_vertices) - 1
        return cuts[key]

    counts = inside[faces].sum(axis=1)
    out_faces = [tuple(face) for face in faces[counts == 3]]
    for face in faces[(counts == 1) | (counts == 2)]:
        flags = inside[face]
        count = int(flags.sum())
        # rotate so the lone vertex (inside for count 1, outside for count 2) comes first
        lone = int(np.flatnonzero(flags == (count == 1))[0])
        a, b, c = face[lone], face[(lone + 1) % 3], face[(lone + 2) % 3]
        if count == 1:
            out_faces.append((a, cut(a, b), cut(a, c)))
        else:
            ab, ac = cut(a, b), cut(a, c)
            out_faces.extend([(ab, b, c), (ab, c, ac)])
    if not out_faces:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)
    out_faces = np.array(out_faces, dtype=np.int64)
    used = np.unique(out_faces)
    remap = -np.ones(len(out_vertices), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return np.array(out_vertices)[used], remap[out_faces]


def implicit_surface(values, level, extent, ball_radius=None):
    """
    Marching-cubes extraction of ``{values = level}`` on a cubic grid covering
    [-extent, extent]^3, optionally clipped to a ball.

    Returns
    -------
    TriMesh
        empty when the level is not attained on the grid
    """
    n = values.shape[0]
    spacing = 2.0 * extent / (n - 1)
    try:
        vertices, faces, _, _ = marching_cubes(values, level=level, spacing=(spacing,) * 3,
                                               allow_degenerate=False, method='lewiner')
    except ValueError:
        logger.info('Level %g not attained on the sampling grid; empty surface', level)
        return TriMesh.empty()
    vertices = vertices - extent
    vertices, faces = weld(vertices, faces)
    if ball_radius is not None:
        vertices, faces = _clip_to_ball(vertices, faces, ball_radius)
        vertices, faces = weld(vertices, faces)
    return TriMesh(vertices, faces)
