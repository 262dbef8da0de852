"""
==========
surface.py
==========

Surface-level analyses: topology of the level sets of a germ inside a
ball, dividing sets on spheres (the tangency locus of the contact normal)
with the Giroux criterion, and the construction of singular contact forms
on S x [-1, 1] from a pair of vector fields on the surface S = R^2.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from chiralkit.chirality import defect_polynomial, reeb_like
from chiralkit.exceptions import ContractViolation, NonRegularValue, TransversalityFailure, ZeroOnSphere
from chiralkit.fields import FieldEvaluator
from chiralkit.mesh import TriMesh, disk, euler_characteristic, icosphere, implicit_surface
from chiralkit.polyform import (DifferentialForm, Polynomial, PolyVectorField, Z, ZERO, evaluate_many, form_to_json,
                                gradient, polynomial_to_json)

logger = logging.getLogger(__name__)

__all__ = ['TriMesh', 'euler_characteristic', 'icosphere', 'disk', 'level_set_mesh', 'level_set_topology',
           'DividingSetReport', 'dividing_set', 'SurfaceConstruction', 'surface_contact_construct',
           'reeb_tangency_check']


def level_set_mesh(phi, c, ball_radius=1.0, resolution=128, regular_tol=1e-8):
    """
    Marching-cubes extraction of {phi = c} clipped to the ball of the given radius.

    The sampling grid has an even number of points per axis over a box
    slightly larger than the ball, so the origin is never a grid node.

    Raises
    ------
    NonRegularValue
        if |grad phi| <= regular_tol at an extracted vertex
    """
    n = resolution + (resolution % 2)
    extent = 1.05 * ball_radius
    axis = np.linspace(-extent, extent, n)
    values = phi.grid_values(axis, axis, axis)
    mesh = implicit_surface(values, float(c), extent, ball_radius)
    if len(mesh.vertices):
        grad = np.stack([g.evaluate_many(mesh.vertices) for g in gradient(phi).components], axis=-1)
        low = float(np.linalg.norm(grad, axis=-1).min())
        if low <= regular_tol:
            raise NonRegularValue(f'{c} is not a regular value of {phi} on the ball (min |grad| = {low:.3g})')
        mesh.values = phi.evaluate_many(mesh.vertices)
    logger.debug('Level %g of %s: %s', c, phi, mesh.summary())
    return mesh


def level_set_topology(phi, c=0.01, ball_radius=1.0, resolution=128):
    """
    Euler characteristics of F+ = {phi = c} and F- = {phi = -c} inside the
    ball, and the index estimate k = (chi(F+) - chi(F-)) / 2 that the
    relation chi(F+-) = 1 +- k implies.
    """
    plus = level_set_mesh(phi, abs(c), ball_radius, resolution)
    minus = level_set_mesh(phi, -abs(c), ball_radius, resolution)
    chi_plus, chi_minus = plus.euler_characteristic(), minus.euler_characteristic()
    return {
        'c': abs(c),
        'radius': ball_radius,
        'resolution': resolution,
        'F_plus': plus.summary(),
        'F_minus': minus.summary(),
        'chi_plus': int(chi_plus),
        'chi_minus': int(chi_minus),
        'index_estimate': (chi_plus - chi_minus) / 2,
        'sum_is_two': chi_plus + chi_minus == 2,
    }, plus, minus


@dataclass
class DividingSetReport:
    """
    The tangency locus of the contact normal on a sphere.

    Attributes
    ----------
    center, radius :
        The sphere
    subdivisions : int
        Icosphere level used for the final count
    scalar_min, scalar_max : float
        Range of the tangency scalar <N, outward normal>
    component_count : int
        Connected components of the zero set of the scalar
    component_sizes : list
        Crossing edges per component
    giroux_verdict : string
        'overtwisted' for two or more components, else 'tight-neighborhood'
    """
    center: tuple
    radius: float
    subdivisions: int
    scalar_min: float
    scalar_max: float
    component_count: int
    component_sizes: list = field(default_factory=list)
    giroux_verdict: str = 'tight-neighborhood'

    def to_json(self):
        return {
            'center': list(self.center),
            'radius': self.radius,
            'subdivisions': self.subdivisions,
            'scalar_min': self.scalar_min,
            'scalar_max': self.scalar_max,
            'component_count': self.component_count,
            'component_sizes': self.component_sizes,
            'giroux_verdict': self.giroux_verdict,
        }


def _normal_values(eta, points):
    if isinstance(eta, FieldEvaluator):
        return eta(points)
    if isinstance(eta, DifferentialForm) and eta.degree == 1:
        return evaluate_many(eta, points)
    if isinstance(eta, PolyVectorField):
        return np.stack([c.evaluate_many(points) for c in eta.components], axis=-1)
    raise ContractViolation(f'dividing_set needs a 1-form, got {type(eta).__name__}')


def _crossing_components(mesh, scalar):
    """Components of the graph on sign-crossing edges, joined through shared faces."""
    positive = scalar > 0
    faces = mesh.faces
    pairs = np.stack([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=1)
    pairs = np.sort(pairs, axis=2)
    edges, inverse = np.unique(pairs.reshape(-1, 2), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1, 3)
    crossing = positive[edges[:, 0]] != positive[edges[:, 1]]
    if not crossing.any():
        return []
    rows, cols = [], []
    for face_edges in inverse:
        hits = [e for e in face_edges if crossing[e]]
        if len(hits) == 2:
            rows.append(hits[0])
            cols.append(hits[1])
    n = len(edges)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    labels = labels[crossing]
    _, counts = np.unique(labels, return_counts=True)
    return sorted(counts.tolist(), reverse=True)


def dividing_set(eta, center=(0.0, 0.0, 0.0), radius=0.5, subdivisions=5, max_subdivisions=7, zero_tol=1e-12):
    """
    Traces the dividing set of a sphere as the zero set of <N, outward normal>,
    N the Euclidean dual of eta, on an icosphere; refines once per level while
    some component has fewer than 8 crossing edges.

    Raises
    ------
    ZeroOnSphere
        if eta vanishes at a sample point
    """
    center = tuple(float(v) for v in center)
    while True:
        mesh = icosphere(subdivisions, center, radius)
        values = _normal_values(eta, mesh.vertices)
        norms = np.linalg.norm(values, axis=-1)
        if norms.min() <= zero_tol * max(1.0, norms.max()):
            raise ZeroOnSphere(f'eta vanishes on the sphere of radius {radius} about {center}')
        outward = (mesh.vertices - np.asarray(center)) / radius
        scalar = np.sum(values * outward, axis=-1) / norms
        sizes = _crossing_components(mesh, scalar)
        if not sizes or min(sizes) >= 8 or subdivisions >= max_subdivisions:
            break
        logger.info('Dividing set component with %d crossing edges at level %d; refining', min(sizes), subdivisions)
        subdivisions += 1
    if not sizes:
        logger.warning('The tangency scalar does not change sign on the sphere of radius %g', radius)
    count = len(sizes)
    return DividingSetReport(center, radius, subdivisions, float(scalar.min()), float(scalar.max()), count, sizes,
                             'overtwisted' if count >= 2 else 'tight-neighborhood')


def _planar(field, name):
    if not isinstance(field, PolyVectorField):
        raise ContractViolation(f'{name} must be a PolyVectorField')
    fx, fy, fz = field.components
    if not fz.is_zero or any(e[2] for c in (fx, fy) for e in c.terms):
        raise ContractViolation(f'{name} must be a vector field on the plane: no d/dz part, no z dependence')
    return fx, fy


def _surface_d(u):
    """d_S u = u_x dx + u_y dy."""
    return DifferentialForm(1, [u.diff(0), u.diff(1), ZERO])


@dataclass
class SurfaceConstruction:
    """
    The pieces of the construction: beta = i_X Omega, gamma = i_Y Omega,
    u_z and the 1-form eta on S x [-1, 1].
    """
    X: PolyVectorField
    Y: PolyVectorField
    orientation: int
    beta: DifferentialForm
    gamma: DifferentialForm
    u: Polynomial
    eta: DifferentialForm

    @property
    def beta_wedge_gamma(self):
        """The dx^dy coefficient of beta ^ gamma, X_x Y_y - X_y Y_x."""
        return self.beta.components[0] * self.gamma.components[1] - self.beta.components[1] * self.gamma.components[0]

    @property
    def u0(self):
        return self.u.map_terms(lambda e, c: c if e[2] == 0 else 0)

    def z0_defect(self):
        """The defect of eta restricted to z = 0."""
        return defect_polynomial(self.eta).map_terms(lambda e, c: c if e[2] == 0 else 0)

    def expected_z0_defect(self):
        """orientation * (u0^2 + beta ^ gamma)."""
        return (self.u0 * self.u0 + self.beta_wedge_gamma) * self.orientation

    def z0_identity_holds(self):
        return self.z0_defect() == self.expected_z0_defect()

    def to_json(self):
        return {
            'orientation': self.orientation,
            'u': polynomial_to_json(self.u),
            'u_text': str(self.u),
            'beta': form_to_json(self.beta),
            'gamma': form_to_json(self.gamma),
            'eta': form_to_json(self.eta),
            'eta_text': [str(c) for c in self.eta.components],
            'z0_defect': str(self.z0_defect()),
            'z0_identity_holds': self.z0_identity_holds(),
        }


def _surface_grid(n=41, extent=1.0):
    axis = np.linspace(-extent, extent, n)
    xs, ys = np.meshgrid(axis, axis, indexing='ij')
    return np.stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)], axis=-1)


def surface_contact_construct(X_field, Y_field, orientation=1, samples=41, tol=1e-12):
    """
    Builds eta = beta_z + u_z dz on S x [-1, 1] from vector fields X, Y on S:

        u_z = div(X - z Y),  beta_z = beta + z (d_S u_z - gamma)

    and, for orientation -1, u_z = div(X + z Y), beta_z = beta - z (d_S u_z - gamma),
    eta = beta_z - u_z dz, which gives a negative form.

    Raises
    ------
    TransversalityFailure
        if beta ^ gamma < 0 at a sample point of [-1, 1]^2, or the z = 0
        defect u0^2 + beta ^ gamma vanishes at a sample point where X does not
    """
    if orientation not in (1, -1):
        raise ContractViolation('orientation must be 1 or -1')
    xx, xy = _planar(X_field, 'X')
    yx, yy = _planar(Y_field, 'Y')
    beta = DifferentialForm(1, [-xy, xx, ZERO])
    gamma = DifferentialForm(1, [-yy, yx, ZERO])
    div_x = xx.diff(0) + xy.diff(1)
    div_y = yx.diff(0) + yy.diff(1)
    u = div_x - Z * div_y * orientation
    beta_z = beta + (_surface_d(u) - gamma) * Z * orientation
    eta = beta_z + DifferentialForm(1, [ZERO, ZERO, u * orientation])
    construction = SurfaceConstruction(X_field, Y_field, orientation, beta, gamma, u, eta)

    points = _surface_grid(samples)
    wedge_values = construction.beta_wedge_gamma.evaluate_many(points)
    if wedge_values.min() < -tol:
        where = points[int(np.argmin(wedge_values))]
        raise TransversalityFailure(f'beta ^ gamma = {wedge_values.min():.3g} < 0 at {tuple(where[:2])}')
    defect = (construction.u0 * construction.u0 + construction.beta_wedge_gamma).evaluate_many(points)
    moving = np.hypot(xx.evaluate_many(points), xy.evaluate_many(points)) > 1e-9
    if np.any(defect[moving] <= tol):
        where = points[moving][int(np.argmin(defect[moving]))]
        raise TransversalityFailure(f'The z = 0 defect vanishes at {tuple(where[:2])} where X does not')
    return construction


def reeb_tangency_check(eta, samples=41, extent=1.0, singular_tol=1e-6, rtol=1e-8):
    """
    Checks on S x {0} that a Reeb-like field R is tangent to the surface:
    max |<R/|R|, dz>| < rtol away from the zeros of R. Also reports how far
    the plane field ker eta is from the surface tangent plane.

    Parameters
    ----------
    eta : DifferentialForm or FieldEvaluator
        Polynomial 1-forms use the exact Reeb-like field; evaluators their curl
    """
    if isinstance(eta, FieldEvaluator):
        points = _surface_grid(samples, extent)
        if eta.domain.periods[0]:
            points[:, :2] = (points[:, :2] + extent) * np.pi / extent
        reeb = eta.reeb_like()(points)
        values = eta(points)
    else:
        points = _surface_grid(samples, extent)
        reeb = np.stack([c.evaluate_many(points) for c in reeb_like(eta).components], axis=-1)
        values = evaluate_many(eta, points)
    norms = np.linalg.norm(reeb, axis=-1)
    scale = max(float(norms.max()), 1e-300)
    regular = norms > singular_tol * scale
    normal = np.abs(reeb[regular, 2]) / norms[regular]
    worst = int(np.argmax(normal)) if normal.size else None
    eta_norms = np.linalg.norm(values, axis=-1)
    eta_regular = eta_norms > singular_tol * max(float(eta_norms.max()), 1e-300)
    plane_tilt = np.hypot(values[eta_regular, 0], values[eta_regular, 1]) / eta_norms[eta_regular]
    max_normal = float(normal.max()) if normal.size else 0.0
    return {
        'max_normal_component': max_normal,
        'worst_point': None if worst is None else points[regular][worst].tolist(),
        'excluded_points': int((~regular).sum()),
        'plane_field_tilt': float(plane_tilt.max()) if plane_tilt.size else 0.0,
        'passed': max_normal < rtol,
    }
