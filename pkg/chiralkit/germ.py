"""
=======
germ.py
=======

Analysis of a polynomial function germ at the origin: Hessian data,
Morse/corank classification, the index of its gradient, the Beltrami
obstructions and the chirality verdict.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
import logging
import math

import numpy as np
import sympy

from chiralkit.chirality import chiral_perturb, contact_defect
from chiralkit.exceptions import NonCriticalOrigin, NonIntegralDegree, ZeroOnSphere
from chiralkit.fields import as_evaluator, gauss_degree
from chiralkit.mesh import icosphere
from chiralkit.polyform import (DifferentialForm, Polynomial, PolyVectorField, X, Y, Z, ext_d,
                                gradient, laplacian, polynomial_to_json, solve_poisson)

logger = logging.getLogger(__name__)

__all__ = ['Hessian', 'IndexResult', 'SingularityReport', 'hessian_at_origin', 'numeric_index',
           'degree_by_preimages', 'beltrami_obstruction', 'beltrami_verdict', 'chirality_verdict',
           'analyze_germ', 'laplacian', 'harmonic_part', 'a2_family', 'fold_germ',
           'fold_critical_points']

RESIDUAL_LIMIT = 0.05
CHIRAL_TEST_T = Fraction(1, 100)


@dataclass(frozen=True)
class Hessian:
    """Exact second-derivative matrix of a germ at the origin."""
    matrix: tuple

    @property
    def sympy_matrix(self):
        return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in self.matrix])

    @property
    def rank(self):
        return int(self.sympy_matrix.rank())

    @property
    def corank(self):
        return 3 - self.rank

    @property
    def trace(self):
        return sum((self.matrix[i][i] for i in range(3)), Fraction(0))

    @property
    def is_zero(self):
        return all(c == 0 for row in self.matrix for c in row)

    def eigenvalues(self):
        return np.linalg.eigvalsh(np.array(self.matrix, dtype=float))

    def inertia(self, tol=1e-12):
        """(negative, zero, positive) eigenvalue counts; the zero count is the exact corank."""
        values = self.eigenvalues()
        scale = max(1.0, float(np.max(np.abs(values))))
        zero = self.corank
        negative = int(np.sum(values < -tol * scale))
        return negative, zero, 3 - zero - negative

    @property
    def morse_index(self):
        """Number of negative eigenvalues, or 'not-Morse' when degenerate."""
        return self.inertia()[0] if self.corank == 0 else 'not-Morse'

    @property
    def semidefinite(self):
        negative, _, positive = self.inertia()
        return negative == 0 or positive == 0

    def kernel(self):
        """Exact rational basis of the kernel, as sympy column vectors."""
        return self.sympy_matrix.nullspace()

    def to_json(self):
        return [[f'{c.numerator}/{c.denominator}' for c in row] for row in self.matrix]


def hessian_at_origin(phi):
    """
    Raises
    ------
    NonCriticalOrigin
        if grad phi(0) != 0
    """
    linear = [e for e in phi.terms if sum(e) == 1]
    if linear:
        raise NonCriticalOrigin(f'grad phi does not vanish at the origin for phi = {phi}')
    matrix = tuple(tuple(phi.diff(i).diff(j).coefficient((0, 0, 0)) for j in range(3)) for i in range(3))
    return Hessian(matrix)


@dataclass
class IndexResult:
    index: int
    residual: float
    raw: float
    grid: tuple
    radius: float

    def to_json(self):
        return {'index': self.index, 'residual': self.residual, 'raw': self.raw,
                'grid': list(self.grid), 'radius': self.radius}


def _field_scale(field):
    if isinstance(field, Polynomial):
        return field.coefficient_scale()
    if isinstance(field, PolyVectorField):
        return max(c.coefficient_scale() for c in field.components)
    return None


def numeric_index(field, center=(0.0, 0.0, 0.0), radius=1.0, n_theta=200, n_phi=400,
                  max_n_theta=1600, threads=1):
    """
    Index of a vector field on a sphere: the degree of X/|X| by midpoint
    quadrature on a latitude-longitude grid, doubled until the raw value is
    within RESIDUAL_LIMIT of an integer.

    Parameters
    ----------
    field : Polynomial, PolyVectorField or FieldEvaluator
        A polynomial is replaced by its gradient
    center, radius :
        The sphere
    n_theta, n_phi : int
        Starting grid
    max_n_theta : int
        Largest latitude count tried
    threads : int
        Worker threads for the row chunks

    Returns
    -------
    IndexResult

    Raises
    ------
    ZeroOnSphere
        if min |X| on the grid is not above 1e-9 times the field scale
    NonIntegralDegree
        if the largest grid still leaves a residual of RESIDUAL_LIMIT or more
    """
    scale = _field_scale(field)
    evaluator = as_evaluator(field)
    while True:
        raw, low, high = gauss_degree(evaluator, center, radius, n_theta, n_phi, threads)
        threshold = 1e-9 * (scale if scale else high)
        if not low > threshold:
            raise ZeroOnSphere(f'The field vanishes on the sphere of radius {radius} about {tuple(center)} '
                               f'(min |X| = {low:.3g})')
        index = int(round(raw))
        residual = abs(raw - index)
        if residual < RESIDUAL_LIMIT:
            return IndexResult(index, residual, raw, (n_theta, n_phi), radius)
        if n_theta * 2 > max_n_theta:
            raise NonIntegralDegree(f'Degree quadrature gave {raw:.4f} on a {n_theta}x{n_phi} grid', residual)
        logger.info('Degree %.4f not integral on a %dx%d grid; refining', raw, n_theta, n_phi)
        n_theta, n_phi = n_theta * 2, n_phi * 2


DEFAULT_TARGETS = ((0.267, 0.534, 0.802), (-0.618, 0.339, -0.709), (0.123, -0.987, 0.104),
                   (0.851, -0.211, -0.481), (-0.402, -0.587, 0.702))


def degree_by_preimages(field, center=(0.0, 0.0, 0.0), radius=1.0, subdivisions=6, targets=DEFAULT_TARGETS):
    """
    Brute-force degree of X/|X| on a sphere: for each target direction y,
    sum the orientation signs of the mesh triangles whose image spherical
    triangle contains y.

    Returns
    -------
    (int, list)
        the most frequent per-target count and all per-target counts
    """
    evaluator = as_evaluator(field)
    mesh = icosphere(subdivisions, center, radius)
    values = evaluator(mesh.vertices)
    norms = np.linalg.norm(values, axis=-1)
    if norms.min() <= 0:
        raise ZeroOnSphere('The field vanishes at a vertex of the preimage-counting mesh')
    v = values / norms[:, None]
    a, b, c = (v[mesh.faces[:, i]] for i in range(3))
    p = mesh.vertices[mesh.faces] - np.asarray(center, dtype=float)
    domain_sign = np.sign(np.einsum('ni,ni->n', p[:, 0], np.cross(p[:, 1], p[:, 2])))
    image_sign = np.sign(np.einsum('ni,ni->n', a, np.cross(b, c)))
    counts = []
    for y in targets:
        y = np.asarray(y, dtype=float)
        y = y / np.linalg.norm(y)
        s1 = np.sign(np.cross(a, b) @ y)
        s2 = np.sign(np.cross(b, c) @ y)
        s3 = np.sign(np.cross(c, a) @ y)
        inside = (s1 == image_sign) & (s2 == image_sign) & (s3 == image_sign) & ((a + b + c) @ y > 0)
        counts.append(int(np.sum(domain_sign[inside] * image_sign[inside])))
    return Counter(counts).most_common(1)[0][0], counts


def _kernel_restriction_sign(phi, hessian):
    """
    For a corank-1 Hessian: (lowest degree, sign of its coefficient) of
    phi restricted to the kernel line.
    """
    k = hessian.kernel()[0]
    s = sympy.Symbol('s')
    expr = sum(sympy.Rational(c.numerator, c.denominator) * (s * k[0]) ** e[0] * (s * k[1]) ** e[1] * (s * k[2]) ** e[2]
               for e, c in phi.terms.items())
    poly = sympy.Poly(sympy.expand(expr), s)
    if poly.is_zero:
        return None, 0
    degree = min(m[0] for m in poly.monoms())
    return degree, int(sympy.sign(poly.coeff_monomial(s ** degree)))


def has_spherical_level_sets(phi, hessian=None):
    """
    Definite Hessian, or corank 1 with a definite rest and an even-order,
    same-signed restriction to the kernel line (A_k, k odd).
    """
    hessian = hessian or hessian_at_origin(phi)
    negative, zero, positive = hessian.inertia()
    if zero == 0:
        return negative == 0 or positive == 0
    if zero == 1 and (negative == 0 or positive == 0):
        degree, sign = _kernel_restriction_sign(phi, hessian)
        if degree is None or degree % 2:
            return False
        return sign == (1 if negative == 0 else -1)
    return False


def beltrami_obstruction(phi, hessian=None):
    """
    One of 'corank2', 'spherical-level-sets', 'nonzero-trace', 'none-found',
    checked in that order.

    The trace obstruction is read up to linear coordinate changes: it fires
    only for a nonzero semidefinite Hessian, whose trace no congruent
    representative can cancel.
    """
    hessian = hessian or hessian_at_origin(phi)
    if hessian.corank == 2:
        return 'corank2'
    if has_spherical_level_sets(phi, hessian):
        return 'spherical-level-sets'
    if not hessian.is_zero and hessian.semidefinite and hessian.trace != 0:
        return 'nonzero-trace'
    return 'none-found'


def beltrami_verdict(phi, obstruction=None):
    """'beltrami' when phi is harmonic, 'not-beltrami' on an obstruction, else 'undetermined'."""
    obstruction = obstruction or beltrami_obstruction(phi)
    if obstruction != 'none-found':
        return 'not-beltrami'
    if laplacian(phi).is_zero:
        return 'beltrami'
    return 'undetermined'


def chirality_verdict(phi, perturbation=None, hessian=None):
    """
    'achiral-spherical' for spherical level sets; 'chiral' when a linear
    perturbation d phi + t nu with a one-signed defect is available (the
    harmonic construction, or a supplied nu checked at t = 1/100);
    'undetermined' otherwise.
    """
    hessian = hessian or hessian_at_origin(phi)
    if has_spherical_level_sets(phi, hessian):
        return 'achiral-spherical'
    dphi = ext_d(DifferentialForm.function(phi))
    if laplacian(phi).is_zero:
        nu = chiral_perturb(phi)
        verdict = contact_defect(dphi + nu * CHIRAL_TEST_T)
        if verdict.sign_verdict == 'positive-semidefinite' and not verdict.zero_samples:
            return 'chiral'
        logger.warning('Harmonic germ %s gave defect verdict %s', phi, verdict.sign_verdict)
    if perturbation is not None:
        verdict = contact_defect(dphi + perturbation * CHIRAL_TEST_T)
        if verdict.sign_verdict in ('positive-semidefinite', 'negative-semidefinite') and not verdict.zero_samples:
            return 'chiral'
    return 'undetermined'


@dataclass
class SingularityReport:
    """
    Per-zero record of a germ analysis.

    Attributes
    ----------
    location : tuple
    hessian : Hessian
    corank : int
    hessian_trace : Fraction
    morse_index : int or 'not-Morse'
    numeric_index : IndexResult
    harmonic : bool
    chirality_verdict : string
    beltrami_obstruction : string
    beltrami_verdict : string
    name : string, optional
    expected_index : int, optional
    """
    phi: Polynomial
    location: tuple
    hessian: Hessian
    corank: int
    hessian_trace: Fraction
    morse_index: object
    numeric_index: IndexResult
    harmonic: bool
    chirality_verdict: str
    beltrami_obstruction: str
    beltrami_verdict: str
    name: str = None
    expected_index: int = None

    @property
    def index_matches_expected(self):
        return self.expected_index is None or self.numeric_index.index == self.expected_index

    def to_json(self):
        return {
            'name': self.name,
            'phi': polynomial_to_json(self.phi),
            'phi_text': str(self.phi),
            'location': list(self.location),
            'hessian': self.hessian.to_json(),
            'corank': self.corank,
            'hessian_trace': f'{self.hessian_trace.numerator}/{self.hessian_trace.denominator}',
            'morse_index': self.morse_index,
            'numeric_index': self.numeric_index.to_json(),
            'expected_index': self.expected_index,
            'harmonic': self.harmonic,
            'laplacian': str(laplacian(self.phi)),
            'chirality_verdict': self.chirality_verdict,
            'beltrami_obstruction': self.beltrami_obstruction,
            'beltrami_verdict': self.beltrami_verdict,
        }


def analyze_germ(phi, radius=1.0, perturbation=None, name=None, expected_index=None, threads=1):
    """Runs every germ check and returns a SingularityReport."""
    hessian = hessian_at_origin(phi)
    index = numeric_index(gradient(phi), radius=radius, threads=threads)
    morse_index = hessian.morse_index
    if morse_index != 'not-Morse' and index.index != (-1) ** morse_index:
        logger.warning('Index %d disagrees with Morse index %d of %s', index.index, morse_index, phi)
    obstruction = beltrami_obstruction(phi, hessian)
    return SingularityReport(
        phi=phi,
        location=(0.0, 0.0, 0.0),
        hessian=hessian,
        corank=hessian.corank,
        hessian_trace=hessian.trace,
        morse_index=morse_index,
        numeric_index=index,
        harmonic=laplacian(phi).is_zero,
        chirality_verdict=chirality_verdict(phi, perturbation, hessian),
        beltrami_obstruction=obstruction,
        beltrami_verdict=beltrami_verdict(phi, obstruction),
        name=name,
        expected_index=expected_index)


def harmonic_part(p):
    """p minus the exact polynomial solution of laplacian(q) = laplacian(p); harmonic."""
    return p - solve_poisson(laplacian(p))


def a2_family(a=Fraction(1, 2), s=0):
    """
    x^3/3 - (1-a) x y^2 - a x z^2 + y^2/2 - z^2/2 - s x: harmonic for every a,
    an A2 fold at s = 0 and two Morse critical points x = +-sqrt(s) for s > 0.
    """
    a, s = Fraction(a), Fraction(s)
    half = Fraction(1, 2)
    return (X ** 3 * Fraction(1, 3) - X * Y * Y * (1 - a) - X * Z * Z * a
            + Y * Y * half - Z * Z * half - X * s)


def fold_germ(s):
    """phi_s = x^2 - y^2 + z (z^2 + s), the fold unfolding."""
    s = Fraction(s)
    return X * X - Y * Y + Z * (Z * Z + s)


def fold_critical_points(s):
    """Critical points of fold_germ(s): none for s > 0, one for s = 0, two for s < 0."""
    s = float(s)
    if s > 0:
        return []
    if s == 0:
        return [(0.0, 0.0, 0.0)]
    z = math.sqrt(-s / 3.0)
    return [(0.0, 0.0, -z), (0.0, 0.0, z)]
