"""
============
chirality.py
============

The contact side of a germ: the contact defect eta ^ d eta, the linear
chiral perturbation of a harmonic gradient, the Beltrami power series and
Reeb-like kernel fields.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging

import numpy as np

from chiralkit.exceptions import ContractViolation, IndefiniteDefect, NotHarmonic
from chiralkit.mesh import icosphere
from chiralkit.polyform import (DifferentialForm, PolyVectorField, _require_degree, evaluate,
                                evaluate_many, ext_d, form_to_json, hodge_euclid, laplacian,
                                poincare_homotopy, polynomial_to_json, solve_poisson, wedge)

logger = logging.getLogger(__name__)

SIGN_VERDICTS = ('positive-semidefinite', 'negative-semidefinite', 'indefinite', 'zero')
SAMPLE_RADII = (0.25, 0.5, 1.0)
DEFECT_TOLERANCE = 1e-10


@dataclass
class ContactDefect:
    """
    The function f with eta ^ d eta = f dx^dy^dz and its sign verdict.

    ``certified`` is true when the verdict was read off the polynomial
    (every monomial an even power product, one-signed coefficients);
    otherwise it comes from sphere sampling and ``zero_samples`` lists
    sampled points where |f| <= tolerance.
    """
    defect: object
    sign_verdict: str
    certified: bool = False
    zero_samples: list = field(default_factory=list)
    sampled_min: float = None
    sampled_max: float = None

    @property
    def one_signed(self):
        return self.sign_verdict != 'indefinite'

    def to_json(self):
        return {
            'defect': polynomial_to_json(self.defect),
            'defect_text': str(self.defect),
            'sign_verdict': self.sign_verdict,
            'certified': self.certified,
            'zero_samples': [list(map(float, p)) for p in self.zero_samples],
            'sampled_min': self.sampled_min,
            'sampled_max': self.sampled_max,
        }


def defect_polynomial(eta):
    _require_degree(eta, 1, 'contact_defect')
    return wedge(eta, ext_d(eta)).components[0]


def _syntactic_sign(p):
    """'positive-semidefinite' / 'negative-semidefinite' when p is a one-signed sum of even monomials."""
    if not all(e % 2 == 0 for exponents in p.terms for e in exponents):
        return None
    signs = {c > 0 for c in p.terms.values()}
    if signs == {True}:
        return 'positive-semidefinite'
    if signs == {False}:
        return 'negative-semidefinite'
    return None


def sample_points(radii=SAMPLE_RADII, subdivisions=4):
    """Icosphere vertices (2562 per sphere at level 4) on every radius, stacked."""
    unit = icosphere(subdivisions).vertices
    return np.concatenate([r * unit for r in radii])


def contact_defect(eta, radii=SAMPLE_RADII, subdivisions=4, tol=DEFECT_TOLERANCE):
    """
    Computes the exact defect of a polynomial 1-form and classifies its sign.

    Parameters
    ----------
    eta : chiralkit.polyform.DifferentialForm
        A 1-form
    radii : tuple
        Sampling sphere radii, used when no exact certificate applies
    subdivisions : int
        Icosphere level of each sampling sphere
    tol : float
        Values with |f| <= tol count as zero

    Returns
    -------
    ContactDefect
    """
    f = defect_polynomial(eta)
    if f.is_zero:
        return ContactDefect(f, 'zero', certified=True)
    verdict = _syntactic_sign(f)
    if verdict:
        return ContactDefect(f, verdict, certified=True)

    points = sample_points(radii, subdivisions)
    values = f.evaluate_many(points)
    low, high = float(values.min()), float(values.max())
    zeros = [tuple(p) for p in points[np.abs(values) <= tol][:20]]
    if low >= -tol and high > tol:
        verdict = 'positive-semidefinite'
    elif high <= tol and low < -tol:
        verdict = 'negative-semidefinite'
    elif low >= -tol and high <= tol:
        verdict = 'zero'
    else:
        verdict = 'indefinite'
    logger.debug('Sampled defect on %d points: min %g, max %g', len(points), low, high)
    return ContactDefect(f, verdict, False, zeros, low, high)


def _require_harmonic(phi):
    if not laplacian(phi).is_zero:
        raise NotHarmonic(f'{phi} is not harmonic: laplacian is {laplacian(phi)}')


def chiral_perturb(phi):
    """
    The 1-form nu = H(*d phi) with d nu = *d phi exactly, so that
    d phi + t nu has defect t |grad phi|^2 + t^2 nu . grad phi.

    Raises
    ------
    NotHarmonic
        if laplacian(phi) != 0
    """
    _require_harmonic(phi)
    return poincare_homotopy(hodge_euclid(ext_d(DifferentialForm.function(phi))))


def coulomb_gauge(nu):
    """
    Adds the exact form d psi with laplacian(psi) = -div(nu), returning a
    co-closed 1-form with the same exterior derivative.
    """
    divergence = PolyVectorField.from_one_form(nu).divergence()
    if divergence.is_zero:
        return nu
    return nu + ext_d(DifferentialForm.function(solve_poisson(-divergence)))


@dataclass
class BeltramiSeries:
    """
    eta = d phi + sum_{j=1..K} t^j nu_j with d nu_{j+1} = *nu_j (nu_0 = d phi).

    Attributes
    ----------
    phi : Polynomial
    terms : list
        nu_1 .. nu_K
    t : Fraction
    gauge : bool
        whether each primitive was put in Coulomb gauge
    """
    phi: object
    terms: list
    t: Fraction
    gauge: bool = True

    @property
    def K(self):
        return len(self.terms)

    def eta(self, order=None):
        order = self.K if order is None else order
        eta = ext_d(DifferentialForm.function(self.phi))
        for j, nu in enumerate(self.terms[:order], start=1):
            eta = eta + nu * (self.t ** j)
        return eta

    def residual(self):
        """d eta - t * eta, computed exactly."""
        eta = self.eta()
        return ext_d(eta) - hodge_euclid(eta) * self.t

    def expected_residual(self):
        """The closed form of the residual: -t^(K+1) * nu_K."""
        return hodge_euclid(self.terms[-1]) * (-(self.t ** (self.K + 1)))

    def recursion_holds(self):
        """d nu_{j+1} == *nu_j for every j, as exact identities."""
        previous = ext_d(DifferentialForm.function(self.phi))
        for nu in self.terms:
            if ext_d(nu) != hodge_euclid(previous):
                return False
            previous = nu
        return True

    def to_json(self):
        return {
            'phi': polynomial_to_json(self.phi),
            'phi_text': str(self.phi),
            't': f'{self.t.numerator}/{self.t.denominator}',
            'K': self.K,
            'gauge': self.gauge,
            'terms': [form_to_json(nu) for nu in self.terms],
            'eta': form_to_json(self.eta()),
        }


def beltrami_series(phi, t=Fraction(1, 10), K=4, gauge=True):
    """
    Builds the Beltrami power series of a harmonic germ.

    nu_{j+1} = H(*nu_j), put in Coulomb gauge when ``gauge`` is true so that
    every *nu_j stays closed. Without the gauge the iteration stops with
    NotClosed as soon as some *nu_j is not closed (the Morse germ x^2/2 +
    y^2/2 - z^2 does so at the third term).

    Raises
    ------
    NotHarmonic
        if laplacian(phi) != 0
    NotClosed
        from the homotopy operator when *nu_j is not closed
    ContractViolation
        on K < 1 or t outside (0, 1)
    """
    t = Fraction(t)
    if K < 1:
        raise ContractViolation(f'beltrami_series needs K >= 1, got {K}')
    if not 0 < t < 1:
        raise ContractViolation(f'beltrami_series needs 0 < t < 1, got {t}')
    _require_harmonic(phi)
    previous = ext_d(DifferentialForm.function(phi))
    terms = []
    for j in range(K):
        nu = poincare_homotopy(hodge_euclid(previous))
        if gauge:
            nu = coulomb_gauge(nu)
        terms.append(nu)
        previous = nu
        logger.debug('Beltrami term %d has degree %d', j + 1, max(c.degree for c in nu.components))
    return BeltramiSeries(phi, terms, t, gauge)


def series_residual(series):
    """
    The exact residual d eta - t * eta of a series. Equal to
    -t^(K+1) * nu_K; see ``BeltramiSeries.expected_residual``.
    """
    return series.residual()


def sup_residual(series, points):
    """max |d eta - t * eta| over the given points (Euclidean norm of the 2-form proxy)."""
    return float(np.max(np.linalg.norm(evaluate_many(series.residual(), points), axis=-1)))


def beltrami_defect_deviation(series, points):
    """
    Compares the defect of eta with t |eta|^2 at the points (a Beltrami
    field is a singular contact form with defect t |eta|^2).

    Returns
    -------
    float
        the largest relative deviation over points where eta != 0
    """
    eta = series.eta()
    defect = defect_polynomial(eta).evaluate_many(points)
    norm2 = np.sum(evaluate_many(eta, points) ** 2, axis=-1)
    expected = float(series.t) * norm2
    mask = norm2 > 1e-14
    return float(np.max(np.abs(defect[mask] - expected[mask]) / expected[mask]))


def reeb_like(eta):
    """
    The Reeb-like direction W of a singular contact form: the vector proxy of
    *d eta. Then i_W d eta = 0 and i_W eta equals the defect, exactly.

    Raises
    ------
    IndefiniteDefect
        if the defect changes sign
    """
    verdict = contact_defect(eta)
    if verdict.sign_verdict == 'indefinite':
        raise IndefiniteDefect(f'The defect {verdict.defect} changes sign; eta is not a singular contact form')
    return PolyVectorField(*ext_d(eta).components)


def origin_derivative_vanishes(eta):
    """True when d eta is zero at the origin."""
    return bool(np.all(evaluate(ext_d(eta), (0, 0, 0)) == 0.0))
