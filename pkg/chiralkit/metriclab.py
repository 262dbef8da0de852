"""
============
metriclab.py
============

Pointwise star operators and compatible metrics. Given a 1-form alpha and a
2-form beta with alpha ^ beta >= 0, ``polar_star`` builds a symmetric
positive semi-definite matrix S with S alpha = beta at a point, through the
polar decomposition of beta restricted to ker alpha. Away from the zeros S
is nondegenerate and comes from the metric g with S = sqrt(det g) g^-1.

Matrices act on coefficient vectors: 1-forms in the dx, dy, dz basis and
2-forms in the dydz, dzdx, dxdy basis.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging

import numpy as np

from chiralkit.exceptions import ContractViolation, WrongSign
from chiralkit.polyform import DifferentialForm, evaluate, ext_d

logger = logging.getLogger(__name__)

TINY = 1e-14


def sqrtm_psd(matrix):
    """Square root of a symmetric matrix by eigendecomposition, eigenvalues clamped at 0."""
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.T))
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def star_from_metric(g):
    """The Hodge star on 1-forms of a metric g: sqrt(det g) g^-1."""
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if det <= 0:
        raise ContractViolation(f'A metric needs a positive determinant, got {det:.3g}')
    return np.sqrt(det) * np.linalg.inv(g)


def metric_from_star(star):
    """Inverse of ``star_from_metric``: g = det(S) S^-1 for nondegenerate S."""
    star = np.asarray(star, dtype=float)
    det = np.linalg.det(star)
    if det <= 0:
        raise ContractViolation(f'A star operator needs a positive determinant, got {det:.3g}')
    return det * np.linalg.inv(star)


def orthonormal_frame(a_hat):
    """
    Orthonormal X1, X2 spanning the plane orthogonal to a_hat, with
    X1 x X2 = a_hat; Gram-Schmidt from the two axes least aligned with a_hat.
    """
    order = np.argsort(np.abs(a_hat), kind='stable')
    basis = []
    for axis in order[:2]:
        v = np.eye(3)[axis]
        v = v - (v @ a_hat) * a_hat
        for u in basis:
            v = v - (v @ u) * u
        basis.append(v / np.linalg.norm(v))
    x1, x2 = basis
    if np.cross(x1, x2) @ a_hat < 0:
        x2 = -x2
    return x1, x2


@dataclass
class PolarStar:
    """
    The pointwise construction and its pieces.

    Attributes
    ----------
    star : numpy.ndarray
        S, symmetric positive semi-definite, with S alpha = beta
    metric : numpy.ndarray or None
        g with star_from_metric(g) = S; None where S is degenerate
    frame : tuple
        X1, X2 spanning ker alpha (empty at a zero of alpha)
    kernel : numpy.ndarray or None
        Y spanning ker beta, oriented so alpha(Y) >= 0
    A, G, F : numpy.ndarray
        beta on the frame and its polar decomposition A = G F
    residual : float
        |S alpha - beta| / max(|beta|, tiny)
    """
    point: tuple
    star: np.ndarray
    metric: np.ndarray = None
    frame: tuple = ()
    kernel: np.ndarray = None
    A: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    G: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    F: np.ndarray = field(default_factory=lambda: np.eye(2))
    residual: float = 0.0

    @property
    def degenerate(self):
        return self.metric is None

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.star)

    def to_json(self):
        return {
            'point': list(self.point),
            'star': self.star.tolist(),
            'metric': None if self.metric is None else self.metric.tolist(),
            'eigenvalues': self.eigenvalues().tolist(),
            'residual': self.residual,
            'degenerate': self.degenerate,
        }


def _vector(form, point, degree):
    if isinstance(form, DifferentialForm):
        if form.degree != degree:
            raise ContractViolation(f'polar_star expects a {degree}-form, got degree {form.degree}')
        return evaluate(form, point)
    return np.asarray(form, dtype=float)


def polar_star(alpha, beta, point, tol=1e-12):
    """
    Builds S with S alpha = beta at ``point``.

    On ker alpha (frame X1, X2) beta restricts to A = [[0, w], [-w, 0]] with
    w = beta . alpha/|alpha|; G = sqrt(A^T A) = |w| I and F = G^-1 A (the
    identity when A = 0). S acts as G on ker alpha and sends alpha to beta:

        S = b b^T / (a . b) + |w| (I - a_hat a_hat^T)

    Parameters
    ----------
    alpha : DifferentialForm or array
        1-form, or its coefficient vector at the point
    beta : DifferentialForm or array
        2-form, or its coefficient vector at the point
    point : tuple
    tol : float
        relative tolerance on alpha ^ beta

    Raises
    ------
    WrongSign
        if (alpha ^ beta)(p) < -tol |alpha| |beta|

    When alpha ^ beta vanishes no semi-definite S sends a nonzero alpha to a
    nonzero beta (alpha . S alpha = 0 forces S alpha = 0). The returned S is
    then the degenerate ker-alpha part, with S alpha = 0 and ``residual``
    reporting the miss; for beta = 0 that is exact.
    """
    a = _vector(alpha, point, 1)
    b = _vector(beta, point, 2)
    point = tuple(float(v) for v in point)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    s = float(a @ b)
    if s < -tol * na * nb:
        raise WrongSign(f'alpha ^ beta = {s:.3g} at {point}; a star with S alpha = beta needs it non-negative')
    if na <= TINY:
        return PolarStar(point, np.zeros((3, 3)), residual=float(nb > TINY))

    a_hat = a / na
    x1, x2 = orthonormal_frame(a_hat)
    w = b @ np.cross(x1, x2)
    A = np.array([[0.0, w], [-w, 0.0]])
    G = sqrtm_psd(A.T @ A)
    F = np.linalg.solve(G, A) if abs(w) > TINY else np.eye(2)
    P = np.column_stack([x1, x2])
    star = P @ G @ P.T
    if s > tol * na * nb:
        star = star + np.outer(b, b) / s
    else:
        logger.debug('alpha ^ beta vanishes at %s; degenerate star', point)
    star = 0.5 * (star + star.T)
    residual = float(np.linalg.norm(star @ a - b) / max(nb, TINY))
    metric = metric_from_star(star) if np.linalg.det(star) > TINY else None
    kernel = b / nb if nb > TINY else None
    return PolarStar(point, star, metric, (x1, x2), kernel, A, G, F, residual)


class PointwiseMetric(object):
    """
    The star operator field of a singular contact form: S(p) = polar_star(eta, d eta, p).
    Records the evaluated points where S degenerates.
    """

    def __init__(self, eta, tol=1e-10):
        self.eta = eta
        self.d_eta = ext_d(eta)
        self.tol = tol
        self.degeneracy_locus = []

    def construction(self, point):
        return polar_star(self.eta, self.d_eta, point)

    def __call__(self, point):
        result = self.construction(point)
        if result.eigenvalues().min() <= self.tol:
            self.degeneracy_locus.append(result.point)
        return result.star

    def check(self, points):
        """Symmetry and semi-definiteness over the points."""
        asymmetry, lowest = 0.0, np.inf
        for p in points:
            star = self(p)
            asymmetry = max(asymmetry, float(np.max(np.abs(star - star.T))))
            lowest = min(lowest, float(np.linalg.eigvalsh(star).min()))
        return {'max_asymmetry': asymmetry, 'min_eigenvalue': lowest,
                'symmetric': asymmetry <= 1e-12, 'positive_semidefinite': lowest >= -self.tol,
                'degenerate_points': [list(p) for p in self.degeneracy_locus]}


def continuity_profile(metric, start, end, n=100, h=1e-6):
    """
    Smoke test of continuity along the segment start -> end: successive star
    matrices differ by less than 10 x spacing x a local Lipschitz estimate.
    """
    start, end = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    path = start + np.linspace(0.0, 1.0, n)[:, None] * (end - start)
    spacing = float(np.linalg.norm(end - start)) / (n - 1)
    stars = [metric(p) for p in path]
    lipschitz = []
    for p, star in zip(path, stars):
        lipschitz.append(max(np.linalg.norm(metric(p + h * e) - star) / h for e in np.eye(3)))
    jumps = [float(np.linalg.norm(b - a)) for a, b in zip(stars, stars[1:])]
    bounds = [10.0 * spacing * max(lipschitz[i], lipschitz[i + 1]) + 1e-12 for i in range(n - 1)]
    return {'jumps': jumps, 'bounds': bounds, 'passed': all(j < b for j, b in zip(jumps, bounds))}


def morse_normal_form(t, point):
    """eta_t and d eta_t coefficient vectors for eta_t = (x + t yz) dx + (y - t xz) dy - 2z dz."""
    x, y, z = point
    eta = np.array([x + t * y * z, y - t * x * z, -2.0 * z])
    d_eta = t * np.array([x, y, -2.0 * z])
    return eta, d_eta


def morse_cometric_matrix(t, point):
    """
    B = [[1, 0, t y/2], [0, 1, -t x/2], [t y/2, -t x/2, 1 + t^2 (x^2 + y^2)/4]].

    det B = 1 and B eta_t = grad phi, so the metric g_t = t^2 B^-1 (cometric
    t^-2 B) has star t B and sends eta_t to d eta_t.
    """
    x, y, _ = point
    return np.array([[1.0, 0.0, t * y / 2],
                     [0.0, 1.0, -t * x / 2],
                     [t * y / 2, -t * x / 2, 1.0 + t * t * (x * x + y * y) / 4]])


def morse_metric(t, point):
    """g_t = t^2 B^-1; the flat metric when t = 0."""
    if t == 0:
        return np.eye(3)
    return t * t * np.linalg.inv(morse_cometric_matrix(t, point))


@dataclass
class MetricCheckReport:
    t: float
    points: int
    max_relative_error: float
    min_eigenvalue: float
    failures: list

    @property
    def passed(self):
        return not self.failures

    def to_json(self):
        return {
            't': self.t,
            'points': self.points,
            'max_relative_error': self.max_relative_error,
            'min_eigenvalue': self.min_eigenvalue,
            'failures': self.failures,
            'passed': self.passed,
        }


def verify_compatible_metric_morse(t, points, rtol=1e-8):
    """
    Checks *_{g_t} eta_t = d eta_t and positive-definiteness of g_t at every point.

    Meaningful for t > 0 only. At t = 0, eta_0 = d phi is not contact and
    d eta_0 = 0, so the error is the absolute |eta_0| and every point away
    from the origin is reported as a failure.

    Returns
    -------
    MetricCheckReport
        failures list the offending points with their error and eigenvalues
    """
    t = float(Fraction(t)) if not isinstance(t, float) else t
    failures, worst, lowest = [], 0.0, np.inf
    for p in np.atleast_2d(np.asarray(points, dtype=float)):
        g = morse_metric(t, p)
        eigenvalues = np.linalg.eigvalsh(g)
        eta, d_eta = morse_normal_form(t, p)
        star = star_from_metric(g)
        scale = np.linalg.norm(d_eta)
        error = np.linalg.norm(star @ eta - d_eta)
        relative = float(error / scale) if scale > TINY else float(error)
        worst = max(worst, relative)
        lowest = min(lowest, float(eigenvalues.min()))
        if relative >= rtol or eigenvalues.min() <= 0:
            failures.append({'point': p.tolist(), 'relative_error': relative, 'eigenvalues': eigenvalues.tolist()})
    if failures:
        logger.info('Compatible metric check at t = %g failed at %d points', t, len(failures))
    return MetricCheckReport(t, len(np.atleast_2d(points)), worst, lowest, failures)
