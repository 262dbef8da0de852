"""
=========
fields.py
=========

Closed-form field families with analytic derivatives: ABC fields on the
3-torus, the singular Lutz twist family on the solid torus, and the
tangent-boundary example on T^2 x [0, 1].

Fields are sums of terms

    c * x^a * y^b * z^e * T_x(k_x x) * T_y(k_y y) * T_z(k_z z)

with each T one of 1, sin, cos. The set is closed under differentiation and
under products (via product-to-sum), so jacobians and curls are exact
expressions rather than finite differences.
"""

from dataclasses import dataclass, field as dataclass_field
import itertools
import logging
import math

import numpy as np

from chiralkit.polyform import DifferentialForm, PolyVectorField, Polynomial
from chiralkit.util import ordered_map

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_NO_TRIG = ('1', 0.0)


def _normalize_factor(kind, k, coefficient):
    """Canonical (kind, k) for one trig factor, folding the sign of k into the coefficient."""
    if kind == '1' or k == 0:
        if kind == 'sin':
            return None, 0.0
        return _NO_TRIG, coefficient
    if k < 0:
        if kind == 'sin':
            coefficient = -coefficient
        k = -k
    return (kind, float(k)), coefficient


@dataclass(frozen=True)
class Term:
    """One summand of an Expression."""
    coefficient: float
    powers: tuple = (0, 0, 0)
    trig: tuple = (_NO_TRIG, _NO_TRIG, _NO_TRIG)

    @property
    def key(self):
        return (self.powers, self.trig)

    def values(self, points):
        result = np.full(points.shape[0], self.coefficient)
        for axis in range(3):
            if self.powers[axis]:
                result = result * points[:, axis] ** self.powers[axis]
            kind, k = self.trig[axis]
            if kind == 'sin':
                result = result * np.sin(k * points[:, axis])
            elif kind == 'cos':
                result = result * np.cos(k * points[:, axis])
        return result

    def derivative(self, axis):
        out = []
        p = self.powers[axis]
        if p:
            powers = list(self.powers)
            powers[axis] -= 1
            out.append(Term(self.coefficient * p, tuple(powers), self.trig))
        kind, k = self.trig[axis]
        if kind in ('sin', 'cos'):
            trig = list(self.trig)
            if kind == 'sin':
                trig[axis] = ('cos', k)
                out.append(Term(self.coefficient * k, self.powers, tuple(trig)))
            else:
                trig[axis] = ('sin', k)
                out.append(Term(-self.coefficient * k, self.powers, tuple(trig)))
        return out

    def __mul__(self, other):
        """Product of two terms as a list of terms (product-to-sum on shared axes)."""
        powers = tuple(a + b for a, b in zip(self.powers, other.powers))
        per_axis = []
        for (k1, f1), (k2, f2) in zip(self.trig, other.trig):
            per_axis.append(_multiply_factors(k1, f1, k2, f2))
        out = []
        for choice in itertools.product(*per_axis):
            coefficient = self.coefficient * other.coefficient
            trig = []
            for factor, weight in choice:
                if factor is None:
                    coefficient = 0.0
                    break
                coefficient *= weight
                trig.append(factor)
            if coefficient != 0.0:
                out.append(Term(coefficient, powers, tuple(trig)))
        return out


def _multiply_factors(kind1, k1, kind2, k2):
    """Expansion of T1(k1 v) * T2(k2 v) as [(factor, weight), ...]."""
    if kind1 == '1':
        return [((kind2, k2), 1.0)]
    if kind2 == '1':
        return [((kind1, k1), 1.0)]
    if kind1 == 'cos' and kind2 == 'sin':
        return _multiply_factors(kind2, k2, kind1, k1)
    if kind1 == 'sin' and kind2 == 'sin':
        pieces = [('cos', k1 - k2, 0.5), ('cos', k1 + k2, -0.5)]
    elif kind1 == 'cos' and kind2 == 'cos':
        pieces = [('cos', k1 - k2, 0.5), ('cos', k1 + k2, 0.5)]
    else:
        pieces = [('sin', k1 + k2, 0.5), ('sin', k1 - k2, 0.5)]
    out = []
    for kind, k, weight in pieces:
        factor, weight = _normalize_factor(kind, k, weight)
        out.append((factor, weight))
    return out


class Expression(object):
    """An immutable sum of Terms with like terms combined."""
    __slots__ = ('terms',)

    def __init__(self, terms=()):
        combined = {}
        for term in terms:
            trig = []
            coefficient = term.coefficient
            for kind, k in term.trig:
                factor, coefficient = _normalize_factor(kind, k, coefficient)
                if factor is None:
                    coefficient = 0.0
                    break
                trig.append(factor)
            if coefficient == 0.0:
                continue
            key = (tuple(term.powers), tuple(trig))
            combined[key] = combined.get(key, 0.0) + coefficient
        self.terms = tuple(Term(c, powers, trig) for (powers, trig), c in sorted(combined.items()) if c != 0.0)

    @classmethod
    def constant(cls, c):
        return cls([Term(float(c))])

    @classmethod
    def coordinate(cls, axis):
        powers = [0, 0, 0]
        powers[axis] = 1
        return cls([Term(1.0, tuple(powers))])

    @classmethod
    def sin(cls, axis, k=1.0):
        trig = [_NO_TRIG] * 3
        trig[axis] = ('sin', float(k))
        return cls([Term(1.0, (0, 0, 0), tuple(trig))])

    @classmethod
    def cos(cls, axis, k=1.0):
        trig = [_NO_TRIG] * 3
        trig[axis] = ('cos', float(k))
        return cls([Term(1.0, (0, 0, 0), tuple(trig))])

    @classmethod
    def from_polynomial(cls, p):
        return cls([Term(float(c), e) for e, c in p.terms.items()])

    def _coerce(self, other):
        return other if isinstance(other, Expression) else Expression.constant(other)

    def __add__(self, other):
        return Expression(self.terms + self._coerce(other).terms)

    __radd__ = __add__

    def __neg__(self):
        return Expression([Term(-t.coefficient, t.powers, t.trig) for t in self.terms])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return Expression([piece for a in self.terms for b in other.terms for piece in a * b])

    __rmul__ = __mul__

    def diff(self, axis):
        return Expression([piece for t in self.terms for piece in t.derivative(axis)])

    def values(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        result = np.zeros(points.shape[0])
        for term in self.terms:
            result += term.values(points)
        return result

    @property
    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f'Expression({len(self.terms)} terms)'


@dataclass(frozen=True)
class Domain:
    """
    Where a field lives. Periodic axes carry their period; ``radius`` bounds
    the ball (``ball``) or the disk factor (``solid-torus``); ``z_range``
    bounds slabs.
    """
    kind: str = 'space'
    radius: float = math.inf
    periods: tuple = (None, None, None)
    z_range: tuple = (-math.inf, math.inf)

    def delta(self, a, b):
        """Minimal-image displacement a - b, broadcasting over leading axes."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        d = np.array(d, copy=True)
        for axis, period in enumerate(self.periods):
            if period:
                d[..., axis] = (d[..., axis] + period / 2.0) % period - period / 2.0
        return d

    def wrap(self, points):
        """Maps periodic coordinates into [0, period)."""
        points = np.array(points, dtype=float, copy=True)
        for axis, period in enumerate(self.periods):
            if period:
                points[..., axis] = points[..., axis] % period
        return points

    def margin(self, point):
        """Positive inside the domain, negative outside."""
        point = np.asarray(point, dtype=float)
        if self.kind == 'ball':
            return self.radius - float(np.linalg.norm(point))
        if self.kind == 'solid-torus':
            return self.radius - float(np.hypot(point[0], point[1]))
        if self.kind == 'slab':
            return float(min(point[2] - self.z_range[0], self.z_range[1] - point[2]))
        return math.inf


SPACE = Domain()
TORUS3 = Domain('torus', periods=(TWO_PI, TWO_PI, TWO_PI))


def ball(radius=1.0):
    return Domain('ball', radius=float(radius))


def solid_torus(radius=1.0):
    return Domain('solid-torus', radius=float(radius), periods=(None, None, TWO_PI))


SLAB = Domain('slab', periods=(TWO_PI, TWO_PI, None), z_range=(0.0, 1.0))


class FieldEvaluator(object):
    """
    A closed-form vector field or 1-form on a domain with exact derivative
    expressions.

    Attributes
    ----------
    components : tuple of Expression
        x, y, z components (coefficients of d/dx.. or dx..)
    kind : string
        'vector' or '1-form'
    domain : Domain
        where the field is defined
    name : string
        label used in reports
    singular_points : tuple
        known zeros, when the family provides them in closed form
    """

    def __init__(self, components, kind='vector', domain=SPACE, name='', singular_points=()):
        self.components = tuple(c if isinstance(c, Expression) else Expression.constant(c) for c in components)
        self.kind = kind
        self.domain = domain
        self.name = name
        self.singular_points = tuple(tuple(float(v) for v in p) for p in singular_points)
        self.partials = tuple(tuple(c.diff(j) for j in range(3)) for c in self.components)

    @classmethod
    def from_polynomials(cls, components, kind='vector', domain=SPACE, name=''):
        return cls([Expression.from_polynomial(p) for p in components], kind, domain, name)

    def __call__(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([c.values(points) for c in self.components], axis=-1)

    values = __call__

    def jacobian(self, points):
        """J[n, i, j] = d F_i / d x_j at each point, shape (N, 3, 3)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([np.stack([p.values(points) for p in row], axis=-1) for row in self.partials], axis=-2)

    def divergence(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return sum(self.partials[i][i].values(points) for i in range(3))

    def curl(self):
        """The curl as a new evaluator (for a 1-form: the vector proxy of its exterior derivative)."""
        (_, fxy, fxz), (fyx, _, fyz), (fzx, fzy, _) = self.partials
        return FieldEvaluator([fzy - fyz, fxz - fzx, fyx - fxy], 'vector', self.domain,
                              f'curl {self.name}'.strip(), self.singular_points)

    def defect(self, points):
        """Contact defect F . curl F (eta ^ d eta over dx^dy^dz for a 1-form)."""
        return np.sum(self(points) * self.curl()(points), axis=-1)

    def reeb_like(self):
        """Euclidean kernel direction of d eta: the curl of the 1-form, unnormalized."""
        reeb = self.curl()
        reeb.name = f'reeb {self.name}'.strip()
        return reeb

    def __repr__(self):
        return f'<FieldEvaluator {self.name or "unnamed"} ({self.kind}, {self.domain.kind})>'


def as_evaluator(obj, domain=SPACE, name=''):
    """Accepts a FieldEvaluator, a PolyVectorField or a polynomial 1-form."""
    if isinstance(obj, FieldEvaluator):
        return obj
    if isinstance(obj, PolyVectorField):
        return FieldEvaluator.from_polynomials(obj.components, 'vector', domain, name)
    if isinstance(obj, DifferentialForm) and obj.degree == 1:
        return FieldEvaluator.from_polynomials(obj.components, '1-form', domain, name)
    if isinstance(obj, Polynomial):
        return FieldEvaluator.from_polynomials([obj.diff(i) for i in range(3)], 'vector', domain, name)
    raise TypeError(f'Cannot build a field evaluator from {type(obj).__name__}')


def finite_difference_jacobian(evaluator, points, h=1e-5):
    """Central-difference jacobian, same layout as FieldEvaluator.jacobian."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    columns = []
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        columns.append((evaluator(points + step) - evaluator(points - step)) / (2 * h))
    return np.stack(columns, axis=-1)


def sphere_grid(center, radius, n_theta, n_phi, rows=None):
    """
    Midpoint latitude-longitude grid: points and the two parameter tangents,
    each of shape (n_rows, n_phi, 3).
    """
    rows = range(n_theta) if rows is None else rows
    theta = (np.asarray(list(rows), dtype=float) + 0.5) * math.pi / n_theta
    phi = (np.arange(n_phi) + 0.5) * TWO_PI / n_phi
    th, ph = np.meshgrid(theta, phi, indexing='ij')
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    points = np.asarray(center, dtype=float) + radius * np.stack([st * cp, st * sp, ct], axis=-1)
    d_theta = radius * np.stack([ct * cp, ct * sp, -st], axis=-1)
    d_phi = radius * np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
    return points, d_theta, d_phi


def gauss_degree(field, center, radius, n_theta=200, n_phi=400, threads=1, chunk=25):
    """
    Raw degree of v = X/|X| on a sphere by midpoint quadrature of
    (1/4pi) * integral of v . (v_theta x v_phi).

    Rows are integrated in chunks and summed in row order, so the result
    does not depend on ``threads``.

    Returns
    -------
    (float, float, float)
        raw degree, min |X| and max |X| over the grid
    """
    field = as_evaluator(field)

    def integrate_rows(rows):
        points, d_theta, d_phi = sphere_grid(center, radius, n_theta, n_phi, rows)
        flat = points.reshape(-1, 3)
        values = field(flat)
        jac = field.jacobian(flat)
        norms = np.linalg.norm(values, axis=-1)
        safe = np.where(norms > 0, norms, 1.0)
        v = values / safe[:, None]

        def tangent(d):
            dv = np.einsum('nij,nj->ni', jac, d.reshape(-1, 3))
            dv = dv - v * np.sum(v * dv, axis=-1, keepdims=True)
            return dv / safe[:, None]

        integrand = np.sum(v * np.cross(tangent(d_theta), tangent(d_phi)), axis=-1)
        return float(np.sum(integrand)), float(norms.min()), float(norms.max())

    blocks = [range(start, min(start + chunk, n_theta)) for start in range(0, n_theta, chunk)]
    results = ordered_map(integrate_rows, blocks, threads)
    total = sum(r[0] for r in results)
    area = (math.pi / n_theta) * (TWO_PI / n_phi)
    return total * area / (4.0 * math.pi), min(r[1] for r in results), max(r[2] for r in results)


# ABC fields

def abc_field(A, B, C):
    """
    The ABC field (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)
    on the 3-torus; a curl eigenfield with eigenvalue 1.
    """
    sin, cos = Expression.sin, Expression.cos
    components = [A * sin(2) + C * cos(1),
                  B * sin(0) + A * cos(2),
                  C * sin(1) + B * cos(0)]
    return FieldEvaluator(components, 'vector', TORUS3, f'abc({A:g},{B:g},{C:g})')


@dataclass
class AbcZero:
    location: tuple
    eigenvalues: tuple
    morse_index: object
    index: int
    degenerate: bool

    def to_json(self):
        return {
            'location': list(self.location),
            'eigenvalues': list(self.eigenvalues),
            'morse_index': self.morse_index,
            'index': self.index,
            'degenerate': self.degenerate,
        }


@dataclass
class ZeroCurve:
    """A curve of non-isolated zeros, sampled by continuation; it carries no index."""
    points: np.ndarray
    closed: bool
    length: float

    def to_json(self):
        return {
            'start': self.points[0].tolist(),
            'samples': int(len(self.points)),
            'length': self.length,
            'closed': self.closed,
        }


@dataclass
class AbcClassification:
    A: float
    B: float
    C: float
    zeros: list = dataclass_field(default_factory=list)
    regime: str = 'nonsingular'
    tightness: str = 'tight'
    seeds: int = 0
    diverged: int = 0
    zero_curves: list = dataclass_field(default_factory=list)

    @property
    def index_sum(self):
        return sum(z.index for z in self.zeros)

    def to_json(self):
        return {
            'A': self.A, 'B': self.B, 'C': self.C,
            'B2_plus_C2': self.B ** 2 + self.C ** 2,
            'regime': self.regime,
            'tightness': self.tightness,
            'zero_count': len(self.zeros),
            'index_sum': self.index_sum,
            'zeros': [z.to_json() for z in self.zeros],
            'zero_curves': [c.to_json() for c in self.zero_curves],
            'seeds': self.seeds,
            'diverged_seeds': self.diverged,
        }


def newton_zeros(field, seeds, tol=1e-12, max_iter=50):
    """
    Batched Newton iteration (pseudo-inverse steps) from every seed.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        final points and a mask of seeds whose residual reached ``tol``
    """
    points = np.array(seeds, dtype=float, copy=True)
    active = np.ones(points.shape[0], dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        current = points[active]
        values = field(current)
        steps = np.einsum('nij,nj->ni', np.linalg.pinv(field.jacobian(current)), values)
        current = current - steps
        points[active] = current
        residual = np.linalg.norm(field(current), axis=-1)
        step_size = np.linalg.norm(steps, axis=-1)
        still = ~((residual <= tol) & (step_size < 1e-13)) & np.isfinite(residual)
        indices = np.flatnonzero(active)
        active[indices[~still]] = False
    residual = np.linalg.norm(field(points), axis=-1)
    return points, np.isfinite(residual) & (residual <= tol)


def dedupe_points(points, domain, distance=1e-6):
    """Keeps the first of every group of points closer than ``distance`` (minimal image)."""
    kept = []
    for p in domain.wrap(points):
        if all(np.linalg.norm(domain.delta(p, q)) >= distance for q in kept):
            kept.append(p)
    return kept


def _null_direction(field, point):
    direction = np.linalg.svd(field.jacobian(point)[0])[2][-1]
    return direction if direction[np.argmax(np.abs(direction))] > 0 else -direction


def _on_zero_curve(field, point, direction, delta=1e-3, tol=1e-12):
    """Newton from both sides along the null direction lands on other zeros, not back on ``point``."""
    guesses = np.array([point + delta * direction, point - delta * direction])
    found, converged = newton_zeros(field, guesses, tol)
    distances = np.linalg.norm(field.domain.delta(found, point), axis=-1)
    return bool(converged.all() and (distances > 0.5 * delta).all())


def trace_zero_curve(field, start, step=0.05, max_steps=2000, tol=1e-12):
    """
    Follows a curve of zeros through ``start``: a predictor step along the
    jacobian's null direction, then a Newton correction. Stops when the curve
    closes up (modulo the domain's periods) or a correction fails.

    Returns
    -------
    ZeroCurve
    """
    start = np.asarray(start, dtype=float)
    branches = []
    closed = False
    for sign in (1.0, -1.0):
        point, direction = start, sign * _null_direction(field, start)
        branch = []
        for _ in range(max_steps):
            corrected, converged = newton_zeros(field, (point + step * direction)[None, :], tol)
            if not converged[0]:
                break
            following = _null_direction(field, corrected[0])
            direction = following if following @ direction >= 0 else -following
            point = corrected[0]
            branch.append(point)
            if len(branch) > 2 and np.linalg.norm(field.domain.delta(point, start)) < 0.75 * step:
                closed = True
                break
        branches.append(branch)
        if closed:
            break
    backward = branches[1][::-1] if len(branches) > 1 else []
    points = np.array(backward + [start] + branches[0])
    length = float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=-1)))
    if closed:
        length += float(np.linalg.norm(field.domain.delta(points[-1], start)))
    return ZeroCurve(points, closed, length)


def abc_classify(A, B, C, seeds_per_axis=16, tol=1e-12, max_iter=50, degenerate_tol=1e-6, curve_step=0.05):
    """
    Finds and classifies the zeros of the ABC field in one periodic cell.

    Newton is seeded on a seeds_per_axis^3 grid; converged points are
    deduplicated modulo the 2pi lattice. Morse indices come from the
    signature of the symmetric part of the jacobian; degenerate zeros get
    their index from the degree on a small sphere. Zeros that are not
    isolated (Newton along the jacobian's null direction finds more zeros)
    are traced into ``zero_curves`` and left out of ``zeros`` and the index sum.
    """
    field = abc_field(A, B, C)
    axis = np.arange(seeds_per_axis) * TWO_PI / seeds_per_axis
    seeds = np.stack(np.meshgrid(axis, axis, axis, indexing='ij'), axis=-1).reshape(-1, 3)
    points, converged = newton_zeros(field, seeds, tol, max_iter)
    for i in np.flatnonzero(~converged):
        logger.debug('NewtonDivergence: seed %s did not converge', seeds[i].tolist())
    diverged = int((~converged).sum())
    if diverged:
        logger.info('%d of %d Newton seeds did not converge', diverged, len(seeds))

    zeros, curves = [], []
    for location in dedupe_points(points[converged], field.domain):
        jac = field.jacobian(location)[0]
        if np.linalg.svd(jac, compute_uv=False).min() < degenerate_tol:
            if any(np.linalg.norm(field.domain.delta(curve.points, location), axis=-1).min() < curve_step
                   for curve in curves):
                continue
            if _on_zero_curve(field, location, _null_direction(field, location), tol=tol):
                curves.append(trace_zero_curve(field, location, curve_step, tol=tol))
                continue
        symmetric = 0.5 * (jac + jac.T)
        eigenvalues = np.sort(np.linalg.eigvalsh(symmetric))
        degenerate = bool(np.min(np.abs(eigenvalues)) < degenerate_tol)
        if degenerate:
            raw, _, _ = gauss_degree(field, location, 0.05, 64, 128)
            index = int(round(raw))
            morse_index = 'not-Morse'
        else:
            morse_index = int(np.sum(eigenvalues < 0))
            index = int(round(np.sign(np.linalg.det(jac))))
        zeros.append(AbcZero(tuple(float(v) for v in location), tuple(float(v) for v in eigenvalues),
                             morse_index, index, degenerate))
    zeros.sort(key=lambda z: z.location)

    if curves:
        logger.info('%d zero curves: the zeros of abc(%g,%g,%g) are not isolated', len(curves), A, B, C)

    s = B ** 2 + C ** 2
    if not zeros and not curves:
        regime = 'nonsingular'
    elif abs(s - 1.0) <= 1e-9 or curves or all(z.degenerate for z in zeros):
        regime = 'degenerate-boundary'
    else:
        regime = 'singular'
    tightness = 'tight' if s <= 1.0 + 1e-12 else 'overtwisted'
    return AbcClassification(A, B, C, zeros, regime, tightness, len(seeds), diverged, curves)


# The singular Lutz twist family

def lutz_core_zeros(s):
    """Singular points of eta_s: x = y = 0 and cos z = 2s, with z in (-pi, pi]."""
    if abs(2 * s) > 1:
        return []
    z = math.acos(max(-1.0, min(1.0, 2 * s)))
    if z == 0.0 or z == math.pi:
        return [(0.0, 0.0, z)]
    return [(0.0, 0.0, -z), (0.0, 0.0, z)]


def lutz_family(s, t):
    """
    eta_s = f dz + x dx - y dy + t (f (x dy - y dx) + 2 x y dz), f = s - cos(z)/2,
    on the solid torus D^2 x S^1.
    """
    x, y = Expression.coordinate(0), Expression.coordinate(1)
    f = s - 0.5 * Expression.cos(2)
    components = [x - t * f * y,
                  -1.0 * y + t * f * x,
                  f + 2.0 * t * x * y]
    return FieldEvaluator(components, '1-form', solid_torus(1.0), f'lutz(s={s:g},t={t:g})', lutz_core_zeros(s))


def lutz_defect_closed_form(s, t, points):
    """2t (f^2 + (1 - sin(z)/4) x^2 + (1 + sin(z)/4) y^2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    f = s - 0.5 * np.cos(z)
    return 2 * t * (f ** 2 + (1 - 0.25 * np.sin(z)) * x ** 2 + (1 + 0.25 * np.sin(z)) * y ** 2)


def _smoothstep(u):
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def lutz_h_profile(r, inner=0.2, outer=0.8):
    """
    The twisting profile (h1, h2) of eta_Lutz = h1 dphi + h2 dtheta.

    Written in polar form h1 + i h2 = sqrt(1 + r^4) exp(i theta(r)) with
    theta = -pi (1 - sigma(r)) + atan(r^2) and sigma a smoothstep flat
    outside [inner, outer]: (h1, h2) = (-1, -r^2) near 0, (1, r^2) near 1,
    and the angle increases strictly, so h1 h2' - h2 h1' > 0 for r > 0.
    """
    r = np.asarray(r, dtype=float)
    sigma = _smoothstep((r - inner) / (outer - inner))
    angle = -math.pi * (1.0 - sigma) + np.arctan(r ** 2)
    rho = np.sqrt(1.0 + r ** 4)
    return rho * np.cos(angle), rho * np.sin(angle)


def lutz_profile_determinant(n=10_000):
    """
    h1 h2' - h2 h1' on an n-point grid of (0, 1], derivatives by central differences.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        grid and determinant values
    """
    r = np.linspace(1.0 / n, 1.0, n)
    h1, h2 = lutz_h_profile(r)
    d1 = np.gradient(h1, r, edge_order=2)
    d2 = np.gradient(h2, r, edge_order=2)
    return r, h1 * d2 - h2 * d1


def characteristic_foliation(eta, radius, theta, z):
    """
    Direction (a, b) of the characteristic foliation a d/dtheta + b d/dz
    induced by a 1-form on the torus r = radius of the solid torus.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    z = np.broadcast_to(np.asarray(z, dtype=float), theta.shape)
    points = np.stack([radius * np.cos(theta), radius * np.sin(theta), z], axis=-1)
    values = eta(points)
    d_theta = np.stack([-points[:, 1], points[:, 0], np.zeros_like(z)], axis=-1)
    eta_theta = np.sum(values * d_theta, axis=-1)
    eta_z = values[:, 2]
    norm = np.hypot(eta_z, eta_theta)
    norm = np.where(norm > 0, norm, 1.0)
    return eta_z / norm, -eta_theta / norm


def interpolating_piece_foliation(r):
    """
    Foliation direction (a, b) on the torus of radius r for the tight piece
    dz + sqrt(2) sin(pi/2 (r - 1/2)) dtheta.
    """
    h = math.sqrt(2.0) * np.sin(0.5 * math.pi * (np.asarray(r, dtype=float) - 0.5))
    norm = np.hypot(1.0, h)
    return 1.0 / norm, -h / norm


def tangent_boundary_example():
    """
    eta = cos(z) dz + sin(z) (cos(z) dx + sin(z) dy) on T^2 x [0, 1], written
    with double angles: sin(2z)/2 dx + (1 - cos(2z))/2 dy + cos(z) dz.
    """
    components = [0.5 * Expression.sin(2, 2.0),
                  0.5 - 0.5 * Expression.cos(2, 2.0),
                  Expression.cos(2)]
    return FieldEvaluator(components, '1-form', SLAB, 'tangent-boundary')


def lattice(domain, n):
    """A row-major n^3 lattice covering the domain's bounding box."""
    def axis_values(axis):
        period = domain.periods[axis]
        if period:
            return np.arange(n) * period / n
        if axis == 2 and np.isfinite(domain.z_range[1]):
            return np.linspace(domain.z_range[0], domain.z_range[1], n)
        bound = domain.radius if np.isfinite(domain.radius) else 1.0
        return np.linspace(-bound, bound, n)

    grids = np.meshgrid(axis_values(0), axis_values(1), axis_values(2), indexing='ij')
    return np.stack(grids, axis=-1).reshape(-1, 3)


def export_grid_csv(field, points, stream):
    """
    Writes ``x,y,z,vx,vy,vz`` rows (``ex,ey,ez`` for 1-forms), one per point.
    """
    values = field(points)
    names = ('ex', 'ey', 'ez') if field.kind == '1-form' else ('vx', 'vy', 'vz')
    stream.write(','.join(('x', 'y', 'z') + names) + '\n')
    np.savetxt(stream, np.hstack([points, values]), fmt='%.17g', delimiter=',')
