"""
===========
polyform.py
===========

Exact exterior calculus for polynomial differential forms on R^3.

Polynomials are sparse maps from exponent triples to ``fractions.Fraction``
coefficients. Forms carry one polynomial per basis element:

    degree 0: 1
    degree 1: dx, dy, dz
    degree 2: dy^dz, dz^dx, dx^dy
    degree 3: dx^dy^dz

so 1-forms and 2-forms share the Euclidean vector proxy, which keeps wedge,
d, interior products and the Euclidean star down to dot and cross products.
Floats only appear at evaluation time.
"""

from fractions import Fraction
import itertools
from numbers import Rational
import re
import tokenize
from types import MappingProxyType

import numpy as np
from sympy import Poly, PolynomialError, Symbol
from sympy.parsing.sympy_parser import (convert_xor, implicit_multiplication_application, parse_expr,
                                        rationalize, standard_transformations)

from chiralkit.exceptions import ContractViolation, NotClosed, ParseError

VARIABLES = ('x', 'y', 'z')

COMPONENT_KEYS = {
    0: ('1',),
    1: ('dx', 'dy', 'dz'),
    2: ('dydz', 'dzdx', 'dxdy'),
    3: ('dxdydz',),
}

_SYMBOLS = {name: Symbol(name) for name in VARIABLES}
_TRANSFORMATIONS = standard_transformations + (implicit_multiplication_application, convert_xor, rationalize)
_ALLOWED = re.compile(r'[0-9xyz+\-*/^().\s]')


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    raise TypeError(f'Cannot use {value!r} as an exact coefficient')


def _grlex_key(exponents):
    return (sum(exponents), exponents)


class Polynomial(object):
    """
    An exact sparse polynomial in x, y, z with rational coefficients.

    Instances are immutable; every operation returns a new polynomial.
    Terms with zero coefficient are never stored.
    """
    __slots__ = ('_terms', '_hash')

    def __init__(self, terms=None):
        """
        Parameters
        ----------
        terms : dict, optional
            Mapping from exponent triple ``(ex, ey, ez)`` to a rational
            coefficient (int, Fraction or "p/q" string)
        """
        normalized = {}
        for exponents, coefficient in (terms or {}).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != 3 or any(e < 0 for e in exponents):
                raise ValueError(f'Invalid exponent triple {exponents}')
            coefficient = _as_fraction(coefficient)
            total = normalized.get(exponents, 0) + coefficient
            if total == 0:
                normalized.pop(exponents, None)
            else:
                normalized[exponents] = total
        self._terms = normalized
        self._hash = None

    @classmethod
    def constant(cls, value):
        return cls({(0, 0, 0): value})

    @classmethod
    def variable(cls, name):
        index = VARIABLES.index(name) if isinstance(name, str) else int(name)
        exponents = [0, 0, 0]
        exponents[index] = 1
        return cls({tuple(exponents): 1})

    @classmethod
    def monomial(cls, exponents, coefficient=1):
        return cls({tuple(exponents): coefficient})

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    @property
    def is_zero(self):
        return not self._terms

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    @property
    def low_degree(self):
        """Smallest total degree of a stored term; -1 for the zero polynomial."""
        return min((sum(e) for e in self._terms), default=-1)

    def sorted_terms(self):
        """Terms in graded lexicographic order (total degree, then x > y > z), highest first."""
        return sorted(self._terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def map_terms(self, func):
        """Returns the polynomial with each coefficient c at exponents e replaced by func(e, c)."""
        return Polynomial({e: func(e, c) for e, c in self._terms.items()})

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other)

    def __add__(self, other):
        if isinstance(other, (DifferentialForm, PolyVectorField)):
            return NotImplemented
        other = self._coerce(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (DifferentialForm, PolyVectorField)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (DifferentialForm, PolyVectorField)):
            return NotImplemented
        if not isinstance(other, Polynomial):
            factor = _as_fraction(other)
            return Polynomial({e: c * factor for e, c in self._terms.items()})
        terms = {}
        for (e1, c1), (e2, c2) in itertools.product(self._terms.items(), other._terms.items()):
            key = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
            terms[key] = terms.get(key, 0) + c1 * c2
        return Polynomial(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / _as_fraction(other))

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError('Polynomial powers must be non-negative integers')
        result = Polynomial.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Polynomial.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f'Polynomial({self})'

    def __str__(self):
        if not self._terms:
            return '0'
        pieces = []
        for exponents, coefficient in self.sorted_terms():
            factors = [name if e == 1 else f'{name}^{e}' for name, e in zip(VARIABLES, exponents) if e > 0]
            magnitude = abs(coefficient)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = '*'.join(factors)
            else:
                body = f'{magnitude}*' + '*'.join(factors)
            sign = '-' if coefficient < 0 else '+'
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in pieces[1:]:
            text += f' {sign} {body}'
        return text

    def diff(self, variable):
        """Exact partial derivative with respect to ``variable`` (name or index)."""
        index = VARIABLES.index(variable) if isinstance(variable, str) else int(variable)
        terms = {}
        for e, c in self._terms.items():
            if e[index] == 0:
                continue
            lowered = list(e)
            lowered[index] -= 1
            terms[tuple(lowered)] = c * e[index]
        return Polynomial(terms)

    def truncate(self, k):
        """Drops every monomial of total degree > k."""
        return Polynomial({e: c for e, c in self._terms.items() if sum(e) <= k})

    def homogeneous_parts(self):
        """Mapping from total degree to the homogeneous part of that degree."""
        parts = {}
        for e, c in self._terms.items():
            parts.setdefault(sum(e), {})[e] = c
        return {d: Polynomial(t) for d, t in sorted(parts.items())}

    def coefficient(self, exponents):
        return self._terms.get(tuple(exponents), Fraction(0))

    def evaluate(self, point):
        """Exact value at ``point``; float coordinates are converted exactly."""
        px, py, pz = (_as_fraction(v) for v in point)
        total = Fraction(0)
        for (ex, ey, ez), c in self._terms.items():
            total += c * px ** ex * py ** ey * pz ** ez
        return total

    def evaluate_many(self, points):
        """
        Floating-point values at an (N, 3) array of points.

        Returns
        -------
        numpy.ndarray
            shape (N,)
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.zeros(points.shape[0])
        if not self._terms:
            return values
        top = self.degree
        powers = [np.stack([points[:, i] ** p for p in range(top + 1)]) for i in range(3)]
        for (ex, ey, ez), c in self._terms.items():
            values += float(c) * powers[0][ex] * powers[1][ey] * powers[2][ez]
        return values

    def grid_values(self, xs, ys, zs):
        """Values on the tensor grid xs x ys x zs, shape (len(xs), len(ys), len(zs))."""
        xs, ys, zs = (np.asarray(a, dtype=float) for a in (xs, ys, zs))
        values = np.zeros((xs.size, ys.size, zs.size))
        for (ex, ey, ez), c in self._terms.items():
            values += float(c) * np.multiply.outer(np.multiply.outer(xs ** ex, ys ** ey), zs ** ez)
        return values

    def coefficient_scale(self):
        """Largest coefficient magnitude as a float (0 for the zero polynomial)."""
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)


ZERO = Polynomial()
ONE = Polynomial.constant(1)
X, Y, Z = (Polynomial.variable(name) for name in VARIABLES)


def gradient(p):
    """Exact gradient of a polynomial as a PolyVectorField."""
    return PolyVectorField(*(p.diff(i) for i in range(3)))


def laplacian(p):
    """Exact flat Laplacian."""
    return p.diff(0).diff(0) + p.diff(1).diff(1) + p.diff(2).diff(2)


def solve_poisson(f):
    """
    Returns a polynomial psi with laplacian(psi) == f exactly.

    Each homogeneous part f_m gets the particular solution
    sum_k a_k r^(2k+2) lap^k f_m, where a_0 = 1/b_0, a_k = -a_(k-1)/b_k and
    b_k = 2(k+1)(2m - 2k + 3); the sum stops once lap^k f_m vanishes.
    """
    r2 = X * X + Y * Y + Z * Z
    psi = ZERO
    for m, part in f.homogeneous_parts().items():
        k = 0
        a = Fraction(0)
        current = part
        radial = r2
        while not current.is_zero:
            b = Fraction(2 * (k + 1) * (2 * m - 2 * k + 3))
            a = 1 / b if k == 0 else -a / b
            psi = psi + radial * current * a
            current = laplacian(current)
            radial = radial * r2
            k += 1
    return psi


class PolyVectorField(object):
    """A vector field with polynomial coefficients of d/dx, d/dy, d/dz."""
    __slots__ = ('components',)

    def __init__(self, fx=ZERO, fy=ZERO, fz=ZERO):
        self.components = tuple(c if isinstance(c, Polynomial) else Polynomial.constant(c) for c in (fx, fy, fz))

    @classmethod
    def euler(cls):
        """The Euler field x d/dx + y d/dy + z d/dz."""
        return cls(X, Y, Z)

    @classmethod
    def from_one_form(cls, form):
        """Euclidean sharp of a 1-form."""
        _require_degree(form, 1, 'from_one_form')
        return cls(*form.components)

    def to_one_form(self):
        """Euclidean flat of the field."""
        return DifferentialForm(1, self.components)

    def divergence(self):
        return sum((c.diff(i) for i, c in enumerate(self.components)), ZERO)

    def dot(self, other):
        return sum((a * b for a, b in zip(self.components, other.components)), ZERO)

    def is_zero(self):
        return all(c.is_zero for c in self.components)

    def __add__(self, other):
        return PolyVectorField(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return PolyVectorField(*(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return PolyVectorField(*(-c for c in self.components))

    def __mul__(self, factor):
        return PolyVectorField(*(c * factor for c in self.components))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return 'PolyVectorField(' + ', '.join(str(c) for c in self.components) + ')'


class DifferentialForm(object):
    """
    A degree-k differential form on R^3 with Polynomial components in the
    standard basis (see the module docstring for the ordering).
    """
    __slots__ = ('degree', 'components')

    def __init__(self, degree, components):
        if degree not in COMPONENT_KEYS:
            raise ContractViolation(f'Form degree must be 0..3, got {degree}')
        components = tuple(c if isinstance(c, Polynomial) else Polynomial.constant(c) for c in components)
        if len(components) != len(COMPONENT_KEYS[degree]):
            raise ContractViolation(
                f'A {degree}-form needs {len(COMPONENT_KEYS[degree])} components, got {len(components)}')
        self.degree = degree
        self.components = components

    @classmethod
    def zero(cls, degree):
        return cls(degree, [ZERO] * len(COMPONENT_KEYS[degree]))

    @classmethod
    def function(cls, p):
        return cls(0, [p])

    @classmethod
    def one_form(cls, fx=ZERO, fy=ZERO, fz=ZERO):
        return cls(1, [fx, fy, fz])

    @classmethod
    def two_form(cls, fyz=ZERO, fzx=ZERO, fxy=ZERO):
        return cls(2, [fyz, fzx, fxy])

    @classmethod
    def volume(cls, f=ONE):
        return cls(3, [f])

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.components)

    @property
    def keys(self):
        return COMPONENT_KEYS[self.degree]

    def __getitem__(self, key):
        return self.components[self.keys.index(key)]

    def map_components(self, func):
        return DifferentialForm(self.degree, [func(c) for c in self.components])

    def __add__(self, other):
        if not isinstance(other, DifferentialForm) or other.degree != self.degree:
            raise ContractViolation('Only forms of equal degree can be added')
        return DifferentialForm(self.degree, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.map_components(lambda c: -c)

    def __mul__(self, factor):
        """Multiplication by a scalar or a polynomial (0-form coefficient)."""
        if isinstance(factor, DifferentialForm):
            return wedge(self, factor)
        return self.map_components(lambda c: c * factor)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self.degree == other.degree and self.components == other.components

    def __hash__(self):
        return hash((self.degree, self.components))

    def __repr__(self):
        if self.is_zero:
            return f'DifferentialForm({self.degree}, 0)'
        pieces = [f'({c}) {k}' for k, c in zip(self.keys, self.components) if not c.is_zero]
        return f'DifferentialForm({self.degree}, ' + ' + '.join(pieces) + ')'


def _require_degree(form, allowed, operation):
    allowed = (allowed,) if isinstance(allowed, int) else tuple(allowed)
    if not isinstance(form, DifferentialForm) or form.degree not in allowed:
        got = form.degree if isinstance(form, DifferentialForm) else type(form).__name__
        raise ContractViolation(f'{operation} expects a form of degree in {allowed}, got {got}')


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return sum((p * q for p, q in zip(a, b)), ZERO)


def wedge(a, b):
    """
    Exterior product a ^ b with exact coefficients.

    Raises
    ------
    ContractViolation
        if deg a + deg b > 3
    """
    if a.degree + b.degree > 3:
        raise ContractViolation(f'wedge of degrees {a.degree} and {b.degree} exceeds 3')
    if a.degree == 0:
        return b.map_components(lambda c: c * a.components[0])
    if b.degree == 0:
        return a.map_components(lambda c: c * b.components[0])
    if a.degree == 1 and b.degree == 1:
        return DifferentialForm(2, _cross(a.components, b.components))
    # 1 ^ 2 and 2 ^ 1 agree: (-1)^(1*2) = 1
    return DifferentialForm(3, [_dot(a.components, b.components)])


def ext_d(a):
    """
    Exterior derivative. d of a 3-form is a contract violation.
    """
    _require_degree(a, (0, 1, 2), 'ext_d')
    if a.degree == 0:
        p = a.components[0]
        return DifferentialForm(1, [p.diff(0), p.diff(1), p.diff(2)])
    if a.degree == 1:
        fx, fy, fz = a.components
        return DifferentialForm(2, [fz.diff(1) - fy.diff(2),
                                    fx.diff(2) - fz.diff(0),
                                    fy.diff(0) - fx.diff(1)])
    return DifferentialForm(3, [sum((c.diff(i) for i, c in enumerate(a.components)), ZERO)])


def interior(field, a):
    """
    Interior product i_X a. Degree drops by one; degree-0 input is a contract violation.
    """
    _require_degree(a, (1, 2, 3), 'interior')
    v = field.components
    if a.degree == 1:
        return DifferentialForm(0, [_dot(v, a.components)])
    if a.degree == 2:
        return DifferentialForm(1, _cross(a.components, v))
    f = a.components[0]
    return DifferentialForm(2, [f * c for c in v])


def hodge_euclid(a):
    """Euclidean Hodge star on R^3; an involution on every degree."""
    return DifferentialForm(3 - a.degree, a.components)


def poincare_homotopy(b, check=True):
    """
    Poincare homotopy operator H centred at the origin.

    For a closed form b of degree k >= 1, returns H(b) with d(H(b)) = b:
    each monomial of total degree m is contracted with the Euler field and
    scaled by 1/(m + k).

    Parameters
    ----------
    b : DifferentialForm
        A form of degree 1, 2 or 3
    check : bool
        Verify db = 0 first (3-forms are always closed)

    Raises
    ------
    NotClosed
        if db != 0
    """
    _require_degree(b, (1, 2, 3), 'poincare_homotopy')
    if check and b.degree < 3 and not ext_d(b).is_zero:
        raise NotClosed(f'poincare_homotopy needs a closed {b.degree}-form; d of the input is nonzero')
    k = b.degree
    scaled = b.map_components(lambda c: c.map_terms(lambda e, coeff: coeff / (sum(e) + k)))
    return interior(PolyVectorField.euler(), scaled)


def truncate_jet(a, k):
    """Drops every monomial of total degree > k from every component."""
    if k < 0:
        raise ContractViolation('truncate_jet needs k >= 0')
    if isinstance(a, PolyVectorField):
        return PolyVectorField(*(c.truncate(k) for c in a.components))
    return a.map_components(lambda c: c.truncate(k))


def evaluate(a, point):
    """
    Component values of a form or vector field at a point: exact rational
    evaluation, then conversion to floats.

    Returns
    -------
    numpy.ndarray
        One entry per component
    """
    return np.array([float(c.evaluate(point)) for c in a.components])


def evaluate_many(a, points):
    """Float component values at an (N, 3) array of points, shape (N, n_components)."""
    return np.stack([c.evaluate_many(points) for c in a.components], axis=-1)


def dot_form(a, b):
    """Pointwise Euclidean inner product of two forms of equal degree, as a polynomial."""
    return _dot(a.components, b.components)


# Serialization and parsing

def _fraction_text(c):
    return f'{c.numerator}/{c.denominator}'


def polynomial_to_json(p):
    return [[list(e), _fraction_text(c)] for e, c in p.sorted_terms()]


def polynomial_from_json(data):
    try:
        return Polynomial({tuple(e): Fraction(str(c)) for e, c in data})
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise ParseError(f'Malformed polynomial terms: {err}')


def form_to_json(form):
    """Serializes a form to the ``{"degree": k, "components": {...}}`` schema."""
    return {
        'degree': form.degree,
        'components': {k: polynomial_to_json(c) for k, c in zip(form.keys, form.components)}
    }


def form_from_json(data):
    """
    Builds a form from the JSON schema; missing component keys are zero.

    Raises
    ------
    ParseError
        on an unknown degree or component key, or malformed terms
    """
    try:
        degree = int(data['degree'])
        components = data.get('components', {})
    except (KeyError, TypeError, ValueError, AttributeError):
        raise ParseError('A form needs an integer "degree" and a "components" object')
    if degree not in COMPONENT_KEYS:
        raise ParseError(f'Unknown form degree {degree}')
    unknown = set(components) - set(COMPONENT_KEYS[degree])
    if unknown:
        raise ParseError(f"Unknown component keys for a {degree}-form: {', '.join(sorted(unknown))}")
    return DifferentialForm(degree, [polynomial_from_json(components.get(k, [])) for k in COMPONENT_KEYS[degree]])


def _locate(text, offset):
    """1-based (line, column) of a 0-based character offset."""
    before = text[:offset]
    line = before.count('\n') + 1
    column = offset - (before.rfind('\n') + 1) + 1
    return line, column


def parse_polynomial(text):
    """
    Parses the inline polynomial grammar: ``^`` or ``**`` powers, optional
    ``*``, rational literals ``p/q`` and decimals (read exactly), whitespace
    insensitive, variables x, y, z.

    Raises
    ------
    ParseError
        with the line and column of the first offending character
    """
    if not text or not text.strip():
        raise ParseError('Empty polynomial', 1, 1)
    for match in re.finditer(r'\S', text):
        if not _ALLOWED.match(match.group()):
            line, column = _locate(text, match.start())
            raise ParseError(f'Unexpected character {match.group()!r}', line, column)
    source = ' '.join(text.splitlines())
    try:
        expr = parse_expr(source, local_dict=dict(_SYMBOLS), transformations=_TRANSFORMATIONS)
    except SyntaxError as err:
        column = err.offset or 1
        line, column = _locate(text, min(max(column - 1, 0), len(text)))
        raise ParseError(f'Syntax error: {err.msg}', line, column)
    except tokenize.TokenError as err:
        position = err.args[1] if len(err.args) > 1 else (1, len(text))
        raise ParseError(f'Syntax error: {err.args[0]}', 1, position[1] + 1)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise ParseError(f'Cannot read polynomial: {err}', 1, 1)
    try:
        poly = Poly(expr, *_SYMBOLS.values(), domain='QQ')
    except (PolynomialError, ValueError) as err:
        raise ParseError(f'Not a polynomial in x, y, z: {err}', 1, 1)
    return Polynomial({monom: Fraction(int(c.p), int(c.q)) for monom, c in poly.terms()})


def parse_one_form(text):
    """
    Parses ``"P, Q, R"`` as the 1-form P dx + Q dy + R dz.

    Raises
    ------
    ParseError
        if there are not exactly three comma separated polynomials
    """
    pieces = text.split(',')
    if len(pieces) != 3:
        raise ParseError(f'A 1-form needs three comma separated components, got {len(pieces)}', 1, 1)
    components = []
    offset = 0
    for piece in pieces:
        try:
            components.append(parse_polynomial(piece))
        except ParseError as err:
            raise ParseError(err.message.rsplit(' (line', 1)[0], err.line, err.column + offset)
        offset += len(piece) + 1
    return DifferentialForm(1, components)

