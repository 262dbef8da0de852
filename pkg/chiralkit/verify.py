"""
=========
verify.py
=========

Acceptance suites runnable from the CLI (``chiralkit verify --suite N``).
Each suite is a set of named checks with a ``passed`` flag and the numbers
behind it; randomized checks draw from the configured seed.
"""

from dataclasses import dataclass, field
import filecmp
from fractions import Fraction
import itertools
import logging
import math
import os
import tempfile

import numpy as np

from chiralkit.catalog import load_catalog
from chiralkit.chirality import (BeltramiSeries, beltrami_series, chiral_perturb, contact_defect, sample_points,
                                 sup_residual)
from chiralkit.command import perturbed_form, resolve_germ, unit_ball_points
from chiralkit.fields import abc_classify, abc_field, lutz_core_zeros, lutz_defect_closed_form, lutz_family
from chiralkit.flow import detect_periodic, detect_singular_connecting, integrate
from chiralkit.germ import degree_by_preimages, hessian_at_origin, numeric_index, RESIDUAL_LIMIT
from chiralkit.metriclab import verify_compatible_metric_morse
from chiralkit.polyform import (X, Y, Z, DifferentialForm, Polynomial, PolyVectorField, ext_d, gradient, hodge_euclid,
                                parse_one_form, poincare_homotopy, wedge)
from chiralkit.surface import dividing_set, level_set_topology, reeb_tangency_check, surface_contact_construct
from chiralkit.util import override, rng

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    suite: int
    title: str
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(check['passed'] for check in self.checks.values())

    def check(self, name, passed, **details):
        self.checks[name] = dict(details, passed=bool(passed))
        if not passed:
            logger.warning('Suite %d check %s failed: %s', self.suite, name, details)

    def to_json(self):
        return {'suite': self.suite, 'title': self.title, 'passed': self.passed, 'checks': self.checks}


# Random exact forms

_EXPONENTS = [e for e in itertools.product(range(6), repeat=3) if sum(e) <= 5]


def random_polynomial(generator, terms=6, bound=1000):
    """A polynomial of degree <= 5 with ``terms`` monomials and coefficients p/q, |p| <= bound."""
    picks = generator.choice(len(_EXPONENTS), size=terms, replace=False)
    return Polynomial({_EXPONENTS[i]: Fraction(int(generator.integers(-bound, bound + 1)),
                                               int(generator.integers(1, 10)))
                       for i in picks})


def random_form(generator, degree, terms=6):
    count = 3 if degree in (1, 2) else 1
    return DifferentialForm(degree, [random_polynomial(generator, terms) for _ in range(count)])


def exact_algebra_suite(config, full=False, samples=1000):
    result = SuiteResult(1, 'exact-algebra')
    generator = rng(config.seed)
    failures = {'d_squared': 0, 'leibniz': 0, 'star_star': 0, 'homotopy': 0}
    for _ in range(samples):
        forms = {k: random_form(generator, k) for k in range(4)}
        for k in (0, 1):
            if not ext_d(ext_d(forms[k])).is_zero:
                failures['d_squared'] += 1
        for p, q in ((0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)):
            a, b = forms[p], random_form(generator, q)
            lhs = ext_d(wedge(a, b))
            rhs = wedge(ext_d(a), b) + wedge(a, ext_d(b)) * (-1) ** p
            if lhs != rhs:
                failures['leibniz'] += 1
        for k in range(4):
            if hodge_euclid(hodge_euclid(forms[k])) != forms[k]:
                failures['star_star'] += 1
        closed = [ext_d(forms[0]), ext_d(forms[1]), forms[3]]
        for b in closed:
            if ext_d(poincare_homotopy(b)) != b:
                failures['homotopy'] += 1
    for name, count in failures.items():
        result.check(name, count == 0, samples=samples, failures=count)
    return result


def morse_example_suite(config, full=False):
    result = SuiteResult(2, 'morse-normal-form')
    phi = load_catalog().lookup('Morse1').polynomial
    nu = chiral_perturb(phi)
    result.check('chiral_perturb', nu == DifferentialForm.one_form(Y * Z, -X * Z), nu=str(nu))
    t = Fraction(1, 10)
    defect = contact_defect(ext_d(DifferentialForm.function(phi)) + nu * t)
    expected = (X * X + Y * Y + Z * Z * 4) * t
    result.check('defect', defect.defect == expected, defect=str(defect.defect))
    points = unit_ball_points(rng(config.seed), 100)
    for t in (0.5, 1.0):
        report = verify_compatible_metric_morse(t, points)
        result.check(f'compatible_metric_t={t:g}', report.passed, max_relative_error=report.max_relative_error)
    return result


def d4_suite(config, full=False):
    result = SuiteResult(3, 'd4-minus')
    germ = resolve_germ('D4minus')
    defect = contact_defect(perturbed_form(germ, Fraction(1, 100))[0])
    result.check('defect', defect.sign_verdict == 'positive-semidefinite',
                 verdict=defect.sign_verdict, certified=defect.certified)
    hessian = hessian_at_origin(germ.phi)
    result.check('corank', hessian.corank == 2, corank=hessian.corank)
    result.check('trace', hessian.trace == 1, trace=str(hessian.trace))
    index = numeric_index(gradient(germ.phi), threads=config.threads)
    result.check('index', index.index == -2 and index.residual < RESIDUAL_LIMIT, **index.to_json())
    return result


def index_suite(config, full=False):
    result = SuiteResult(4, 'index')
    for signs in itertools.product((1, -1), repeat=3):
        phi = X * X * signs[0] + Y * Y * signs[1] + Z * Z * signs[2]
        index = numeric_index(gradient(phi), threads=config.threads)
        expected = signs[0] * signs[1] * signs[2]
        result.check(f'morse{signs}', index.index == expected and index.residual < RESIDUAL_LIMIT,
                     index=index.index, residual=index.residual)
    catalog = load_catalog()
    for name in ('D4minus', 'T444'):
        entry = catalog.lookup(name)
        index = numeric_index(gradient(entry.polynomial), radius=entry.sphere_radius, threads=config.threads)
        result.check(name, index.index == entry.expected_index and index.residual < RESIDUAL_LIMIT,
                     index=index.index, residual=index.residual)
        oracle, counts = degree_by_preimages(gradient(entry.polynomial), radius=entry.sphere_radius)
        result.check(f'{name}_preimages', oracle == index.index, oracle=oracle, counts=counts)
    return result


def level_set_suite(config, full=False):
    result = SuiteResult(5, 'level-sets')
    resolutions = (128, 256) if full else (128,)
    catalog = load_catalog()
    for name in ('Morse0', 'Morse1', 'D4minus'):
        entry = catalog.lookup(name)
        k = entry.expected_index
        for resolution in resolutions:
            topology, _, _ = level_set_topology(entry.polynomial, 0.01, 1.0, resolution)
            result.check(f'{name}@{resolution}',
                         topology['chi_plus'] == 1 + k and topology['chi_minus'] == 1 - k,
                         chi_plus=topology['chi_plus'], chi_minus=topology['chi_minus'], k=k)
    return result


def series_suite(config, full=False):
    result = SuiteResult(6, 'beltrami-series')
    series = beltrami_series(load_catalog().lookup('Morse1').polynomial, Fraction(1, 10), 4)
    result.check('recursion', series.recursion_holds())
    result.check('residual_identity', series.residual() == series.expected_residual())
    points = sample_points(subdivisions=3)
    sup = [sup_residual(BeltramiSeries(series.phi, series.terms[:k], series.t), points) for k in range(1, 5)]
    ratios = [a / b for a, b in zip(sup, sup[1:])]
    result.check('convergence', all(r >= 5 for r in ratios), sup_residuals=sup, ratios=ratios)
    return result


def abc_suite(config, full=False):
    result = SuiteResult(7, 'abc')
    generator = rng(config.seed)
    points = generator.uniform(0.0, 2 * math.pi, size=(10_000, 3))
    for A, B, C in ((1.0, 0.8, 0.8), (1.0, 1.0, 1.0), (0.5, 0.3, 0.9)):
        field = abc_field(A, B, C)
        error = float(np.max(np.abs(field.curl()(points) - field(points))))
        result.check(f'curl_eigenfield({A:g},{B:g},{C:g})', error < 1e-12, max_error=error)
    for target in (0.9, 1.0, 1.1):
        b = math.sqrt(target / 2)
        classification = abc_classify(1.0, b, b)
        nonempty = len(classification.zeros) > 0
        result.check(f'zeros@{target:g}', nonempty == (target >= 1.0), zero_count=len(classification.zeros),
                     regime=classification.regime)
        expected = 'tight' if target <= 1.0 else 'overtwisted'
        result.check(f'tightness@{target:g}', classification.tightness == expected,
                     tightness=classification.tightness)
    classification = abc_classify(1.0, 0.8, 0.8)
    indices = [z.morse_index for z in classification.zeros]
    result.check('morse_indices', bool(indices) and all(i in (1, 2) for i in indices), morse_indices=indices)
    result.check('index_sum', classification.index_sum == 0, index_sum=classification.index_sum)
    orbit = integrate(abc_field(1.0, 0.8, 0.8), generator.uniform(0.0, 2 * math.pi, 3), t_max=50.0)
    divergence = orbit.stats['max_divergence']
    result.check('volume_preserving', divergence < 1e-10, max_divergence=divergence, samples=len(orbit.times))
    return result


def lutz_suite(config, full=False):
    result = SuiteResult(8, 'lutz')
    generator = rng(config.seed)
    disk = unit_ball_points(generator, 10_000)[:, :2]
    points = np.column_stack([disk, generator.uniform(0.0, 2 * math.pi, 10_000)])
    worst = 0.0
    for s, t in itertools.product((-1.0, -0.5, 0.0, 0.5, 1.0), (0.5, 1.0, 2.0)):
        closed = lutz_defect_closed_form(s, t, points)
        error = np.abs(lutz_family(s, t).defect(points) - closed) / np.maximum(1.0, np.abs(closed))
        worst = max(worst, float(error.max()))
    result.check('defect_closed_form', worst < 1e-12, max_error=worst)
    counts = [len(lutz_core_zeros(s)) for s in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    result.check('singular_counts', counts == [0, 1, 2, 1, 0], counts=counts)

    core_seeds = [(0.0, 0.0, 0.0), (0.0, 0.0, 1.0)]
    periodic = detect_periodic(lutz_family(-1.0, 1.0).reeb_like(), core_seeds, t_max=50.0)
    closures = [r.closure_residual for r in periodic]
    result.check('core_orbit_s=-1', bool(periodic) and min(closures) < 1e-6, orbits=len(periodic),
                 closure_residuals=closures, periods=[r.period for r in periodic])
    eta = lutz_family(0.0, 1.0)
    periodic = detect_periodic(eta.reeb_like(), core_seeds, t_max=50.0)
    result.check('no_core_orbit_s=0', not periodic, orbits=len(periodic))
    connecting = detect_singular_connecting(eta.reeb_like(), eta.singular_points, threads=config.threads)
    result.check('connections_s=0', len(connecting) == 2, connections=[r.limits for r in connecting])
    return result


def dividing_set_suite(config, full=False):
    result = SuiteResult(9, 'dividing-sets')
    for name, expected in (('Morse1', 2), ('D4minus', 3)):
        germ = resolve_germ(name)
        report = dividing_set(perturbed_form(germ, Fraction(1, 100))[0])
        result.check(name, report.component_count == expected and report.giroux_verdict == 'overtwisted',
                     components=report.component_count, verdict=report.giroux_verdict)
    report = dividing_set(parse_one_form('-y/2, x/2, 1'))
    result.check('standard', report.component_count == 1 and report.giroux_verdict == 'tight-neighborhood',
                 components=report.component_count, verdict=report.giroux_verdict)
    return result


def surface_suite(config, full=False):
    result = SuiteResult(10, 'surface-construction')
    construction = surface_contact_construct(PolyVectorField(Y, -X), PolyVectorField(X, Y))
    normal_form = DifferentialForm.one_form(X + Y * Z, Y - X * Z, Z * -2)
    result.check('normal_form', construction.eta == normal_form, eta=[str(c) for c in construction.eta.components])
    result.check('z0_identity', construction.z0_identity_holds(), z0_defect=str(construction.z0_defect()))
    tangency = dict(reeb_tangency_check(construction.eta))
    passed = tangency.pop('passed')
    result.check('reeb_tangency', passed, **tangency)
    return result


DETERMINISM_RUNS = (
    ('analyze', 'Morse1'),
    ('abc', '--B', '0.8', '--C', '0.8'),
    ('lutz', '--s', '0', '--t', '1', '--points', '1000', '--export-grid', '8'),
    ('metric', '--t', '0.5'),
)


def determinism_suite(config, full=False):
    import argparse
    from chiralkit import cli

    result = SuiteResult(11, 'determinism')
    parser = argparse.ArgumentParser(prog='chiralkit')
    cli.setup_cli(parser)
    with tempfile.TemporaryDirectory() as root:
        for run in DETERMINISM_RUNS:
            dirs = [os.path.join(root, f'{run[0]}-{k}') for k in range(2)]
            codes = [cli.run_cli(parser, parser.parse_args(['--output-dir', d] + list(run)),
                                 override(config, output_dir=d)) for d in dirs]
            names = [sorted(os.listdir(d)) for d in dirs]
            _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names[0], shallow=False)
            result.check(run[0], codes[0] == codes[1] and names[0] == names[1] and not mismatch and not errors,
                         exit_codes=codes, files=names[0], mismatched=mismatch + errors)
    return result


SUITES = {
    1: exact_algebra_suite,
    2: morse_example_suite,
    3: d4_suite,
    4: index_suite,
    5: level_set_suite,
    6: series_suite,
    7: abc_suite,
    8: lutz_suite,
    9: dividing_set_suite,
    10: surface_suite,
    11: determinism_suite,
}


def run_suite(number, config, full=False):
    """Runs acceptance suite ``number`` and returns its SuiteResult."""
    return SUITES[number](config, full)
