"""
==========
command.py
==========

Provides BaseCommand, an abstract base class for chiralkit commands to
implement the translation between parsed CLI arguments and module calls and
the staging of results in the output directory, and the commands the
``chiralkit`` CLI dispatches to.
"""

from abc import ABC, abstractmethod
from collections import namedtuple
from fractions import Fraction
import json
import logging
import os

import numpy as np

from chiralkit.catalog import load_catalog
from chiralkit.chirality import (BeltramiSeries, beltrami_defect_deviation, beltrami_series, chiral_perturb,
                                 contact_defect, sample_points, sup_residual)
from chiralkit.exceptions import ContractViolation
from chiralkit.fields import (abc_classify, abc_field, as_evaluator, ball, dedupe_points, export_grid_csv, lattice,
                              lutz_core_zeros, lutz_defect_closed_form, lutz_family, newton_zeros)
from chiralkit.flow import detect_periodic, detect_singular_connecting, sobol_seeds
from chiralkit.germ import analyze_germ
from chiralkit.logging import build_logger
from chiralkit.metriclab import PointwiseMetric, continuity_profile, verify_compatible_metric_morse
from chiralkit.polyform import (X, Y, Z, DifferentialForm, PolyVectorField, ext_d, form_from_json, form_to_json,
                                parse_one_form, parse_polynomial, polynomial_from_json)
from chiralkit.surface import dividing_set, level_set_topology, reeb_tangency_check, surface_contact_construct
from chiralkit.util import rng

GermInput = namedtuple('GermInput', ['phi', 'name', 'expected_index', 'perturbation', 'radius'])


def resolve_germ(text):
    """
    A germ given as a catalog name, a path to a JSON term list, or an inline
    polynomial.

    Raises
    ------
    ParseError
        for inline text that is not a polynomial
    """
    catalog = load_catalog()
    if text in catalog:
        entry = catalog.lookup(text)
        return GermInput(entry.polynomial, entry.name, entry.expected_index, entry.nu, entry.sphere_radius)
    if text.endswith('.json') and os.path.isfile(text):
        with open(text) as f:
            data = json.load(f)
        terms = data.get('terms') if isinstance(data, dict) else data
        return GermInput(polynomial_from_json(terms), os.path.basename(text), None, None, 1.0)
    return GermInput(parse_polynomial(text), None, None, None, 1.0)


def resolve_one_form(text):
    """A 1-form from a JSON file in the form schema or inline ``"P, Q, R"``."""
    if text.endswith('.json') and os.path.isfile(text):
        with open(text) as f:
            return form_from_json(json.load(f))
    return parse_one_form(text)


def perturbed_form(germ, t):
    """d phi + t nu, nu the catalog perturbation or the harmonic construction."""
    nu = germ.perturbation if germ.perturbation is not None else chiral_perturb(germ.phi)
    return ext_d(DifferentialForm.function(germ.phi)) + nu * Fraction(t), nu


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Fraction):
        return f'{value.numerator}/{value.denominator}'
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def unit_ball_points(generator, n, radius=1.0):
    directions = generator.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return radius * directions * np.cbrt(generator.random(n))[:, None]


class BaseCommand(ABC):
    """
    Abstract base class for chiralkit commands. Subclasses declare their
    arguments in ``setup_parser`` and implement ``invoke``, which writes its
    outputs through ``write_json`` / ``write_with`` and returns the verdict.

    Attributes
    ----------
    args : argparse.Namespace
        The parsed CLI arguments
    config : chiralkit.util.Config
        The run configuration (environment merged with CLI flags)
    logger : logging.LoggerAdapter
        Logger carrying the command name and seed
    outputs : list
        Files written so far, relative to the output directory
    """
    name = None
    help = None

    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.outputs = []
        self.init_logging()

    def init_logging(self):
        logging_context = {
            'command': self.name,
            'seed': self.config.seed
        }
        self.logger = logging.LoggerAdapter(build_logger(self.config), logging_context)

    @classmethod
    def setup_parser(cls, parser):
        """Adds the command's arguments to its subparser."""

    @abstractmethod
    def invoke(self):
        """
        Runs the command.

        Returns
        -------
        bool or None
            True / None for a pass, False for a verdict failure
        """

    @property
    def output_dir(self):
        return self.config.output_dir

    def path(self, filename):
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, filename)

    def write_json(self, filename, data):
        with open(self.path(filename), 'w') as f:
            f.write(json.dumps(data, sort_keys=True, indent=2, default=_json_default))
            f.write('\n')
        self.outputs.append(filename)
        self.logger.info(f'Wrote {filename}')

    def write_with(self, filename, writer):
        """Opens ``filename`` in the output directory and hands the stream to ``writer``."""
        with open(self.path(filename), 'w', newline='') as f:
            writer(f)
        self.outputs.append(filename)
        self.logger.info(f'Wrote {filename}')


class AnalyzeCommand(BaseCommand):
    name = 'analyze'
    help = 'Hessian, index, harmonicity and chirality/Beltrami verdicts of a germ'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('germ', help='catalog name, JSON term list file or inline polynomial')
        parser.add_argument('--radius', type=float, help='sphere radius for the index (default: catalog or 1)')
        parser.add_argument('--levelsets', action='store_true', help='also mesh F+ and F- and report their topology')
        parser.add_argument('--level', type=float, default=0.01, help='level c of F+- = {phi = +-c}')
        parser.add_argument('--resolution', type=int, default=128, help='marching cubes grid resolution')

    def invoke(self):
        germ = resolve_germ(self.args.germ)
        radius = self.args.radius or germ.radius
        report = analyze_germ(germ.phi, radius, germ.perturbation, germ.name, germ.expected_index,
                              self.config.threads)
        self.write_json('report.json', report.to_json())
        if self.args.levelsets:
            topology, plus, minus = level_set_topology(germ.phi, self.args.level, 1.0, self.args.resolution)
            self.write_with('F_plus.obj', plus.write_obj)
            self.write_with('F_minus.obj', minus.write_obj)
            self.write_json('levelsets.json', topology)
        self.logger.info(f'Index {report.numeric_index.index}, corank {report.corank}, '
                         f'{report.chirality_verdict}, {report.beltrami_verdict}')
        return report.index_matches_expected


class PerturbCommand(BaseCommand):
    name = 'perturb'
    help = 'linear chiral perturbation d phi + t nu and its contact defect'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('germ', help='catalog name, JSON term list file or inline polynomial')
        parser.add_argument('--t', default='1/100', help='perturbation parameter (rational)')

    def invoke(self):
        germ = resolve_germ(self.args.germ)
        eta, nu = perturbed_form(germ, self.args.t)
        defect = contact_defect(eta)
        self.write_json('perturbation.json', {
            'phi': str(germ.phi),
            't': str(Fraction(self.args.t)),
            'nu': form_to_json(nu),
            'eta': form_to_json(eta),
            'defect': defect.to_json(),
        })
        return defect.one_signed and defect.sign_verdict != 'zero'


class SeriesCommand(BaseCommand):
    name = 'series'
    help = 'Beltrami power series of a harmonic germ'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('germ', help='catalog name, JSON term list file or inline polynomial')
        parser.add_argument('--t', default='1/10', help='series parameter in (0, 1), rational')
        parser.add_argument('--K', type=int, default=4, help='number of terms')
        parser.add_argument('--no-gauge', action='store_true', help='skip the Coulomb gauge (may raise NotClosed)')

    def invoke(self):
        germ = resolve_germ(self.args.germ)
        series = beltrami_series(germ.phi, Fraction(self.args.t), self.args.K, gauge=not self.args.no_gauge)
        points = sample_points(subdivisions=3)
        sup = [sup_residual(BeltramiSeries(series.phi, series.terms[:k], series.t, series.gauge), points)
               for k in range(1, series.K + 1)]
        ratios = [a / b if b > 0 else float('inf') for a, b in zip(sup, sup[1:])]
        identity = series.residual() == series.expected_residual()
        recursion = series.recursion_holds()
        data = series.to_json()
        data.update({
            'recursion_holds': recursion,
            'residual_identity_holds': identity,
            'sup_residuals': sup,
            'residual_ratios': ratios,
            'defect_deviation': beltrami_defect_deviation(series, points),
        })
        self.write_json('series.json', data)
        return recursion and identity


class CheckCommand(BaseCommand):
    name = 'check'
    help = 'contact defect of a polynomial 1-form'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--eta', required=True, help='form JSON file or inline "P, Q, R"')

    def invoke(self):
        defect = contact_defect(resolve_one_form(self.args.eta))
        self.write_json('defect.json', defect.to_json())
        return defect.one_signed and defect.sign_verdict != 'zero'


class MetricCommand(BaseCommand):
    name = 'metric'
    help = 'compatible metric of the Morse normal form and pointwise star checks'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--t', type=float, default=1.0, help='normal form parameter')
        parser.add_argument('--points', type=int, default=100, help='random points in the unit ball')

    def invoke(self):
        t = self.args.t
        points = unit_ball_points(rng(self.config.seed), self.args.points)
        report = verify_compatible_metric_morse(t, points)
        exact_t = Fraction(str(t))
        eta = DifferentialForm.one_form(X + Y * Z * exact_t, Y - X * Z * exact_t, Z * -2)
        metric = PointwiseMetric(eta)
        pointwise = metric.check(points)
        profile = continuity_profile(metric, (0.1, 0.2, 0.3), (0.5, -0.4, 0.2))
        self.write_json('metric.json', {
            'normal_form': report.to_json(),
            'pointwise': pointwise,
            'continuity': {'passed': profile['passed'], 'max_jump': max(profile['jumps'])},
        })
        return report.passed and pointwise['symmetric'] and pointwise['positive_semidefinite']


class AbcCommand(BaseCommand):
    name = 'abc'
    help = 'zeros, regime and tightness of an ABC field'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--A', type=float, default=1.0)
        parser.add_argument('--B', type=float, default=0.0)
        parser.add_argument('--C', type=float, default=0.0)
        parser.add_argument('--seeds-per-axis', type=int, default=16, help='Newton seed grid per axis')
        parser.add_argument('--export-grid', type=int, help='write the field on an N^3 lattice')
        parser.add_argument('--connections', action='store_true', help='search for orbits connecting the zeros')

    def invoke(self):
        a = self.args
        classification = abc_classify(a.A, a.B, a.C, a.seeds_per_axis)
        data = classification.to_json()
        field = abc_field(a.A, a.B, a.C)
        if a.connections:
            found = detect_singular_connecting(field, [z.location for z in classification.zeros],
                                               threads=self.config.threads)
            data['connections'] = [r.to_json() for r in found]
        if a.export_grid:
            self.write_with('abc_grid.csv', lambda f: export_grid_csv(field, lattice(field.domain, a.export_grid), f))
        self.write_json('abc.json', data)
        self.logger.info(f'{len(classification.zeros)} zeros, {len(classification.zero_curves)} zero curves, '
                         f'{classification.regime}, {classification.tightness}')
        return classification.index_sum == 0


class LutzCommand(BaseCommand):
    name = 'lutz'
    help = 'singular Lutz twist family: defect verification, singular locus, grid export'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--s', type=float, default=0.0)
        parser.add_argument('--t', type=float, default=1.0)
        parser.add_argument('--points', type=int, default=10_000, help='random points for the defect check')
        parser.add_argument('--export-grid', type=int, help='write the 1-form on an N^3 lattice')

    def invoke(self):
        a = self.args
        eta = lutz_family(a.s, a.t)
        generator = rng(self.config.seed)
        disk = unit_ball_points(generator, a.points)[:, :2]
        points = np.column_stack([disk, generator.uniform(0.0, 2 * np.pi, a.points)])
        error = float(np.max(np.abs(eta.defect(points) - lutz_defect_closed_form(a.s, a.t, points))))
        if a.export_grid:
            self.write_with('lutz_grid.csv', lambda f: export_grid_csv(eta, lattice(eta.domain, a.export_grid), f))
        passed = error < 1e-12
        self.write_json('lutz.json', {
            's': a.s,
            't': a.t,
            'singular_points': [list(p) for p in lutz_core_zeros(a.s)],
            'defect_max_error': error,
            'defect_check': 'PASS' if passed else 'FAIL',
        })
        return passed


class DivideCommand(BaseCommand):
    name = 'divide'
    help = 'dividing set on a sphere and the Giroux verdict'

    @classmethod
    def setup_parser(cls, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--germ', help='perturb this germ: d phi + t nu')
        source.add_argument('--eta', help='form JSON file or inline "P, Q, R"')
        parser.add_argument('--t', default='1/100', help='perturbation parameter for --germ')
        parser.add_argument('--radius', type=float, default=0.5)
        parser.add_argument('--center', type=float, nargs=3, default=(0.0, 0.0, 0.0))
        parser.add_argument('--expect', type=int, help='expected component count; fails the verdict otherwise')

    def invoke(self):
        a = self.args
        eta = perturbed_form(resolve_germ(a.germ), a.t)[0] if a.germ else resolve_one_form(a.eta)
        report = dividing_set(eta, tuple(a.center), a.radius)
        self.write_json('dividing_set.json', report.to_json())
        self.logger.info(f'{report.component_count} components: {report.giroux_verdict}')
        return a.expect is None or report.component_count == a.expect


class SurfaceCommand(BaseCommand):
    name = 'surface'
    help = 'singular contact form on S x [-1, 1] from two vector fields on the plane'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--X', default='y, -x', help='planar field "P, Q" for P d/dx + Q d/dy')
        parser.add_argument('--Y', default='x, y', help='planar field "P, Q"')
        parser.add_argument('--orientation', type=int, choices=(1, -1), default=1)

    @staticmethod
    def planar(text):
        return PolyVectorField(*resolve_one_form(f'{text}, 0').components)

    def invoke(self):
        X = self.planar(self.args.X)
        construction = surface_contact_construct(X, self.planar(self.args.Y), self.args.orientation)
        tangency = reeb_tangency_check(construction.eta)
        self.write_json('surface.json', {'construction': construction.to_json(), 'reeb_tangency': tangency})
        divergence_free = X.divergence().is_zero
        return construction.z0_identity_holds() and (tangency['passed'] or not divergence_free)


class TraceCommand(BaseCommand):
    name = 'trace'
    help = 'periodic and zero-connecting orbits of a Reeb-like field'

    @classmethod
    def setup_parser(cls, parser):
        parser.add_argument('--field', choices=('abc', 'lutz', 'germ'), required=True)
        parser.add_argument('--A', type=float, default=1.0)
        parser.add_argument('--B', type=float, default=0.0)
        parser.add_argument('--C', type=float, default=0.0)
        parser.add_argument('--s', type=float, default=0.0)
        parser.add_argument('--t', default='1', help='Lutz parameter or perturbation parameter (rational)')
        parser.add_argument('--germ', help='germ for --field germ')
        parser.add_argument('--radius', type=float, default=1.0, help='ball radius for --field germ')
        parser.add_argument('--seeds', type=int, default=200, help='Sobol seeds for the periodic search')
        parser.add_argument('--t-max', type=float, default=500.0)
        parser.add_argument('--csv', action='store_true', help='write every found orbit as t,x,y,z CSV')

    def field_and_zeros(self):
        a = self.args
        if a.field == 'abc':
            classification = abc_classify(a.A, a.B, a.C)
            return abc_field(a.A, a.B, a.C), [z.location for z in classification.zeros]
        if a.field == 'lutz':
            eta = lutz_family(a.s, float(Fraction(a.t)))
            return eta.reeb_like(), list(eta.singular_points)
        if not a.germ:
            raise ContractViolation("--field germ needs --germ")
        eta, _ = perturbed_form(resolve_germ(a.germ), a.t)
        if contact_defect(eta).sign_verdict == 'indefinite':
            self.logger.warning('The perturbed form has an indefinite defect; tracing its curl anyway')
        field = as_evaluator(PolyVectorField(*ext_d(eta).components), ball(a.radius), 'reeb')
        grid = lattice(field.domain, 9)
        points, converged = newton_zeros(field, grid[np.linalg.norm(grid, axis=-1) < a.radius])
        inside = points[converged & (np.linalg.norm(points, axis=-1) < a.radius)]
        return field, [tuple(p) for p in dedupe_points(inside, field.domain)]

    def invoke(self):
        a = self.args
        field, zeros = self.field_and_zeros()
        seeds = sobol_seeds(field.domain, a.seeds, self.config.seed)
        periodic = detect_periodic(field, seeds, a.t_max, threads=self.config.threads)
        connecting = detect_singular_connecting(field, zeros, threads=self.config.threads)
        if a.csv:
            for k, record in enumerate(periodic + connecting):
                self.write_with(f'orbit_{k}.csv', record.write_csv)
        self.write_json('trace.json', {
            'field': field.name,
            'zeros': [list(map(float, z)) for z in zeros],
            'seeds': len(seeds),
            'periodic': [r.to_json() for r in periodic],
            'connecting': [r.to_json() for r in connecting],
        })
        self.logger.info(f'{len(periodic)} periodic orbits, {len(connecting)} connecting orbits')
        return bool(periodic or connecting)


class VerifyCommand(BaseCommand):
    name = 'verify'
    help = 'run an acceptance suite'

    @classmethod
    def setup_parser(cls, parser):
        from chiralkit.verify import SUITES
        parser.add_argument('--suite', choices=['all'] + [str(n) for n in SUITES], default='all')
        parser.add_argument('--full', action='store_true', help='include the slow resolution-doubling checks')

    def invoke(self):
        from chiralkit.verify import SUITES, run_suite
        numbers = list(SUITES) if self.args.suite == 'all' else [int(self.args.suite)]
        passed = True
        for number in numbers:
            result = run_suite(number, self.config, full=self.args.full)
            self.write_json(f'verify_{number}.json', result.to_json())
            self.logger.info(f'Suite {number} ({result.title}): {"PASS" if result.passed else "FAIL"}')
            passed = passed and result.passed
        return passed


COMMANDS = (AnalyzeCommand, PerturbCommand, SeriesCommand, CheckCommand, MetricCommand, AbcCommand, LutzCommand,
            DivideCommand, SurfaceCommand, TraceCommand, VerifyCommand)
