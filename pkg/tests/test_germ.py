from fractions import Fraction
import unittest

from parameterized import parameterized

from chiralkit.catalog import load_catalog
from chiralkit.exceptions import NonCriticalOrigin
from chiralkit.germ import (a2_family, analyze_germ, beltrami_obstruction, beltrami_verdict, chirality_verdict,
                            degree_by_preimages, fold_critical_points, fold_germ, harmonic_part,
                            has_spherical_level_sets, hessian_at_origin, numeric_index)
from chiralkit.polyform import X, Y, Z, gradient, laplacian, parse_polynomial


def germ(name):
    return load_catalog().lookup(name).polynomial


class TestHessian(unittest.TestCase):
    def test_when_the_germ_is_morse_it_reports_the_morse_index(self):
        hessian = hessian_at_origin(germ('Morse1'))
        self.assertEqual(0, hessian.corank)
        self.assertEqual(1, hessian.morse_index)
        self.assertEqual(0, hessian.trace)

    def test_when_the_germ_is_d4_minus_it_has_corank_two_and_trace_one(self):
        hessian = hessian_at_origin(germ('D4minus'))
        self.assertEqual(2, hessian.corank)
        self.assertEqual(Fraction(1), hessian.trace)
        self.assertEqual('not-Morse', hessian.morse_index)

    def test_when_the_origin_is_not_critical_it_raises(self):
        with self.assertRaises(NonCriticalOrigin):
            hessian_at_origin(X + Y * Y)


class TestObstructions(unittest.TestCase):
    @parameterized.expand([
        ('definite', 'x^2 + y^2 + z^2', 'spherical-level-sets', 'not-beltrami'),
        ('a3', 'x^4 + y^2 + z^2', 'spherical-level-sets', 'not-beltrami'),
        ('d4_minus', 'x^2*y - y^3/3 + z^2/2', 'corank2', 'not-beltrami'),
        ('cubic_fold', 'x^3 + y^2 + z^2', 'nonzero-trace', 'not-beltrami'),
        ('harmonic_morse', 'x^2/2 + y^2/2 - z^2', 'none-found', 'beltrami'),
        ('harmonic_fold', 'x^3/3 - x*y^2/2 - x*z^2/2 + y^2/2 - z^2/2', 'none-found', 'beltrami'),
        ('t444', 'x^4 + y^4 + z^4 + x*y*z', 'none-found', 'undetermined'),
    ])
    def test_when_checking_obstructions_it_returns_the_first_that_applies(self, name, text, obstruction, verdict):
        phi = parse_polynomial(text)
        self.assertEqual(obstruction, beltrami_obstruction(phi))
        self.assertEqual(verdict, beltrami_verdict(phi))

    def test_when_the_kernel_restriction_has_odd_order_level_sets_are_not_spheres(self):
        self.assertFalse(has_spherical_level_sets(X ** 3 + Y * Y + Z * Z))
        self.assertTrue(has_spherical_level_sets(-X ** 4 - Y * Y - Z * Z))

    def test_when_the_germ_has_spherical_level_sets_it_is_achiral(self):
        self.assertEqual('achiral-spherical', chirality_verdict(germ('Morse0')))

    def test_when_the_germ_is_harmonic_and_indefinite_it_is_chiral(self):
        self.assertEqual('chiral', chirality_verdict(germ('Morse1')))


class TestIndex(unittest.TestCase):
    @parameterized.expand([
        ('plus_plus_plus', 1, 1, 1),
        ('plus_plus_minus', 1, 1, -1),
        ('plus_minus_minus', 1, -1, -1),
        ('minus_minus_minus', -1, -1, -1),
    ])
    def test_when_the_field_is_a_morse_gradient_the_index_is_the_sign_product(self, name, a, b, c):
        result = numeric_index(gradient(X * X * a + Y * Y * b + Z * Z * c))
        self.assertEqual(a * b * c, result.index)
        self.assertLess(result.residual, 0.05)

    def test_when_the_germ_is_d4_minus_the_index_is_minus_two(self):
        result = numeric_index(gradient(germ('D4minus')))
        self.assertEqual(-2, result.index)

    def test_when_the_germ_is_t444_the_index_on_a_small_sphere_is_minus_three(self):
        result = numeric_index(gradient(germ('T444')), radius=0.2)
        self.assertEqual(-3, result.index)

    def test_when_counting_preimages_it_agrees_with_the_quadrature(self):
        degree, counts = degree_by_preimages(gradient(germ('D4minus')))
        self.assertEqual(-2, degree)
        self.assertEqual(5, len(counts))


class TestFamilies(unittest.TestCase):
    def test_when_building_the_a2_family_every_member_is_harmonic(self):
        for a in (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1)):
            self.assertTrue(laplacian(a2_family(a)).is_zero)

    def test_when_the_a2_parameter_is_half_it_is_the_catalog_fold(self):
        self.assertEqual(germ('A2'), a2_family())

    def test_when_unfolding_the_fold_the_critical_point_count_follows_the_sign(self):
        self.assertEqual([], fold_critical_points(1))
        self.assertEqual([(0.0, 0.0, 0.0)], fold_critical_points(0))
        points = fold_critical_points(-3)
        self.assertEqual([(0.0, 0.0, -1.0), (0.0, 0.0, 1.0)], points)
        for point in points:
            grad = [float(c.evaluate(point)) for c in gradient(fold_germ(-3)).components]
            self.assertEqual([0.0, 0.0, 0.0], grad)

    def test_when_projecting_to_harmonics_the_laplacian_vanishes(self):
        p = X ** 2 * Y + Z ** 4
        self.assertTrue(laplacian(harmonic_part(p)).is_zero)


class TestAnalyzeGerm(unittest.TestCase):
    def test_when_analyzing_morse1_the_report_is_consistent(self):
        report = analyze_germ(germ('Morse1'), name='Morse1', expected_index=-1)
        self.assertTrue(report.index_matches_expected)
        self.assertTrue(report.harmonic)
        self.assertEqual(1, report.morse_index)
        self.assertEqual('chiral', report.chirality_verdict)
        self.assertEqual('beltrami', report.beltrami_verdict)
        data = report.to_json()
        self.assertEqual('0/1', data['hessian_trace'])
        self.assertEqual('0', data['laplacian'])
