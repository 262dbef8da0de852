import unittest

from parameterized import parameterized

from chiralkit.util import rng
from chiralkit.verify import SUITES, SuiteResult, exact_algebra_suite, random_polynomial, run_suite
from tests.util import config_fixture


class TestSuiteResult(unittest.TestCase):
    def test_when_a_check_fails_the_suite_fails(self):
        result = SuiteResult(0, 'demo')
        result.check('first', True, value=1)
        self.assertTrue(result.passed)
        with self.assertLogs('chiralkit.verify', level='WARNING'):
            result.check('second', False, value=2)
        self.assertFalse(result.passed)
        self.assertEqual({'value': 2, 'passed': False}, result.to_json()['checks']['second'])


class TestRandomForms(unittest.TestCase):
    def test_when_seeded_alike_the_polynomials_repeat(self):
        self.assertEqual(random_polynomial(rng(9)), random_polynomial(rng(9)))

    def test_when_drawing_polynomials_the_degree_and_coefficients_are_bounded(self):
        p = random_polynomial(rng(1), terms=10)
        self.assertLessEqual(len(p.terms), 10)
        self.assertTrue(all(sum(e) <= 5 for e in p.terms))
        self.assertTrue(all(abs(c.numerator) <= 1000 for c in p.terms.values()))


class TestSuites(unittest.TestCase):
    def setUp(self):
        self.config = config_fixture()

    def test_when_sampling_few_forms_the_identities_hold(self):
        result = exact_algebra_suite(self.config, samples=25)
        self.assertTrue(result.passed, result.checks)

    @parameterized.expand([
        ('morse_normal_form', 2),
        ('beltrami_series', 6),
        ('dividing_sets', 9),
        ('surface_construction', 10),
    ])
    def test_when_running_a_quick_suite_it_passes(self, name, number):
        result = run_suite(number, self.config)
        self.assertEqual(name.replace('_', '-'), result.title)
        self.assertTrue(result.passed, result.checks)

    def test_when_listing_suites_they_are_numbered_one_to_eleven(self):
        self.assertEqual(list(range(1, 12)), sorted(SUITES))
