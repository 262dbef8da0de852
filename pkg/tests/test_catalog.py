import json
import os
import tempfile
import unittest
from fractions import Fraction

from parameterized import parameterized

from chiralkit.catalog import GermCatalog, GermCatalogEntry, load_catalog
from chiralkit.command import perturbed_form, resolve_germ, resolve_one_form
from chiralkit.exceptions import NonCriticalOrigin, ParseError, UnknownGerm
from chiralkit.polyform import X, Y, Z, DifferentialForm, ext_d, parse_one_form


class TestGermCatalog(unittest.TestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_when_loading_the_shipped_catalog_every_germ_is_critical_at_the_origin(self):
        self.assertEqual(1, self.catalog.version)
        self.assertIn('D4minus', self.catalog.names)
        for germ in self.catalog.germs:
            self.assertTrue(all(sum(e) >= 2 for e in germ.polynomial.terms), germ.name)

    @parameterized.expand([('exact', 'Morse1'), ('lower', 'morse1'), ('upper', 'MORSE1')])
    def test_when_looking_up_a_name_the_case_is_ignored(self, name, text):
        self.assertEqual('Morse1', self.catalog.lookup(text).name)
        self.assertIn(text, self.catalog)

    def test_when_the_name_is_unknown_it_lists_the_known_ones(self):
        with self.assertRaises(UnknownGerm) as cm:
            self.catalog.lookup('E8')
        self.assertIn('Morse0', cm.exception.message)
        self.assertEqual('Germ', cm.exception.category)

    def test_when_a_germ_has_a_linear_term_it_is_rejected(self):
        with self.assertRaises(NonCriticalOrigin):
            GermCatalogEntry({'name': 'tilted', 'phi': 'x + y^2'})

    def test_when_a_radius_is_missing_it_defaults_to_one(self):
        self.assertEqual(1.0, self.catalog.lookup('Morse1').sphere_radius)
        self.assertEqual(0.2, self.catalog.lookup('T444').sphere_radius)

    def test_when_a_perturbation_is_listed_it_is_parsed(self):
        entry = self.catalog.lookup('D4minus')
        self.assertEqual(1, entry.nu.degree)
        self.assertIsNone(self.catalog.lookup('Morse1').nu)

    def test_when_serializing_an_entry_it_returns_a_copy_of_its_data(self):
        catalog = GermCatalog({'version': 2, 'germs': [{'name': 'fold', 'phi': 'x^3 + y^2 - z^2'}]})
        data = catalog.to_json()
        data['germs'][0]['name'] = 'changed'
        self.assertEqual('fold', catalog.germs[0].name)
        self.assertIn("name = 'fold'", repr(catalog))


class TestResolveInput(unittest.TestCase):
    def test_when_given_a_catalog_name_it_carries_the_catalog_metadata(self):
        germ = resolve_germ('T444')
        self.assertEqual('T444', germ.name)
        self.assertEqual(-3, germ.expected_index)
        self.assertEqual(0.2, germ.radius)

    def test_when_given_inline_text_it_parses_the_polynomial(self):
        germ = resolve_germ('x^2 - y*z')
        self.assertEqual(X * X - Y * Z, germ.phi)
        self.assertIsNone(germ.name)
        self.assertEqual(1.0, germ.radius)

    def test_when_given_a_term_file_it_reads_the_terms(self):
        with tempfile.TemporaryDirectory() as root:
            filename = os.path.join(root, 'germ.json')
            with open(filename, 'w') as f:
                json.dump({'terms': [[[2, 0, 0], '1/2'], [[0, 0, 2], '-1']]}, f)
            germ = resolve_germ(filename)
        self.assertEqual(X * X / 2 - Z * Z, germ.phi)
        self.assertEqual('germ.json', germ.name)

    def test_when_inline_text_is_malformed_it_raises(self):
        with self.assertRaises(ParseError):
            resolve_germ('x^2 + w')

    def test_when_perturbing_a_catalog_germ_its_own_perturbation_is_used(self):
        germ = resolve_germ('D4minus')
        eta, nu = perturbed_form(germ, '1/100')
        self.assertEqual(germ.perturbation, nu)
        self.assertEqual(eta - nu * Fraction(1, 100), ext_d(DifferentialForm.function(germ.phi)))

    def test_when_perturbing_without_a_listed_perturbation_it_is_constructed(self):
        _, nu = perturbed_form(resolve_germ('Morse1'), '1/2')
        self.assertEqual(DifferentialForm.one_form(Y * Z, -X * Z), nu)

    def test_when_resolving_an_inline_form_it_matches_the_parser(self):
        self.assertEqual(parse_one_form('-y/2, x/2, 1'), resolve_one_form('-y/2, x/2, 1'))
