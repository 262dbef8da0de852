from fractions import Fraction
import unittest

from parameterized import parameterized

from chiralkit.catalog import load_catalog
from chiralkit.chirality import chiral_perturb
from chiralkit.exceptions import ContractViolation, TransversalityFailure, ZeroOnSphere
from chiralkit.polyform import X, Y, Z, DifferentialForm, PolyVectorField, ext_d, parse_one_form
from chiralkit.surface import (dividing_set, level_set_mesh, level_set_topology, reeb_tangency_check,
                               surface_contact_construct)


def germ(name):
    return load_catalog().lookup(name)


def perturbed(name, t=Fraction(1, 100)):
    entry = germ(name)
    nu = entry.nu if entry.nu is not None else chiral_perturb(entry.polynomial)
    return ext_d(DifferentialForm.function(entry.polynomial)) + nu * t


class TestLevelSets(unittest.TestCase):
    @parameterized.expand([
        ('morse0', 'Morse0', 64),
        ('morse1', 'Morse1', 64),
        ('d4_minus', 'D4minus', 128),
    ])
    def test_when_cutting_near_the_critical_value_chi_is_one_plus_minus_k(self, name, germ_name, resolution):
        entry = germ(germ_name)
        topology, plus, minus = level_set_topology(entry.polynomial, 0.01, 1.0, resolution)
        k = entry.expected_index
        self.assertEqual(1 + k, topology['chi_plus'])
        self.assertEqual(1 - k, topology['chi_minus'])
        self.assertTrue(topology['sum_is_two'])
        self.assertEqual(k, topology['index_estimate'])
        self.assertEqual(plus.summary(), topology['F_plus'])

    def test_when_extracting_a_level_set_vertices_carry_phi(self):
        mesh = level_set_mesh(germ('Morse0').polynomial, 0.04, 1.0, 32)
        self.assertLess(abs(mesh.values - 0.04).max(), 5e-3)


class TestDividingSets(unittest.TestCase):
    @parameterized.expand([
        ('morse1', 'Morse1', 2, 'overtwisted'),
        ('d4_minus', 'D4minus', 3, 'overtwisted'),
    ])
    def test_when_tracing_a_germ_sphere_the_component_count_is_known(self, name, germ_name, count, verdict):
        report = dividing_set(perturbed(germ_name))
        self.assertEqual(count, report.component_count)
        self.assertEqual(verdict, report.giroux_verdict)
        self.assertEqual(count, len(report.component_sizes))

    def test_when_the_form_is_standard_the_dividing_set_is_one_circle(self):
        report = dividing_set(parse_one_form('-y/2, x/2, 1'))
        self.assertEqual(1, report.component_count)
        self.assertEqual('tight-neighborhood', report.giroux_verdict)
        self.assertEqual(0.5, report.to_json()['radius'])

    def test_when_the_form_vanishes_on_the_sphere_it_raises(self):
        with self.assertRaises(ZeroOnSphere):
            dividing_set(DifferentialForm.zero(1))

    def test_when_given_something_other_than_a_one_form_it_raises(self):
        with self.assertRaises(ContractViolation):
            dividing_set(DifferentialForm.two_form(X, Y, Z))


class TestSurfaceConstruction(unittest.TestCase):
    def setUp(self):
        self.X = PolyVectorField(Y, -X)
        self.Y = PolyVectorField(X, Y)

    def test_when_rotating_and_expanding_it_recovers_the_normal_form(self):
        construction = surface_contact_construct(self.X, self.Y)
        self.assertEqual(DifferentialForm.one_form(X + Y * Z, Y - X * Z, Z * -2), construction.eta)
        self.assertEqual(Z * -2, construction.u)
        self.assertTrue(construction.z0_identity_holds())

    def test_when_the_orientation_is_reversed_the_identity_still_holds(self):
        construction = surface_contact_construct(self.X, self.Y, orientation=-1)
        self.assertTrue(construction.z0_identity_holds())
        self.assertEqual(-1, construction.to_json()['orientation'])

    def test_when_the_fields_are_parallel_it_raises(self):
        with self.assertRaises(TransversalityFailure):
            surface_contact_construct(self.X, self.X)

    def test_when_a_field_leaves_the_plane_it_raises(self):
        with self.assertRaises(ContractViolation):
            surface_contact_construct(PolyVectorField(Y, -X, Z), self.Y)
        with self.assertRaises(ContractViolation):
            surface_contact_construct(self.X, self.Y, orientation=2)

    def test_when_checking_the_normal_form_the_reeb_field_is_tangent(self):
        construction = surface_contact_construct(self.X, self.Y)
        self.assertTrue(reeb_tangency_check(construction.eta)['passed'])

    def test_when_the_reeb_field_is_vertical_the_check_fails(self):
        result = reeb_tangency_check(parse_one_form('-y/2, x/2, 1'))
        self.assertFalse(result['passed'])
        self.assertAlmostEqual(1.0, result['max_normal_component'])
        self.assertIsNotNone(result['worst_point'])
