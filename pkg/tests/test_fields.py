from io import StringIO
import math
import unittest

import numpy as np
from parameterized import parameterized

from chiralkit.fields import (SLAB, SPACE, TORUS3, Expression, abc_classify, abc_field, as_evaluator, ball,
                              characteristic_foliation, dedupe_points, export_grid_csv, finite_difference_jacobian,
                              gauss_degree, interpolating_piece_foliation, lattice, lutz_core_zeros,
                              lutz_defect_closed_form, lutz_family, lutz_h_profile, lutz_profile_determinant,
                              newton_zeros, solid_torus, tangent_boundary_example)
from chiralkit.polyform import X, Y, Z, DifferentialForm


class TestExpression(unittest.TestCase):
    def setUp(self):
        self.points = np.random.default_rng(3).uniform(-3.0, 3.0, size=(200, 3))

    def test_when_multiplying_trig_terms_it_matches_the_pointwise_product(self):
        e = (Expression.sin(0) + 2.0 * Expression.coordinate(1)) * Expression.cos(2, 3.0)
        x, y, z = self.points.T
        np.testing.assert_allclose((np.sin(x) + 2 * y) * np.cos(3 * z), e.values(self.points), atol=1e-13)

    def test_when_differentiating_it_applies_the_chain_rule(self):
        e = Expression.sin(2, 2.0) * Expression.coordinate(0)
        x, _, z = self.points.T
        np.testing.assert_allclose(2 * x * np.cos(2 * z), e.diff(2).values(self.points), atol=1e-13)
        np.testing.assert_allclose(np.sin(2 * z), e.diff(0).values(self.points), atol=1e-13)

    def test_when_terms_cancel_the_expression_is_zero(self):
        e = Expression.sin(1) * Expression.cos(1) - 0.5 * Expression.sin(1, 2.0)
        self.assertTrue(e.is_zero)

    def test_when_building_from_a_polynomial_it_evaluates_alike(self):
        p = X * X * Y - Z / 3
        np.testing.assert_allclose(p.evaluate_many(self.points),
                                   Expression.from_polynomial(p).values(self.points), atol=1e-12)


class TestDomains(unittest.TestCase):
    def test_when_points_straddle_the_torus_seam_the_displacement_is_minimal(self):
        d = TORUS3.delta([0.1, 0.0, 6.2], [6.2, 0.0, 0.1])
        np.testing.assert_allclose([0.1 + 2 * math.pi - 6.2, 0.0, 6.1 - 2 * math.pi], d, atol=1e-12)

    def test_when_measuring_margins_it_is_signed(self):
        self.assertAlmostEqual(0.5, ball(1.0).margin([0.3, 0.4, 0.0]))
        self.assertLess(solid_torus(1.0).margin([1.0, 1.0, 100.0]), 0)
        self.assertAlmostEqual(0.25, SLAB.margin([9.0, 9.0, 0.75]))
        self.assertEqual(math.inf, SPACE.margin([1e9, 0, 0]))

    def test_when_building_a_lattice_it_respects_periods_and_bounds(self):
        points = lattice(solid_torus(1.0), 4)
        self.assertEqual((64, 3), points.shape)
        self.assertEqual(-1.0, points[:, 0].min())
        self.assertLess(points[:, 2].max(), 2 * math.pi)
        slab = lattice(SLAB, 3)
        self.assertEqual({0.0, 0.5, 1.0}, set(slab[:, 2]))

    def test_when_points_coincide_modulo_the_lattice_they_are_deduplicated(self):
        kept = dedupe_points([[0.0, 1.0, 2.0], [2 * math.pi, 1.0, 2.0 + 1e-9], [1.0, 1.0, 1.0]], TORUS3)
        self.assertEqual(2, len(kept))


class TestEvaluators(unittest.TestCase):
    def test_when_wrapping_a_polynomial_it_uses_the_gradient(self):
        field = as_evaluator(X * X + Y * Z)
        np.testing.assert_allclose([[2.0, 3.0, 2.0]], field([1.0, 2.0, 3.0]))
        self.assertEqual('vector', field.kind)

    def test_when_wrapping_a_one_form_the_defect_matches_the_exact_one(self):
        eta = as_evaluator(DifferentialForm.one_form(-Y / 2, X / 2, Z ** 0))
        np.testing.assert_allclose([1.0, 1.0], eta.defect([[0.1, 0.2, 0.3], [1.0, -1.0, 2.0]]))

    def test_when_wrapping_an_unknown_object_it_raises(self):
        with self.assertRaises(TypeError):
            as_evaluator('x')

    def test_when_comparing_jacobians_the_exact_one_matches_finite_differences(self):
        field = abc_field(1.0, 0.7, 0.4)
        points = np.random.default_rng(5).uniform(0.0, 6.0, size=(20, 3))
        np.testing.assert_allclose(finite_difference_jacobian(field, points), field.jacobian(points), atol=1e-8)

    @parameterized.expand([
        ('source', 1, 1, 1, 1),
        ('saddle', 1, 1, -1, -1),
        ('sink', -1, -1, -1, -1),
    ])
    def test_when_integrating_on_a_sphere_the_degree_is_the_sign_product(self, name, a, b, c, expected):
        raw, low, _ = gauss_degree(X * X * a + Y * Y * b + Z * Z * c, (0.0, 0.0, 0.0), 1.0, 100, 200)
        self.assertAlmostEqual(expected, raw, places=2)
        self.assertGreater(low, 0)

    def test_when_running_newton_from_nearby_seeds_it_converges(self):
        field = as_evaluator(X * X + Y * Y - Z * Z * 2)
        points, converged = newton_zeros(field, [[0.1, -0.05, 0.02]])
        self.assertTrue(converged[0])
        np.testing.assert_allclose([0.0, 0.0, 0.0], points[0], atol=1e-10)


class TestAbc(unittest.TestCase):
    def test_when_taking_the_curl_the_abc_field_is_an_eigenfield(self):
        field = abc_field(1.0, 0.8, 0.6)
        points = np.random.default_rng(11).uniform(0.0, 2 * math.pi, size=(1000, 3))
        np.testing.assert_allclose(field(points), field.curl()(points), atol=1e-12)

    def test_when_b2_plus_c2_is_below_one_there_are_no_zeros(self):
        result = abc_classify(1.0, 0.5, 0.5, seeds_per_axis=8)
        self.assertEqual([], result.zeros)
        self.assertEqual('nonsingular', result.regime)
        self.assertEqual('tight', result.tightness)

    def test_when_b2_plus_c2_exceeds_one_the_zeros_are_morse_with_zero_index_sum(self):
        result = abc_classify(1.0, 0.8, 0.8)
        self.assertEqual('singular', result.regime)
        self.assertEqual('overtwisted', result.tightness)
        self.assertGreater(len(result.zeros), 0)
        self.assertEqual(0, result.index_sum)
        for zero in result.zeros:
            self.assertIn(zero.morse_index, (1, 2))
            np.testing.assert_allclose([0.0, 0.0, 0.0], abc_field(1.0, 0.8, 0.8)(zero.location)[0], atol=1e-10)
        self.assertEqual(len(result.zeros), result.to_json()['zero_count'])


    def test_when_the_field_does_not_depend_on_y_its_zeros_form_closed_curves(self):
        result = abc_classify(1.0, 1.0, 0.0, seeds_per_axis=8)
        self.assertEqual([], result.zeros)
        self.assertEqual(2, len(result.zero_curves))
        self.assertEqual('degenerate-boundary', result.regime)
        self.assertEqual('tight', result.tightness)
        field = abc_field(1.0, 1.0, 0.0)
        for curve in result.zero_curves:
            self.assertTrue(curve.closed)
            self.assertAlmostEqual(2 * math.pi, curve.length, places=6)
            np.testing.assert_allclose(curve.points[0, [0, 2]], curve.points[:, [0, 2]], atol=1e-9)
            np.testing.assert_allclose(0.0, field(curve.points), atol=1e-10)
        self.assertEqual(2, len(result.to_json()['zero_curves']))

    def test_when_b_equals_c_on_the_boundary_the_degenerate_zeros_are_isolated(self):
        b = math.sqrt(0.5)
        result = abc_classify(1.0, b, b, seeds_per_axis=8)
        self.assertEqual([], result.zero_curves)
        self.assertEqual(4, len(result.zeros))
        self.assertEqual('degenerate-boundary', result.regime)


class TestLutz(unittest.TestCase):
    @parameterized.expand([
        ('below', -1.0, 0),
        ('edge_low', -0.5, 1),
        ('middle', 0.0, 2),
        ('edge_high', 0.5, 1),
        ('above', 1.0, 0),
    ])
    def test_when_varying_s_the_core_zero_count_follows_cos_z_equals_2s(self, name, s, count):
        zeros = lutz_core_zeros(s)
        self.assertEqual(count, len(zeros))
        eta = lutz_family(s, 1.0)
        for zero in zeros:
            np.testing.assert_allclose([0.0, 0.0, 0.0], eta(zero)[0], atol=1e-12)

    def test_when_evaluating_the_defect_it_matches_the_closed_form(self):
        generator = np.random.default_rng(2)
        points = np.column_stack([generator.uniform(-0.7, 0.7, (500, 2)), generator.uniform(0, 2 * math.pi, 500)])
        for s, t in ((-1.0, 0.5), (0.0, 1.0), (0.25, 2.0)):
            np.testing.assert_allclose(lutz_defect_closed_form(s, t, points), lutz_family(s, t).defect(points),
                                       atol=1e-12)

    def test_when_away_from_the_core_zeros_the_defect_is_positive(self):
        points = lattice(solid_torus(1.0), 6)
        self.assertGreater(lutz_family(-1.0, 1.0).defect(points).min(), 0)

    def test_when_differentiating_the_profile_the_determinant_is_positive(self):
        r, det = lutz_profile_determinant(2000)
        self.assertTrue(np.all(det > 0))
        h1, h2 = lutz_h_profile(np.array([0.05, 0.95]))
        np.testing.assert_allclose([-1.0, 1.0], np.sign(h1))

    def test_when_computing_foliations_the_directions_are_unit(self):
        a, b = characteristic_foliation(lutz_family(0.0, 1.0), 0.5, np.linspace(0, 6, 7), 1.0)
        np.testing.assert_allclose(np.ones(7), np.hypot(a, b))
        a, b = interpolating_piece_foliation(np.array([0.5, 1.0]))
        np.testing.assert_allclose([1.0, 1.0], np.hypot(a, b))
        self.assertEqual(0.0, b[0])


class TestTangentBoundary(unittest.TestCase):
    def test_when_evaluating_the_defect_it_is_minus_sin_squared(self):
        eta = tangent_boundary_example()
        points = lattice(SLAB, 5)
        np.testing.assert_allclose(-np.sin(points[:, 2]) ** 2, eta.defect(points), atol=1e-14)

    def test_when_exporting_a_grid_it_writes_a_header_and_one_row_per_point(self):
        stream = StringIO()
        points = lattice(SLAB, 2)
        export_grid_csv(tangent_boundary_example(), points, stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual('x,y,z,ex,ey,ez', lines[0])
        self.assertEqual(9, len(lines))
