from io import StringIO
import math
import unittest

import numpy as np

from chiralkit.exceptions import ContractViolation
from chiralkit.fields import TORUS3, abc_field, as_evaluator, ball, lutz_family, solid_torus
from chiralkit.flow import (Flow, detect_periodic, detect_singular_connecting, hausdorff, integrate, linearize,
                            shoot, sobol_seeds, trace_seed)
from chiralkit.polyform import X, Y, Z, ONE, ZERO, PolyVectorField


def rotation():
    return as_evaluator(PolyVectorField(-Y, X, ZERO))


class TestIntegrate(unittest.TestCase):
    def test_when_the_field_is_constant_the_orbit_moves_at_unit_speed(self):
        record = integrate(PolyVectorField(ONE, ZERO, ZERO), (0.0, 0.0, 0.0), t_max=2.0, stride=0.5)
        np.testing.assert_allclose([0.0, 0.5, 1.0, 1.5, 2.0], record.times)
        self.assertAlmostEqual(2.0, record.points[-1, 0], places=5)
        self.assertEqual('inconclusive', record.verdict)
        self.assertFalse(record.truncated)

    def test_when_integrating_backward_times_are_negative(self):
        record = integrate(PolyVectorField(ONE, ZERO, ZERO), (0.0, 0.0, 0.0), t_max=1.0, stride=0.5, direction=-1)
        self.assertEqual((0.0, -1.0), record.t_span)
        self.assertLess(record.points[-1, 0], -0.99)

    def test_when_the_orbit_leaves_a_ball_it_is_escaping(self):
        field = as_evaluator(PolyVectorField(ONE, ZERO, ZERO), ball(1.0))
        record = integrate(field, (0.0, 0.0, 0.0), t_max=5.0, stride=0.1)
        self.assertEqual('escaping', record.verdict)
        self.assertAlmostEqual(1.0, np.linalg.norm(record.points[-1]), places=6)

    def test_when_the_orbit_runs_into_a_sink_it_stalls(self):
        record = integrate(PolyVectorField(-X, -Y, -Z), (0.5, 0.0, 0.0), t_max=5.0, stride=0.1)
        self.assertTrue(record.stats['stalled'])
        self.assertLess(np.linalg.norm(record.points[-1]), 1e-5)

    def test_when_following_an_abc_orbit_the_field_stays_divergence_free(self):
        record = integrate(abc_field(1.0, 0.5, 0.4), (1.0, 2.0, 3.0), t_max=10.0)
        self.assertLess(record.stats['max_divergence'], 1e-10)
        self.assertEqual(10.0, record.times[-1])

    def test_when_the_time_span_is_not_positive_it_raises(self):
        with self.assertRaises(ContractViolation):
            integrate(rotation(), (1.0, 0.0, 0.0), t_max=0.0)
        with self.assertRaises(ContractViolation):
            integrate(rotation(), (1.0, 0.0, 0.0), stride=-0.1)

    def test_when_writing_csv_it_has_one_row_per_sample(self):
        record = integrate(rotation(), (0.5, 0.0, 0.0), t_max=1.0, stride=0.25)
        stream = StringIO()
        record.write_csv(stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual('t,x,y,z', lines[0])
        self.assertEqual(len(record.times) + 1, len(lines))
        self.assertEqual(len(record.times), record.to_json()['samples'])


class TestPeriodicOrbits(unittest.TestCase):
    def test_when_tracing_a_rotation_it_finds_the_circle(self):
        record = trace_seed(rotation(), (0.5, 0.0, 0.0), t_max=10.0)
        self.assertEqual('periodic', record.verdict)
        self.assertAlmostEqual(math.pi, record.period, places=4)
        self.assertLess(record.closure_residual, 1e-6)
        np.testing.assert_allclose(0.5, np.hypot(record.points[:, 0], record.points[:, 1]), atol=1e-6)

    def test_when_shooting_inside_a_family_of_circles_it_stays_on_the_starting_circle(self):
        shot = shoot(rotation(), (0.5, 0.0, 0.0), 3.0)
        self.assertAlmostEqual(0.5, np.hypot(shot.point[0], shot.point[1]), places=8)
        self.assertAlmostEqual(0.0, shot.point[2], places=8)
        self.assertAlmostEqual(math.pi, shot.period, places=4)
        self.assertLess(shot.closure_residual, 1e-6)

    def test_when_seeds_share_an_orbit_it_is_reported_once(self):
        seeds = [(0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.5, 0.0, 0.3)]
        orbits = detect_periodic(rotation(), seeds, t_max=10.0)
        self.assertEqual(2, len(orbits))

    def test_when_the_lutz_parameter_is_minus_one_the_core_is_periodic(self):
        orbits = detect_periodic(lutz_family(-1.0, 1.0).reeb_like(), [(0.0, 0.0, 0.0)], t_max=30.0)
        self.assertEqual(1, len(orbits))
        self.assertAlmostEqual(2 * math.pi, orbits[0].period, places=3)
        self.assertLess(orbits[0].closure_residual, 1e-6)

    def test_when_the_orbit_ends_in_a_sink_no_periodic_orbit_is_reported(self):
        self.assertEqual([], detect_periodic(PolyVectorField(-X, -Y, -Z), [(0.5, 0.1, 0.0)], t_max=5.0))


class TestSeedsAndDistances(unittest.TestCase):
    def test_when_sampling_a_ball_the_seeds_are_inside_and_deterministic(self):
        seeds = sobol_seeds(ball(0.5), 50, seed=3)
        self.assertEqual((50, 3), seeds.shape)
        self.assertLess(np.linalg.norm(seeds, axis=1).max(), 0.5)
        np.testing.assert_array_equal(seeds, sobol_seeds(ball(0.5), 50, seed=3))

    def test_when_sampling_a_solid_torus_the_angle_covers_the_period(self):
        seeds = sobol_seeds(solid_torus(1.0), 100)
        self.assertLess(np.hypot(seeds[:, 0], seeds[:, 1]).max(), 1.0)
        self.assertGreater(seeds[:, 2].max(), math.pi)

    def test_when_curves_differ_by_a_period_their_distance_is_zero(self):
        flow = Flow(as_evaluator(PolyVectorField(ONE, ZERO, ZERO), TORUS3))
        a = np.array([[0.0, 1.0, 1.0], [0.5, 1.0, 1.0]])
        self.assertAlmostEqual(0.0, hausdorff(flow, a, a + [2 * math.pi, 0.0, 0.0]))

    def test_when_linearizing_a_saddle_it_splits_the_subspaces(self):
        result = linearize(PolyVectorField(X, Y * 2, -Z), (0.0, 0.0, 0.0))
        self.assertEqual((2, 3), result.unstable.shape)
        self.assertEqual((1, 3), result.stable.shape)
        np.testing.assert_allclose([0.0, 1.0, 0.0], np.abs(result.leading_unstable))


class TestConnections(unittest.TestCase):
    def test_when_unfolding_the_fold_the_zeros_are_joined_along_the_axis(self):
        phi = X ** 3 / 3 - X * (Y * Y + Z * Z) / 2 - X / 4 + Y * Y / 2 - Z * Z / 2
        field = as_evaluator(phi, ball(1.0))
        zeros = [(0.5, 0.0, 0.0), (-0.5, 0.0, 0.0)]
        records = detect_singular_connecting(field, zeros, t_max=20.0, stride=0.02)
        self.assertEqual(1, len(records))
        self.assertEqual({'from': 0, 'to': 1}, {k: records[0].limits[k] for k in ('from', 'to')})
        self.assertLess(np.abs(records[0].points[:, 1:]).max(), 1e-8)

    def test_when_the_lutz_parameter_is_zero_both_core_arcs_connect_the_zeros(self):
        eta = lutz_family(0.0, 1.0)
        records = detect_singular_connecting(eta.reeb_like(), eta.singular_points)
        self.assertEqual(2, len(records))
        for record in records:
            self.assertEqual((1, 0), (record.limits['from'], record.limits['to']))
            self.assertLess(record.limits['forward_distance'], 1e-4)
            self.assertEqual(0.0, np.abs(record.points[:, :2]).max())

    def test_when_a_zero_lies_on_a_coordinate_axis_its_eigenvectors_are_exact(self):
        eta = lutz_family(0.0, 1.0)
        result = linearize(eta.reeb_like(), eta.singular_points[1])
        directions = sorted(tuple(np.abs(v)) for v in result.eigen_unstable)
        self.assertEqual([(0.0, 0.0, 1.0), (1.0, 0.0, 0.0)], directions)

    def test_when_there_are_no_zeros_there_are_no_connections(self):
        self.assertEqual([], detect_singular_connecting(rotation(), []))
