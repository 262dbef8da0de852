"""
=======
flow.py
=======

Orbit tracing for Reeb-like and Beltrami fields. Trajectories follow the
normalized field with scipy's DOP853 integrator; periodic orbits are found
by recurrence and then refined by Newton shooting on a Poincare section;
orbits connecting zeros are searched for along the unstable manifolds of
the zeros.

Periodic coordinates are integrated unwrapped and compared through the
domain's minimal-image displacement.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.stats import qmc

from chiralkit.exceptions import ContractViolation
from chiralkit.fields import TWO_PI, as_evaluator
from chiralkit.metriclab import orthonormal_frame
from chiralkit.util import ordered_map

logger = logging.getLogger(__name__)

VERDICTS = ('periodic', 'singular-connecting', 'escaping', 'inconclusive')

SATURATION = 1e-3
STALL_SPEED = 1e-6
CLOSURE_LIMIT = 1e-6
APPROACH_LIMIT = 1e-4
RECURRENCE_EPS = 1e-4
CAPTURE_RADIUS = 1e-2
DEDUPE_DISTANCE = 1e-3
REPRODUCIBILITY_OFFSET = 1e-6
PERIOD_AGREEMENT = 1e-3
DENSE_STRIDE = 2.5e-4
# Singular values of DP - I below this are neutral directions of the return map
NEUTRAL_SINGULAR = 1e-3
EIGENVECTOR_SNAP = 1e-12


@dataclass
class OrbitRecord:
    """
    A traced orbit.

    Attributes
    ----------
    seed : tuple
        starting point
    times : numpy.ndarray
        sample times (negative for backward legs)
    points : numpy.ndarray
        samples at ``times``, unwrapped
    verdict : string
        one of VERDICTS
    period : float
        for periodic verdicts
    closure_residual : float
        |P(p) - p| of the refined return map, for periodic verdicts
    limits : dict
        for singular-connecting verdicts: zero indices and approach distances
    stats : dict
        integrator statistics; ``step_failure`` marks truncated trajectories
    """
    seed: tuple
    times: np.ndarray
    points: np.ndarray
    verdict: str = 'inconclusive'
    period: float = None
    closure_residual: float = None
    limits: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def t_span(self):
        if len(self.times) == 0:
            return (0.0, 0.0)
        return (float(self.times[0]), float(self.times[-1]))

    @property
    def truncated(self):
        return bool(self.stats.get('step_failure'))

    def to_json(self):
        return {
            'seed': [float(v) for v in self.seed],
            't_span': list(self.t_span),
            'samples': int(len(self.times)),
            'verdict': self.verdict,
            'period': self.period,
            'closure_residual': self.closure_residual,
            'limits': self.limits,
            'stats': self.stats,
        }

    def write_csv(self, stream):
        """Writes ``t,x,y,z`` rows."""
        stream.write('t,x,y,z\n')
        np.savetxt(stream, np.column_stack([self.times, self.points]), fmt='%.17g', delimiter=',')


class Flow(object):
    """
    The flow of a field on its domain at speed |X| / sqrt(|X|^2 + 1e-6): unit
    speed away from zeros and smooth through them, so approaches to a zero
    slow down instead of overshooting it.
    """

    def __init__(self, field, normalize=True):
        self.field = as_evaluator(field)
        self.domain = self.field.domain
        self.normalize = normalize

    def velocity(self, point):
        v = self.field(point)[0]
        if self.normalize:
            v = v / math.sqrt(float(v @ v) + SATURATION ** 2)
        return v

    def distance(self, a, b):
        return np.linalg.norm(self.domain.delta(a, b), axis=-1)

    def embed(self, points):
        """Periodic axes mapped onto circles, so Euclidean distances respect the periods."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        columns = []
        for axis, period in enumerate(self.domain.periods):
            values = points[:, axis]
            if period:
                scale = period / TWO_PI
                columns.extend([scale * np.cos(values / scale), scale * np.sin(values / scale)])
            else:
                columns.append(values)
        return np.column_stack(columns)

    def events(self, escape_radius=None):
        def stall(t, p):
            return float(np.linalg.norm(self.field(p)[0])) - STALL_SPEED
        stall.terminal, stall.direction = True, -1
        events = [stall]
        if self.domain.kind in ('ball', 'solid-torus', 'slab'):
            def leave(t, p):
                return self.domain.margin(p)
            leave.terminal, leave.direction = True, -1
            events.append(leave)
        if escape_radius:
            def escape(t, p):
                return escape_radius - float(np.linalg.norm(p))
            escape.terminal, escape.direction = True, -1
            events.append(escape)
        return events

    def solve(self, seed, t_max, tol, direction=1, t_eval=None, events=(), dense_output=False):
        return solve_ivp(lambda t, p: direction * self.velocity(p), (0.0, t_max),
                         np.asarray(seed, dtype=float), method='DOP853', rtol=tol, atol=tol,
                         t_eval=t_eval, events=list(events) or None, dense_output=dense_output)


def _as_flow(field):
    return field if isinstance(field, Flow) else Flow(field)


def integrate(field, seed, t_max=500.0, tol=1e-9, stride=0.05, direction=1, escape_radius=None):
    """
    Integrates one trajectory of the normalized field.

    Stops early when the field stalls (|X| < 1e-6), when the orbit leaves a
    bounded domain, or beyond ``escape_radius``. A failing integrator does not
    raise: the truncated trajectory comes back with ``stats['step_failure']``.
    ``stats['max_divergence']`` is the largest |div X| over the samples.

    Parameters
    ----------
    field : FieldEvaluator, PolyVectorField or Flow
    seed : point
    t_max : float
    tol : float
        relative and absolute local error tolerance
    stride : float
        output sampling interval
    direction : int
        +1 forward, -1 backward in time

    Returns
    -------
    OrbitRecord
        verdict 'escaping' if it left the domain, 'inconclusive' otherwise
    """
    if t_max <= 0 or stride <= 0:
        raise ContractViolation(f'integrate needs positive t_max and stride, got {t_max} and {stride}')
    flow = _as_flow(field)
    seed = np.asarray(seed, dtype=float)
    t_eval = np.arange(0.0, t_max, stride)
    if t_eval[-1] < t_max:
        t_eval = np.append(t_eval, t_max)
    sol = flow.solve(seed, t_max, tol, direction, t_eval, flow.events(escape_radius))

    times, points = sol.t, sol.y.T
    t_events = sol.t_events or []
    stalled = len(t_events) > 0 and len(t_events[0]) > 0
    escaped = any(len(e) > 0 for e in t_events[1:])
    for t_hit, y_hit in zip(t_events, sol.y_events or []):
        if len(t_hit) and (len(times) == 0 or t_hit[0] > times[-1]):
            times = np.append(times, t_hit[0])
            points = np.vstack([points, y_hit[0]])
    if sol.status == -1:
        logger.warning('Integration from %s stopped at t = %g: %s', seed.tolist(), times[-1], sol.message)
    stats = {
        'nfev': int(sol.nfev),
        'status': int(sol.status),
        'message': str(sol.message),
        'stalled': bool(stalled),
        'step_failure': bool(sol.status == -1 or stalled),
        'max_divergence': float(np.abs(flow.field.divergence(points)).max()) if len(points) else 0.0,
    }
    verdict = 'escaping' if escaped else 'inconclusive'
    return OrbitRecord(tuple(seed.tolist()), direction * times, points, verdict, stats=stats)


@dataclass
class Section:
    """The plane through ``origin`` normal to the flow there, with coordinates on e1, e2."""
    origin: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    radius: float = 0.5

    @classmethod
    def through(cls, flow, point):
        point = np.asarray(point, dtype=float)
        v = flow.velocity(point)
        normal = v / np.linalg.norm(v)
        e1, e2 = orthonormal_frame(normal)
        return cls(point, normal, e1, e2)

    def point(self, u):
        return self.origin + u[0] * self.e1 + u[1] * self.e2

    def coordinates(self, displacement):
        return np.array([displacement @ self.e1, displacement @ self.e2])


def return_map(flow, section, u, t_guess, tol=1e-11):
    """
    First return of the section point ``u`` to the section, crossing in the
    flow direction after at least half of ``t_guess``.

    Returns
    -------
    (numpy.ndarray, float) or None
        the returning section coordinates and the return time; None when no
        return happens before 2 t_guess + 1
    """
    start = section.point(u)
    sol = flow.solve(start, 2.0 * t_guess + 1.0, tol, dense_output=True)
    if sol.status == -1 or sol.sol is None:
        return None

    def height(t):
        return float(flow.domain.delta(sol.sol(t), section.origin) @ section.normal)

    grid = np.unique(np.concatenate([sol.t, np.linspace(0.0, sol.t[-1], 400)]))
    grid = grid[grid >= 0.5 * t_guess]
    if len(grid) < 2:
        return None
    deltas = flow.domain.delta(sol.sol(grid).T, section.origin)
    heights = deltas @ section.normal
    near = np.linalg.norm(deltas, axis=-1) < section.radius
    for k in range(1, len(grid)):
        if heights[k - 1] < 0 <= heights[k] and near[k - 1] and near[k]:
            period = brentq(height, grid[k - 1], grid[k], xtol=1e-14)
            return section.coordinates(flow.domain.delta(sol.sol(period), section.origin)), period
    return None


@dataclass
class ShootingResult:
    point: np.ndarray
    period: float
    closure_residual: float
    section: Section


def _newton_step(jacobian, residual):
    """Least-squares step restricted to singular values >= NEUTRAL_SINGULAR; zero when none qualify."""
    u, singular, vt = np.linalg.svd(jacobian)
    keep = singular >= NEUTRAL_SINGULAR
    return vt[keep].T @ ((u[:, keep].T @ -residual) / singular[keep])


def shoot(field, point, t_guess, tol=1e-11, max_iter=20, h=1e-7):
    """
    Newton iteration on P(u) - u for the return map P of the section through
    ``point``, with a forward-difference jacobian. Directions in which DP - I
    is nearly singular (orbits inside a family of periodic orbits) are not
    corrected, so the iteration stays on the orbit it started from.

    Returns
    -------
    ShootingResult or None
        None when a return map evaluation fails or a Newton step leaves the section disk
    """
    flow = _as_flow(field)
    section = Section.through(flow, point)
    u = np.zeros(2)
    period = t_guess
    for _ in range(max_iter):
        first = return_map(flow, section, u, period, tol)
        if first is None:
            return None
        image, period = first
        residual = image - u
        if np.linalg.norm(residual) < 1e-12:
            break
        columns = []
        for e in np.eye(2):
            shifted = return_map(flow, section, u + h * e, period, tol)
            if shifted is None:
                return None
            columns.append((shifted[0] - image) / h)
        step = _newton_step(np.column_stack(columns) - np.eye(2), residual)
        if not step.any():
            break
        if np.linalg.norm(u + step) > section.radius:
            return None
        u = u + step
    else:
        last = return_map(flow, section, u, period, tol)
        if last is None:
            return None
        image, period = last
        residual = image - u
    return ShootingResult(section.point(u), float(period), float(np.linalg.norm(residual)), section)


def _recurrence(flow, trajectory, stride, capture=CAPTURE_RADIUS):
    """
    A sample returning near an earlier one with aligned velocity: returns
    (reference point, return time, sampled distance) or None.
    """
    points, times = trajectory.points, trajectory.times
    n = len(points)
    if n < 20:
        return None
    min_gap = 10 * stride
    for i in sorted({0, n // 4, n // 2}):
        distances = flow.distance(points[i:], points[i])
        gaps = times[i:] - times[i]
        candidates = np.flatnonzero((gaps >= min_gap) & (distances < capture + stride))
        if len(candidates) == 0:
            continue
        j = candidates[0]
        while j + 1 < len(distances) and distances[j + 1] < distances[j]:
            j += 1
        if flow.velocity(points[i]) @ flow.velocity(points[i + j]) > 0.9:
            return points[i], float(gaps[j]), float(distances[j])
    return None


def _sample_orbit(flow, point, period):
    n = max(200, int(math.ceil(period / DENSE_STRIDE)))
    times = np.linspace(0.0, period, n)
    sol = flow.solve(point, period, 1e-11, t_eval=times)
    return sol.t, sol.y.T


def trace_seed(field, seed, t_max=500.0, tol=1e-9, stride=0.05):
    """
    Integrates from ``seed`` and, on recurrence, refines a periodic orbit by
    shooting. The periodic verdict needs closure < 1e-6, period > 10 strides
    and a reproducible period from a seed offset by 1e-6.

    Returns
    -------
    OrbitRecord
    """
    flow = _as_flow(field)
    trajectory = integrate(flow, seed, t_max, tol, stride)
    if trajectory.verdict == 'escaping':
        return trajectory
    found = _recurrence(flow, trajectory, stride)
    if found is None:
        return trajectory
    reference, t_guess, distance = found
    trajectory.stats['recurrence_distance'] = distance
    trajectory.stats['recurrence_within_eps'] = distance < RECURRENCE_EPS
    shot = shoot(flow, reference, t_guess)
    if shot is None or shot.closure_residual >= CLOSURE_LIMIT or shot.period <= 10 * stride:
        return trajectory

    perturbed = shoot(flow, shot.point + REPRODUCIBILITY_OFFSET * shot.section.e1, shot.period)
    if perturbed is None or abs(perturbed.period - shot.period) / shot.period >= PERIOD_AGREEMENT:
        logger.info('Periodic candidate of period %g from %s is not reproducible; kept inconclusive',
                    shot.period, list(trajectory.seed))
        trajectory.stats['downgraded'] = True
        return trajectory

    times, points = _sample_orbit(flow, shot.point, shot.period)
    stats = dict(trajectory.stats, reproduced_period=perturbed.period)
    return OrbitRecord(trajectory.seed, times, points, 'periodic', shot.period, shot.closure_residual,
                       stats=stats)


def hausdorff(flow, a, b):
    """Hausdorff distance between two sampled curves, periodic axes respected."""
    ea, eb = flow.embed(a), flow.embed(b)
    return max(float(cKDTree(eb).query(ea)[0].max()), float(cKDTree(ea).query(eb)[0].max()))


def dedupe_orbits(flow, records, distance=DEDUPE_DISTANCE):
    distinct = []
    for record in records:
        if all(hausdorff(flow, record.points, other.points) >= distance for other in distinct):
            distinct.append(record)
    return distinct


def sobol_seeds(domain, n=200, seed=0):
    """
    ``n`` scrambled Sobol points in the domain (rejection-sampled into balls and
    disk factors), deterministic in ``seed``.
    """
    sampler = qmc.Sobol(d=3, scramble=True, seed=seed)
    u = sampler.random_base2(max(1, int(math.ceil(math.log2(8 * max(n, 1))))))
    if domain.kind == 'torus':
        points = TWO_PI * u
    elif domain.kind == 'slab':
        low, high = domain.z_range
        points = np.column_stack([TWO_PI * u[:, 0], TWO_PI * u[:, 1], low + (high - low) * u[:, 2]])
    elif domain.kind == 'ball':
        points = domain.radius * (2.0 * u - 1.0)
        points = points[np.linalg.norm(points, axis=-1) < 0.999 * domain.radius]
    elif domain.kind == 'solid-torus':
        disk = domain.radius * (2.0 * u[:, :2] - 1.0)
        points = np.column_stack([disk, TWO_PI * u[:, 2]])
        points = points[np.hypot(points[:, 0], points[:, 1]) < 0.999 * domain.radius]
    else:
        points = 2.0 * u - 1.0
    return points[:n]


def detect_periodic(field, seeds=None, t_max=500.0, tol=1e-9, stride=0.05, threads=1, seed=0):
    """
    Periodic orbits through a seed set, deduplicated by Hausdorff distance < 1e-3.

    Parameters
    ----------
    field : FieldEvaluator, PolyVectorField or Flow
    seeds : array-like, optional
        Starting points; 200 Sobol points in the field's domain by default
    threads : int
        Seeds are traced concurrently and merged in seed order

    Returns
    -------
    list of OrbitRecord
        periodic verdicts only; an empty list is a valid answer
    """
    flow = _as_flow(field)
    seeds = sobol_seeds(flow.domain, 200, seed) if seeds is None else np.atleast_2d(seeds)
    records = ordered_map(lambda p: trace_seed(flow, p, t_max, tol, stride), list(seeds), threads)
    periodic = [r for r in records if r.verdict == 'periodic']
    distinct = dedupe_orbits(flow, periodic)
    logger.info('Traced %d seeds: %d periodic records, %d distinct orbits', len(seeds), len(periodic), len(distinct))
    return distinct


@dataclass
class Linearization:
    """
    The invariant subspaces of a zero: orthonormal bases, rows are vectors.
    ``eigen_unstable`` holds the real unstable eigenvectors with round-off
    components zeroed, so invariant coordinate lines are followed exactly.
    """
    point: np.ndarray
    unstable: np.ndarray
    stable: np.ndarray
    leading_unstable: np.ndarray = None
    eigen_unstable: list = field(default_factory=list)


def _snap(vector):
    vector = np.where(np.abs(vector) < EIGENVECTOR_SNAP * np.abs(vector).max(), 0.0, vector)
    return vector / np.linalg.norm(vector)


def _real_basis(values, vectors, mask):
    columns = []
    for k in np.flatnonzero(mask):
        if abs(values[k].imag) <= 1e-12:
            columns.append(vectors[:, k].real)
        elif values[k].imag > 0:
            columns.extend([vectors[:, k].real, vectors[:, k].imag])
    if not columns:
        return np.zeros((0, 3))
    q, _ = np.linalg.qr(np.column_stack(columns))
    return q.T


def linearize(field, zero, tol=1e-9):
    flow = _as_flow(field)
    zero = np.asarray(zero, dtype=float)
    values, vectors = np.linalg.eig(flow.field.jacobian(zero)[0])
    unstable = _real_basis(values, vectors, values.real > tol)
    stable = _real_basis(values, vectors, values.real < -tol)
    leading = None
    if np.any(values.real > tol):
        k = int(np.argmax(values.real))
        leading = vectors[:, k].real / np.linalg.norm(vectors[:, k].real)
    eigen = [_snap(vectors[:, k].real) for k in np.flatnonzero(values.real > tol) if abs(values[k].imag) <= 1e-12]
    return Linearization(zero, unstable, stable, leading, eigen)


def _leg(flow, start, t_max, tol, stride, direction=1):
    return integrate(flow, start, t_max, tol, stride, direction)


def _approach(flow, record, zero, after_leaving=False):
    """
    Smallest distance from the orbit to ``zero`` and the sample index where it
    occurs; when ``zero`` is the source zero, only after the orbit left it.
    """
    distances = flow.distance(record.points, zero)
    offset = 0
    if after_leaving:
        away = np.flatnonzero(distances > 0.1)
        if len(away) == 0:
            return math.inf, None
        offset = int(away[0])
    closest = offset + int(np.argmin(distances[offset:]))
    return float(distances[closest]), closest


def _exit_side(flow, record, target, capture):
    """
    +1 / -1 for the side along the target's leading unstable direction on
    which the orbit leaves the capture ball; 0 when it stalls inside it;
    None when it never enters or never leaves.
    """
    distances = flow.distance(record.points, target.point)
    inside = np.flatnonzero(distances < capture)
    if len(inside) == 0 or target.leading_unstable is None:
        return None
    if distances.min() < APPROACH_LIMIT:
        return 0
    entry = inside[0]
    outside = np.flatnonzero(distances[entry:] >= capture)
    if len(outside) == 0:
        return None
    exit_point = record.points[entry + outside[0]]
    projection = flow.domain.delta(exit_point, target.point) @ target.leading_unstable
    return 1 if projection > 0 else -1


def _connection_record(flow, source_index, start, forward, zeros, t_max, tol, stride):
    """Both legs end at their closest approach: the limit zero, not the round-off drift past it."""
    targets = [(j,) + _approach(flow, forward, z, after_leaving=j == source_index) for j, z in enumerate(zeros)]
    target, forward_distance, forward_end = min(targets, key=lambda item: item[1])
    if forward_distance >= APPROACH_LIMIT:
        return None
    backward = _leg(flow, start, t_max, tol, stride, direction=-1)
    backward_distance, backward_end = _approach(flow, backward, zeros[source_index])
    if backward_distance >= APPROACH_LIMIT:
        return None
    times = np.concatenate([backward.times[backward_end::-1], forward.times[1:forward_end + 1]])
    points = np.vstack([backward.points[backward_end::-1], forward.points[1:forward_end + 1]])
    limits = {'from': int(source_index), 'to': int(target),
              'backward_distance': backward_distance, 'forward_distance': forward_distance}
    stats = {'forward': forward.stats, 'backward': backward.stats}
    return OrbitRecord(tuple(float(v) for v in start), times, points, 'singular-connecting',
                       limits=limits, stats=stats)


def _search_from_zero(flow, index, zeros, linearizations, radius, n_angles, t_max, tol, stride, capture,
                      bisect_iter):
    source = linearizations[index]
    basis = source.unstable
    if len(basis) == 0:
        return []

    def start_at(direction):
        return source.point + radius * direction

    found = []
    for eigenvector in source.eigen_unstable or list(basis[:1]):
        for start in (start_at(eigenvector), start_at(-eigenvector)):
            record = _connection_record(flow, index, start, _leg(flow, start, t_max, tol, stride),
                                        zeros, t_max, tol, stride)
            if record is not None:
                found.append(record)
    if len(basis) == 1:
        return found

    def direction(theta):
        return math.cos(theta) * basis[0] + math.sin(theta) * basis[1]

    angles = [TWO_PI * m / n_angles for m in range(n_angles)]
    legs = [_leg(flow, start_at(direction(theta)), t_max, tol, stride) for theta in angles]
    for theta, leg in zip(angles, legs):
        record = _connection_record(flow, index, start_at(direction(theta)), leg, zeros, t_max, tol, stride)
        if record is not None:
            found.append(record)

    for j, target in enumerate(linearizations):
        if j == index:
            continue
        sides = [_exit_side(flow, leg, target, capture) for leg in legs]
        for m in range(n_angles):
            low_side, high_side = sides[m], sides[(m + 1) % n_angles]
            if low_side is None or high_side is None or low_side == 0 or high_side == 0 or low_side == high_side:
                continue
            low, high = angles[m], angles[m] + TWO_PI / n_angles
            leg = None
            for _ in range(bisect_iter):
                middle = 0.5 * (low + high)
                leg = _leg(flow, start_at(direction(middle)), t_max, tol, stride)
                side = _exit_side(flow, leg, target, capture)
                if side is None or side == 0:
                    break
                if side == low_side:
                    low = middle
                else:
                    high = middle
            if leg is None:
                continue
            record = _connection_record(flow, index, start_at(direction(middle)), leg, zeros, t_max, tol, stride)
            if record is not None:
                found.append(record)
            else:
                logger.debug('Bisection toward zero %d from zero %d ended at angle %.15g without a connection',
                             j, index, middle)
    return found


def detect_singular_connecting(field, zeros, seeds=None, t_max=100.0, tol=1e-10, stride=0.01, radius=1e-3,
                               n_angles=16, capture=0.25, bisect_iter=40, threads=1):
    """
    Orbits that approach zeros of the field in both time directions.

    Orbits start on a sphere of ``radius`` around each zero, along its
    unstable eigendirections: both branches along every real unstable
    eigenvector, plus a circle of ``n_angles`` directions in a 2-dimensional
    unstable manifold.
    Between neighbouring angles whose orbits pass another zero on opposite
    sides of its leading unstable direction, the angle is bisected toward
    that zero's stable manifold. Optional ``seeds`` are integrated both ways
    as well.

    Returns
    -------
    list of OrbitRecord
        'singular-connecting' records with limits ``from``/``to`` (indices
        into ``zeros``) and approach distances < 1e-4, deduplicated
    """
    flow = _as_flow(field)
    zeros = [np.asarray(z, dtype=float) for z in zeros]
    if not zeros:
        return []
    linearizations = [linearize(flow, z) for z in zeros]

    def search(index):
        return _search_from_zero(flow, index, zeros, linearizations, radius, n_angles, t_max, tol, stride,
                                 capture, bisect_iter)

    records = [r for found in ordered_map(search, range(len(zeros)), threads) for r in found]

    for seed in ([] if seeds is None else np.atleast_2d(seeds)):
        forward = _leg(flow, seed, t_max, tol, stride)
        backward = _leg(flow, seed, t_max, tol, stride, direction=-1)
        ends = []
        for leg in (backward, forward):
            distances = [float(flow.distance(leg.points[-1], z)) for z in zeros]
            ends.append((int(np.argmin(distances)), min(distances)))
        if all(distance < APPROACH_LIMIT for _, distance in ends):
            limits = {'from': ends[0][0], 'to': ends[1][0],
                      'backward_distance': ends[0][1], 'forward_distance': ends[1][1]}
            records.append(OrbitRecord(tuple(float(v) for v in seed),
                                       np.concatenate([backward.times[::-1], forward.times[1:]]),
                                       np.vstack([backward.points[::-1], forward.points[1:]]),
                                       'singular-connecting', limits=limits))

    distinct = dedupe_orbits(flow, records)
    logger.info('Found %d connecting orbits between %d zeros (%d before deduplication)',
                len(distinct), len(zeros), len(records))
    return distinct
