"""
Continuous-time TASEP on a finite window.

Particles jump one site to the right at rate one when the target is empty.
The window ``[lo, hi]`` has closed ends, and is sized by the light-cone rule
in ``conf`` so that observables near the measurement sites match the
infinite lattice. Dynamics run in a numba-compiled Gillespie loop: the total
rate is the number of mobile particles, which sit in an array with a
position map so insert, remove and uniform choice are all O(1).

Heights follow the usual bijection::

    h(x) = 2 N_t + sum_{y=1..x} (1 - 2 eta_y)       x >= 1
    h(0) = 2 N_t
    h(x) = 2 N_t - sum_{y=x+1..0} (1 - 2 eta_y)     x <= -1

with ``N_t`` the number of jumps across the bond 0 -> 1.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import conf
from . import rng as random_streams
from .exceptions import InvariantError, JammedError, ValidationError


logger = logging.getLogger(__name__)

STEP = 'step'
FLAT = 'flat'
STATIONARY = 'stationary'
VARIANTS = (STEP, FLAT, STATIONARY)
ALIASES = {'stat': STATIONARY}

_REACHED = 0
_JAMMED = 1
_BUDGET = 2

_CHUNK = 1 << 24


@dataclass(frozen=True)
class Window:
    """Lattice sites ``lo..hi`` inclusive, with the origin bond 0 -> 1 inside."""
    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise ValidationError("window bounds must be integers")
        if not self.lo < 0 < self.hi:
            raise ValidationError("window [%s, %s] must satisfy lo < 0 < hi" % (self.lo, self.hi))

    @classmethod
    def symmetric(cls, radius):
        return cls(-int(radius), int(radius))

    @classmethod
    def for_measurement(cls, t, max_site=0):
        """Radius = max |site| + LIGHT_CONE_SPEED * t + WINDOW_PADDING."""
        radius = int(abs(max_site)) + int(math.ceil(conf.LIGHT_CONE_SPEED * t)) + conf.WINDOW_PADDING
        logger.debug("window radius %d for t=%g, max site %d", radius, t, max_site)
        return cls.symmetric(max(radius, 1))

    @property
    def size(self):
        return self.hi - self.lo + 1

    @property
    def sites(self):
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def __contains__(self, x):
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class InitialCondition:
    variant: str
    rho: float = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError("unknown initial condition %r" % (self.variant,))
        if self.variant == STATIONARY:
            if self.rho is None or not 0.0 < self.rho < 1.0:
                raise ValidationError("stationary initial condition needs 0 < rho < 1, got %r" % (self.rho,))
        elif self.rho is not None:
            raise ValidationError("only the stationary initial condition takes a density")

    @classmethod
    def step(cls):
        return cls(STEP)

    @classmethod
    def flat(cls):
        return cls(FLAT)

    @classmethod
    def stationary(cls, rho):
        return cls(STATIONARY, float(rho))

    @classmethod
    def from_name(cls, name, rho=None):
        name = ALIASES.get(name, name)
        if name == STATIONARY:
            return cls.stationary(0.5 if rho is None else rho)
        return cls(name)

    @property
    def stream(self):
        return 'tasep-%s' % self.variant


#
# Event engine

@njit(nogil=True)
def _insert(mobile, where, count, i):
    mobile[count] = i
    where[i] = count
    return count + 1


@njit(nogil=True)
def _advance(occupation, mobile, where, count, passages, time, t_end, max_events, origin, generator):
    size = occupation.shape[0]
    events = 0
    while events < max_events:
        if count == 0:
            return count, passages, time, events, _JAMMED
        dt = generator.exponential(1.0 / count)
        if time + dt > t_end:
            return count, passages, t_end, events, _REACHED
        time += dt
        k = int(generator.random() * count)
        i = mobile[k]
        occupation[i] = 0
        occupation[i + 1] = 1
        if i == origin:
            passages += 1

        last = mobile[count - 1]
        mobile[k] = last
        where[last] = k
        where[i] = -1
        count -= 1

        if i > 0 and occupation[i - 1] == 1:
            count = _insert(mobile, where, count, i - 1)
        if i + 2 < size and occupation[i + 2] == 0:
            count = _insert(mobile, where, count, i + 1)
        events += 1
    return count, passages, time, events, _BUDGET


def _mobile_indices(occupation):
    return np.flatnonzero((occupation[:-1] == 1) & (occupation[1:] == 0))


class ParticleSystem:
    """
    Occupation of a window plus the event clock, the passage counter N_t and
    the set of mobile particles (``eta_x = 1, eta_{x+1} = 0``).
    """

    def __init__(self, occupation, window, ic, time=0.0, passages=0):
        occupation = np.ascontiguousarray(occupation, dtype=np.int8)
        if occupation.shape != (window.size,):
            raise ValidationError("occupation must have one entry per window site")
        if np.any((occupation != 0) & (occupation != 1)):
            raise ValidationError("occupation entries must be 0 or 1")
        self.window = window
        self.ic = ic
        self.occupation = occupation
        self.time = float(time)
        self.passages = int(passages)
        self._rebuild_mobile()

    def _rebuild_mobile(self):
        indices = _mobile_indices(self.occupation)
        self._mobile = np.zeros(self.window.size, dtype=np.int64)
        self._mobile[:indices.size] = indices
        self._where = np.full(self.window.size, -1, dtype=np.int64)
        self._where[indices] = np.arange(indices.size)
        self._count = int(indices.size)

    def __repr__(self):
        return '<ParticleSystem %s [%d, %d] t=%g N=%d mobile=%d>' % (
            self.ic.variant, self.window.lo, self.window.hi, self.time, self.passages, self._count)

    @property
    def origin(self):
        """Array index of site 0."""
        return -self.window.lo

    @property
    def mobile(self):
        """Sites of the mobile particles, ascending."""
        return np.sort(self._mobile[:self._count]) + self.window.lo

    @property
    def particles(self):
        return int(self.occupation.sum(dtype=np.int64))

    def index(self, x):
        if x not in self.window:
            raise ValidationError("site %d outside window [%d, %d]" % (x, self.window.lo, self.window.hi))
        return int(x) - self.window.lo

    def occupied(self, x):
        return bool(self.occupation[self.index(x)])

    def advance(self, t_end, max_events, generator):
        """Run at most ``max_events`` events before ``t_end``; returns (events, status)."""
        count, passages, time, events, status = _advance(
            self.occupation, self._mobile, self._where, self._count, self.passages,
            self.time, float(t_end), int(max_events), self.origin, generator)
        self._count, self.passages, self.time = int(count), int(passages), float(time)
        return events, status

    def check_invariants(self):
        expected = _mobile_indices(self.occupation)
        current = self._mobile[:self._count]
        if not np.array_equal(expected, np.sort(current)):
            raise InvariantError("mobile set %s differs from occupation %s" % (np.sort(current), expected))
        if (np.any(self._where[current] != np.arange(self._count))
                or np.count_nonzero(self._where >= 0) != self._count):
            raise InvariantError("mobile position map is inconsistent")
        profile = self.height_profile()
        if np.any(np.abs(np.diff(profile.h)) != 1):
            raise InvariantError("height gradient outside {-1, +1}")
        if profile.at(0) != 2 * self.passages:
            raise InvariantError("h(0) = %d differs from 2 N_t = %d" % (profile.at(0), 2 * self.passages))

    def height_profile(self):
        steps = np.cumsum(1 - 2 * self.occupation.astype(np.int64))
        h = 2 * self.passages + steps - steps[self.origin]
        return HeightProfile(self.window.lo, h)


@dataclass(frozen=True)
class HeightProfile:
    lo: int
    h: np.ndarray

    def at(self, x):
        index = int(x) - self.lo
        if not 0 <= index < self.h.size:
            raise ValidationError("site %d outside the height profile" % x)
        return int(self.h[index])


def init(ic, window, generator):
    """The initial configuration of ``ic`` restricted to ``window``, at time 0."""
    sites = window.sites
    if ic.variant == STEP:
        occupation = sites <= 0
    elif ic.variant == FLAT:
        occupation = sites % 2 == 0
    else:
        occupation = generator.random(window.size) < ic.rho
    return ParticleSystem(occupation.astype(np.int8), window, ic)


def gillespie_step(system, generator):
    """One event: exponential holding time with rate |mobile|, uniform mobile particle jumps."""
    _, status = system.advance(math.inf, 1, generator)
    if status == _JAMMED:
        raise JammedError("no mobile particle in window [%d, %d]" % (system.window.lo, system.window.hi))
    if conf.CHECK_INVARIANTS:
        system.check_invariants()
    return system


def evolve(system, t_end, generator):
    """
    Run events until the next one would pass ``t_end``; the clock then reads
    ``t_end`` and the state is the last one before it.
    """
    t_end = float(t_end)
    if t_end < system.time:
        raise ValidationError("cannot evolve backwards from %g to %g" % (system.time, t_end))
    budget = 1 if conf.CHECK_INVARIANTS else _CHUNK
    total = 0
    while True:
        events, status = system.advance(t_end, budget, generator)
        total += events
        if conf.CHECK_INVARIANTS and events:
            system.check_invariants()
        if status == _REACHED:
            break
        if status == _JAMMED:
            logger.warning("window [%d, %d] jammed at t=%g", system.window.lo, system.window.hi, system.time)
            system.time = t_end
            break
    logger.debug("%r after %d events", system, total)
    return system


def height(system, x):
    """h(x) for a site of the window."""
    system.index(x)
    return system.height_profile().at(x)


def height_profile(system):
    return system.height_profile()


#
# Macroscopic shapes

def limit_shape_step(xi):
    xi = np.asarray(xi, dtype=float)
    result = np.where(np.abs(xi) <= 1.0, 0.5 * (1.0 + xi ** 2), np.abs(xi))
    return float(result) if result.ndim == 0 else result


def limit_shape_flat(xi):
    result = np.full_like(np.asarray(xi, dtype=float), 0.5)
    return float(result) if result.ndim == 0 else result


def limit_shape_stationary(xi, rho):
    result = (1.0 - 2.0 * rho) * np.asarray(xi, dtype=float) + 2.0 * rho * (1.0 - rho)
    return float(result) if result.ndim == 0 else result


def rarefaction_density(xi):
    """Step-IC macroscopic density (1 - xi) / 2, clipped to [0, 1]."""
    result = np.clip((1.0 - np.asarray(xi, dtype=float)) / 2.0, 0.0, 1.0)
    return float(result) if result.ndim == 0 else result


def growth_velocity(u):
    """v(u) = (1 - u^2) / 2 for slopes |u| <= 1."""
    if abs(u) > 1:
        raise ValidationError("slope must satisfy |u| <= 1, got %r" % u)
    return (1.0 - u * u) / 2.0


def characteristic_speed(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("density must lie in [0, 1], got %r" % rho)
    return 1.0 - 2.0 * rho


def characteristic_velocity(u):
    """The coefficient a(u) = -v'(u) of the slope equation."""
    return float(u)


#
# Fluctuation rescalings

def nearest_site(x):
    return int(math.floor(x + 0.5))


def measurement_site_step(t, u):
    return nearest_site(2.0 * u * (t / 2.0) ** (2.0 / 3.0))


def measurement_site_flat(t, u):
    return nearest_site(2.0 * u * t ** (2.0 / 3.0))


def measurement_site_stationary(t, u, rho):
    return nearest_site((1.0 - 2.0 * rho) * t + u * t ** (2.0 / 3.0))


def rescaled_step(h, t, u):
    scale = (t / 2.0) ** (1.0 / 3.0)
    return (h - (t / 2.0 + u * u * scale)) / -scale


def rescaled_flat(h, t, u):
    return (h - t / 2.0) / -(t ** (1.0 / 3.0))


def rescaled_stationary(h, t, u, rho):
    return (h - (1.0 - 2.0 * rho * (1.0 - rho)) * t) / t ** (1.0 / 3.0)


def _check_time(system, t):
    if not math.isclose(system.time, t, rel_tol=1e-12, abs_tol=1e-12):
        raise ValidationError("system is at time %g, not %g" % (system.time, t))


def rescale_step(system, t, u):
    _check_time(system, t)
    return rescaled_step(height(system, measurement_site_step(t, u)), t, u)


def rescale_flat(system, t, u):
    _check_time(system, t)
    return rescaled_flat(height(system, measurement_site_flat(t, u)), t, u)


def rescale_stationary(system, t, u, rho):
    _check_time(system, t)
    return rescaled_stationary(height(system, measurement_site_stationary(t, u, rho)), t, u, rho)


def rescale_generic(system, t, xi, u, shape):
    """[h(xi t + u t^(2/3), t) - t shape(xi + u t^(-1/3))] / t^(1/3)."""
    _check_time(system, t)
    site = nearest_site(xi * t + u * t ** (2.0 / 3.0))
    return (height(system, site) - t * shape(xi + u * t ** (-1.0 / 3.0))) / t ** (1.0 / 3.0)


def measurement_site(ic, t, u):
    if ic.variant == STEP:
        return measurement_site_step(t, u)
    if ic.variant == FLAT:
        return measurement_site_flat(t, u)
    return measurement_site_stationary(t, u, ic.rho)


def rescale(system, t, u):
    if system.ic.variant == STEP:
        return rescale_step(system, t, u)
    if system.ic.variant == FLAT:
        return rescale_flat(system, t, u)
    return rescale_stationary(system, t, u, system.ic.rho)


def rescale_process(system, t, u_grid):
    """The rescaled height at every ``u`` of ``u_grid``, from one configuration."""
    return np.array([rescale(system, t, u) for u in u_grid])


def density_profile(system, t, bin_width):
    """Occupation averaged over bins of xi = x / t, keyed by bin center."""
    if not t > 0:
        raise ValidationError("density profile needs t > 0")
    if not bin_width > 0:
        raise ValidationError("bin width must be positive")
    bins = np.floor(system.window.sites / (t * bin_width)).astype(np.int64)
    keys, inverse = np.unique(bins, return_inverse=True)
    totals = np.bincount(inverse, weights=system.occupation)
    counts = np.bincount(inverse)
    return {float((k + 0.5) * bin_width): float(total / count)
            for k, total, count in zip(keys, totals, counts)}


#
# Snapshots

SNAPSHOT_MAGIC = 'kpz-lab-snapshot 1'


def encode_snapshot(system):
    """Run-length text form of a system, see README for the layout."""
    occupation = system.occupation
    changes = np.flatnonzero(np.diff(occupation)) + 1
    edges = np.concatenate(([0], changes, [occupation.size]))
    runs = ' '.join(str(int(n)) for n in np.diff(edges))
    ic = system.ic
    lines = [
        SNAPSHOT_MAGIC,
        'window %d %d' % (system.window.lo, system.window.hi),
        'ic %s' % ic.variant if ic.rho is None else 'ic %s %r' % (ic.variant, ic.rho),
        'time %r' % system.time,
        'passages %d' % system.passages,
        'runs %d %s' % (int(occupation[0]), runs),
    ]
    return '\n'.join(lines) + '\n'


def decode_snapshot(text):
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != SNAPSHOT_MAGIC:
        raise ValidationError("not a kpz-lab snapshot")
    fields = {}
    for line in lines[1:]:
        key, _, value = line.partition(' ')
        fields[key] = value.split()
    try:
        window = Window(int(fields['window'][0]), int(fields['window'][1]))
        variant = fields['ic'][0]
        ic = InitialCondition(variant, float(fields['ic'][1]) if len(fields['ic']) > 1 else None)
        first = int(fields['runs'][0])
        lengths = [int(n) for n in fields['runs'][1:]]
        time = float(fields['time'][0])
        passages = int(fields['passages'][0])
    except (KeyError, IndexError, ValueError) as e:
        raise ValidationError("malformed snapshot: %s" % e)
    values = [(first + k) % 2 for k in range(len(lengths))]
    occupation = np.repeat(np.array(values, dtype=np.int8), lengths)
    return ParticleSystem(occupation, window, ic, time, passages)


#
# Replicas

def _max_site(ic, t, u_grid):
    return max(abs(measurement_site(ic, t, u)) for u in u_grid)


def onepoint_replica(ic, t, u_grid, seed, index):
    """Rescaled heights over ``u_grid`` of one run of ``ic`` up to time ``t``."""
    generator = random_streams.replica_generator(seed, ic.stream, index)
    window = Window.for_measurement(t, _max_site(ic, t, u_grid))
    system = evolve(init(ic, window, generator), t, generator)
    return rescale_process(system, t, u_grid)


def heights_replica(ic, times, u, seed, index):
    """Raw heights at the measurement site of each time of ``times``, along one run."""
    times = sorted(times)
    generator = random_streams.replica_generator(seed, '%s-times' % ic.stream, index)
    window = Window.for_measurement(times[-1], max(abs(measurement_site(ic, t, u)) for t in times))
    system = init(ic, window, generator)
    heights = []
    for t in times:
        evolve(system, t, generator)
        heights.append(height(system, measurement_site(ic, t, u)))
    return np.array(heights, dtype=float)


def density_replica(t, bin_width, seed, index):
    """Binned step-IC density at time ``t`` from one run."""
    ic = InitialCondition.step()
    generator = random_streams.replica_generator(seed, '%s-density' % ic.stream, index)
    window = Window.for_measurement(t)
    system = evolve(init(ic, window, generator), t, generator)
    return density_profile(system, t, bin_width)
