import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shared.kpz_lab import conf, experiments, stats, tasep
from shared.kpz_lab.exceptions import JammedError, ValidationError
from shared.kpz_lab.tasep import InitialCondition, ParticleSystem, Window


def single_particle(window, site=0):
    occupation = np.zeros(window.size, dtype=np.int8)
    occupation[site - window.lo] = 1
    return ParticleSystem(occupation, window, InitialCondition.step())


#
# Windows and initial conditions

@pytest.mark.parametrize('lo, hi', [(0, 5), (-5, 0), (3, 1), (-1.5, 2)])
def test_window_bounds(lo, hi):
    with pytest.raises(ValidationError):
        Window(lo, hi)


def test_window_for_measurement():
    window = Window.for_measurement(10.0, 3)
    radius = 3 + int(math.ceil(conf.LIGHT_CONE_SPEED * 10.0)) + conf.WINDOW_PADDING
    assert window == Window(-radius, radius)
    assert 3 in window and radius + 1 not in window


def test_initial_condition_validation():
    with pytest.raises(ValidationError):
        InitialCondition('bogus')
    with pytest.raises(ValidationError):
        InitialCondition.stationary(1.0)
    with pytest.raises(ValidationError):
        InitialCondition(tasep.STEP, 0.5)
    assert InitialCondition.from_name('stat') == InitialCondition.stationary(0.5)
    assert InitialCondition.from_name('stat', 0.3).rho == 0.3


def test_step_initial_condition(generator):
    system = tasep.init(InitialCondition.step(), Window(-5, 5), generator)
    assert list(system.occupation) == [1] * 6 + [0] * 5
    assert system.time == 0.0
    assert system.passages == 0
    assert list(system.mobile) == [0]


def test_flat_initial_condition(generator):
    system = tasep.init(InitialCondition.flat(), Window(-2, 2), generator)
    assert list(system.occupation) == [1, 0, 1, 0, 1]
    assert list(system.mobile) == [-2, 0]


def test_stationary_initial_condition_density(generator):
    window = Window(-500000, 499999)
    system = tasep.init(InitialCondition.stationary(0.5), window, generator)
    assert abs(system.particles / window.size - 0.5) < 3e-3
    system.check_invariants()


def test_occupation_must_match_window():
    with pytest.raises(ValidationError):
        ParticleSystem(np.zeros(3), Window(-2, 2), InitialCondition.step())
    with pytest.raises(ValidationError):
        ParticleSystem([0, 2, 0, 0, 0], Window(-2, 2), InitialCondition.step())


#
# Dynamics

def test_single_particle_step(generator):
    system = single_particle(Window(-1, 2))
    tasep.gillespie_step(system, generator)
    assert system.occupied(1) and not system.occupied(0)
    assert system.passages == 1
    assert system.time > 0
    assert list(system.mobile) == [1]


def test_particle_at_right_edge_is_jammed(generator):
    system = single_particle(Window(-1, 1), site=1)
    assert len(system.mobile) == 0
    with pytest.raises(JammedError):
        tasep.gillespie_step(system, generator)


def test_evolve_jammed_window_reaches_end(generator, caplog):
    system = single_particle(Window(-1, 1), site=1)
    tasep.evolve(system, 5.0, generator)
    assert system.time == 5.0
    assert 'jammed' in caplog.text


def test_evolve_to_current_time_keeps_state(generator):
    system = tasep.init(InitialCondition.flat(), Window(-10, 10), generator)
    before = system.occupation.copy()
    tasep.evolve(system, 0.0, generator)
    assert np.array_equal(system.occupation, before)
    assert system.time == 0.0


def test_evolve_backwards_rejected(generator):
    system = tasep.init(InitialCondition.step(), Window(-10, 10), generator)
    tasep.evolve(system, 2.0, generator)
    with pytest.raises(ValidationError):
        tasep.evolve(system, 1.0, generator)


def test_evolve_stops_at_end_time(generator):
    system = tasep.init(InitialCondition.step(), Window(-100, 100), generator)
    tasep.evolve(system, 7.5, generator)
    assert system.time == 7.5
    system.check_invariants()


def test_passages_never_decrease(generator):
    system = tasep.init(InitialCondition.step(), Window(-200, 200), generator)
    counts = []
    for t in np.linspace(1.0, 30.0, 30):
        counts.append(tasep.evolve(system, t, generator).passages)
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_single_particle_displacement_is_poisson():
    generator = np.random.default_rng(1)
    runs = 2000
    displacements = []
    for _ in range(runs):
        system = tasep.evolve(single_particle(Window(-1, 120)), 10.0, generator)
        displacements.append(int(np.flatnonzero(system.occupation)[0]) + system.window.lo)
    displacements = np.array(displacements)
    assert abs(displacements.mean() - 10.0) < 3 * math.sqrt(10.0 / runs)
    assert abs(displacements.var() - 10.0) < 1.5


def test_invariants_over_many_events():
    generator = np.random.default_rng(7)
    ic = InitialCondition.stationary(0.5)
    window = Window(-1000, 1000)
    system = tasep.init(ic, window, generator)
    particles, total, restarts = system.particles, 0, 0
    while total < 10 ** 6:
        events, status = system.advance(math.inf, 1000, generator)
        total += events
        system.check_invariants()
        assert system.particles == particles
        if status == tasep._JAMMED:
            system = tasep.init(ic, window, generator)
            particles, restarts = system.particles, restarts + 1
    assert restarts < 10


@settings(max_examples=40, deadline=None)
@given(
    variant=st.sampled_from(tasep.VARIANTS),
    seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
    events=st.integers(min_value=1, max_value=200),
)
def test_invariants_after_every_event(variant, seed, events):
    generator = np.random.default_rng(seed)
    ic = InitialCondition.from_name(variant)
    system = tasep.init(ic, Window(-40, 40), generator)
    particles, passages = system.particles, system.passages
    for _ in range(events):
        try:
            tasep.gillespie_step(system, generator)
        except JammedError:
            break
        system.check_invariants()
        assert system.particles == particles
        assert system.passages >= passages
        passages = system.passages


#
# Heights

def test_step_height_at_time_zero(generator):
    system = tasep.init(InitialCondition.step(), Window(-6, 6), generator)
    profile = tasep.height_profile(system)
    assert list(profile.h) == [abs(x) for x in range(-6, 7)]
    assert profile.lo == -6 and profile.at(-6) == 6 and profile.at(0) == 0
    assert tasep.height(system, -4) == 4


def test_flat_height_at_time_zero(generator):
    system = tasep.init(InitialCondition.flat(), Window(-4, 4), generator)
    assert [tasep.height(system, x) for x in range(-4, 5)] == [0, 1, 0, 1, 0, 1, 0, 1, 0]


def test_height_at_origin_counts_passages(generator):
    system = tasep.evolve(tasep.init(InitialCondition.step(), Window(-60, 60), generator), 20.0, generator)
    assert tasep.height(system, 0) == 2 * system.passages


def test_height_outside_window(generator):
    system = tasep.init(InitialCondition.step(), Window(-3, 3), generator)
    with pytest.raises(ValidationError):
        tasep.height(system, 4)


#
# Shapes and velocities

def test_limit_shapes():
    assert tasep.limit_shape_step(0.0) == 0.5
    assert tasep.limit_shape_step(1.0) == 1.0
    assert tasep.limit_shape_step(-2.0) == 2.0
    assert tasep.limit_shape_step(np.array([0.5])) == pytest.approx([0.625])
    assert tasep.limit_shape_flat(3.0) == 0.5
    assert tasep.limit_shape_stationary(1.0, 0.25) == pytest.approx(0.5 + 0.375)


def test_rarefaction_density():
    assert list(tasep.rarefaction_density(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))) == [1.0, 1.0, 0.5, 0.0, 0.0]


def test_velocities():
    assert tasep.growth_velocity(0.0) == 0.5
    assert tasep.growth_velocity(-1.0) == 0.0
    with pytest.raises(ValidationError):
        tasep.growth_velocity(1.5)
    assert tasep.characteristic_speed(0.25) == 0.5
    with pytest.raises(ValidationError):
        tasep.characteristic_speed(-0.1)
    assert tasep.characteristic_velocity(-0.3) == -0.3


#
# Rescalings

def test_rescaled_values():
    t, u = 250.0, 0.7
    scale = (t / 2.0) ** (1.0 / 3.0)
    assert tasep.rescaled_step(t / 2.0 + u * u * scale, t, u) == pytest.approx(0.0, abs=1e-12)
    assert tasep.rescaled_step(3.0, 2.0, 0.0) == pytest.approx(-2.0)
    assert tasep.rescaled_flat(2.0, 1.0, 0.0) == pytest.approx(-1.5)
    assert tasep.rescaled_stationary(0.5 * t, t, 0.0, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_measurement_sites():
    assert tasep.measurement_site_step(2.0, 1.0) == 2
    assert tasep.measurement_site_flat(8.0, 0.5) == 4
    assert tasep.measurement_site_stationary(1000.0, 1.0, 0.5) == 100
    assert tasep.measurement_site_stationary(1000.0, 0.0, 0.25) == 500
    assert tasep.nearest_site(2.5) == 3
    assert tasep.nearest_site(-2.5) == -2


def test_rescale_step_system():
    window = Window(-5, 5)
    occupation = (window.sites <= 0).astype(np.int8)
    occupation[5], occupation[6] = 0, 1
    system = ParticleSystem(occupation, window, InitialCondition.step(), time=2.0, passages=1)
    assert tasep.rescale_step(system, 2.0, 0.0) == pytest.approx(-1.0)
    assert tasep.rescale(system, 2.0, 0.0) == tasep.rescale_step(system, 2.0, 0.0)
    assert tasep.rescale_generic(system, 2.0, 0.0, 0.0, tasep.limit_shape_step) == pytest.approx(
        (2.0 - 1.0) / 2.0 ** (1.0 / 3.0))


def test_rescale_checks_time_and_window(generator):
    system = tasep.init(InitialCondition.step(), Window(-5, 5), generator)
    tasep.evolve(system, 2.0, generator)
    with pytest.raises(ValidationError):
        tasep.rescale_step(system, 3.0, 0.0)
    with pytest.raises(ValidationError):
        tasep.rescale_step(system, 2.0, 100.0)


def test_rescale_process(generator):
    ic = InitialCondition.flat()
    t = 30.0
    system = tasep.evolve(tasep.init(ic, Window.for_measurement(t, 50), generator), t, generator)
    values = tasep.rescale_process(system, t, [0.0, 0.5, 1.0])
    assert values.shape == (3,)
    assert values[1] == tasep.rescale_flat(system, t, 0.5)


#
# Density profile

def test_density_profile_edges():
    generator = np.random.default_rng(11)
    t = 50.0
    system = tasep.evolve(tasep.init(InitialCondition.step(), Window(-150, 150), generator), t, generator)
    profile = tasep.density_profile(system, t, 0.1)
    assert all(value == 1.0 for center, value in profile.items() if center < -1.6)
    assert all(value == 0.0 for center, value in profile.items() if center > 1.6)
    assert 0.05 in profile


def test_density_profile_validation(generator):
    system = tasep.init(InitialCondition.step(), Window(-5, 5), generator)
    with pytest.raises(ValidationError):
        tasep.density_profile(system, 0.0, 0.1)
    with pytest.raises(ValidationError):
        tasep.density_profile(system, 1.0, 0.0)


#
# Snapshots

def test_snapshot_text(generator):
    system = tasep.init(InitialCondition.flat(), Window(-2, 2), generator)
    assert tasep.encode_snapshot(system) == (
        'kpz-lab-snapshot 1\n'
        'window -2 2\n'
        'ic flat\n'
        'time 0.0\n'
        'passages 0\n'
        'runs 1 1 1 1 1 1\n'
    )


def test_snapshot_restores_state(generator):
    system = tasep.init(InitialCondition.stationary(0.3), Window(-50, 50), generator)
    tasep.evolve(system, 4.0, generator)
    restored = tasep.decode_snapshot(tasep.encode_snapshot(system))
    assert np.array_equal(restored.occupation, system.occupation)
    assert restored.time == system.time
    assert restored.passages == system.passages
    assert restored.ic == system.ic
    assert np.array_equal(restored.mobile, system.mobile)


@pytest.mark.parametrize('text', ['', 'hello\n', 'kpz-lab-snapshot 1\nwindow -2 2\n'])
def test_snapshot_rejects_malformed(text):
    with pytest.raises(ValidationError):
        tasep.decode_snapshot(text)


#
# Replicas

def test_replicas_are_reproducible():
    ic = InitialCondition.step()
    first = tasep.onepoint_replica(ic, 20.0, (0.0, 0.5), 3, 5)
    assert np.array_equal(first, tasep.onepoint_replica(ic, 20.0, (0.0, 0.5), 3, 5))
    assert not np.array_equal(first, tasep.onepoint_replica(ic, 20.0, (0.0, 0.5), 3, 6))


def test_heights_replica_orders_times():
    ic = InitialCondition.stationary(0.5)
    heights = tasep.heights_replica(ic, [20.0, 5.0, 10.0], 0.0, 1, 0)
    assert heights.shape == (3,)
    assert np.all(np.diff(heights) >= 0)


def test_density_replica_keys():
    profile = tasep.density_replica(10.0, 0.25, 1, 0)
    assert 0.125 in profile and -0.125 in profile


#
# Acceptance-scale checks

@pytest.mark.slow
def test_step_passage_rate():
    runs, t = 1000, 1000.0
    rates = [tasep.heights_replica(InitialCondition.step(), [t / 2, t], 0.0, 5, index)[1] / 2.0 / t
             for index in range(runs)]
    assert abs(np.mean(rates) - 0.25) < 0.01


@pytest.mark.slow
def test_rarefaction_fan():
    runs, t, width = 100, 2000.0, 0.05
    profiles = [tasep.density_replica(t, width, 9, index) for index in range(runs)]
    for center in profiles[0]:
        if abs(center) <= 0.9:
            observed = np.mean([profile[center] for profile in profiles])
            assert abs(observed - tasep.rarefaction_density(center)) < 0.02


def ks_at(ic, t, theory, runs=2000):
    values = [tasep.onepoint_replica(ic, t, (0.0,), 2010, index)[0] for index in range(runs)]
    return stats.ks_distance(stats.EmpiricalDistribution(values), theory)


@pytest.mark.slow
def test_step_fluctuations_approach_f2():
    theory = experiments.tracy_widom_cdf('airy2')
    late = ks_at(InitialCondition.step(), 1000.0, theory)
    assert late <= 0.1
    assert late < ks_at(InitialCondition.step(), 125.0, theory)


@pytest.mark.slow
def test_flat_fluctuations_approach_f1():
    theory = experiments.flat_tasep_cdf()
    late = ks_at(InitialCondition.flat(), 1000.0, theory)
    assert late <= 0.1
    assert late < ks_at(InitialCondition.flat(), 125.0, theory)


@pytest.mark.slow
def test_stationary_variance_exponent():
    runs, times = 1000, [250.0, 500.0, 1000.0, 2000.0]
    ic = InitialCondition.stationary(0.5)
    heights = np.array([tasep.heights_replica(ic, times, 0.0, 17, index) for index in range(runs)])
    variances = heights.var(axis=0, ddof=1)
    assert stats.scaling_exponent(times, variances) == pytest.approx(2.0 / 3.0, abs=0.07)
