"""
The experiment families behind the command line.

Each experiment is an ``ExperimentBase`` subclass with an ``apply(config)``
returning a ``Table``; one instance per subcommand is registered below.
"""
import functools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import fredholm, rmt, stats, tasep
from .fredholm import ProcessKind
from .mixins import ReplicaPoolMixin
from .rmt import EnsembleKind


logger = logging.getLogger(__name__)

THEORY_STEP = 0.02


@dataclass
class Table:
    columns: tuple
    rows: list
    notes: list = field(default_factory=list)


#
# Theory curves, shared by several experiments

@functools.lru_cache(maxsize=None)
def _tabulated(kind, n, span):
    grid = np.round(np.arange(fredholm.S_MIN, fredholm.S_MAX + THEORY_STEP / 2, THEORY_STEP), 12)
    law = fredholm.tracy_widom(kind)
    values = np.array([law(s, n, span) for s in grid])
    values.setflags(write=False)
    return grid, values


def tracy_widom_cdf(kind, n=None, span=None):
    """F1 or F2 as a vectorized function, interpolated from a fine table."""
    grid, values = _tabulated(ProcessKind(kind), n, span)

    def cdf(s):
        return np.interp(s, grid, values, left=0.0, right=1.0)
    return cdf


def flat_tasep_cdf(n=None, span=None):
    """The flat TASEP one-point law s -> F1(2s)."""
    f1 = tracy_widom_cdf(ProcessKind.AIRY1, n, span)
    return lambda s: f1(2.0 * np.asarray(s, dtype=float))


def _covariance_row(kind, n, span, u):
    return fredholm.covariance(kind, u, n, span)


def process_for(ensemble):
    """Airy2 for GUE, Airy1 for GOE."""
    return ProcessKind.AIRY2 if EnsembleKind(ensemble) is EnsembleKind.GUE else ProcessKind.AIRY1


class ExperimentBase(ReplicaPoolMixin):
    registry = []
    registry_dict = {}

    title = None
    columns = ()

    def __init__(self, name):
        self.__name__ = self.name = name

    @classmethod
    def register_experiments(cls, *experiments):
        cls.registry[0:0] = experiments
        cls.registry_dict = {e.name: e for e in cls.registry}

    @classmethod
    def get(cls, name):
        return cls.registry_dict[name]

    def __repr__(self):
        return '<%s %s>' % (self.__class__.__name__, self.name)

    def __call__(self, config):
        logger.info("%s: start (seed %d)", self.name, config.seed)
        started = time.perf_counter()
        table = self.apply(config)
        logger.info("%s: %d rows in %.1fs", self.name, len(table.rows), time.perf_counter() - started)
        return table

    def apply(self, config):
        raise NotImplementedError

    def theory_covariances(self, kind, config, grid):
        function = functools.partial(_covariance_row, kind, config.n_quad, config.M)
        return self.map_values(function, grid)

    def map_values(self, function, values):
        values = list(values)
        return self.map_replicas(_IndexedCall(function, values), len(values))


@dataclass(frozen=True)
class _IndexedCall:
    """Picklable ``index -> function(values[index])``."""
    function: object
    values: list

    def __call__(self, index):
        return self.function(self.values[index])


class TracyWidomTableExperiment(ExperimentBase):
    title = "Tracy-Widom distributions and densities"
    columns = ('s', 'F1', 'F2', 'dF1', 'dF2')

    def apply(self, config):
        n, span = config.n_quad, config.M
        rows = []
        for s in config.s_grid:
            rows.append((
                s,
                fredholm.f1(s, n, span),
                fredholm.f2(s, n, span),
                fredholm.density(ProcessKind.AIRY1, s, n=n, span=span),
                fredholm.density(ProcessKind.AIRY2, s, n=n, span=span),
            ))
        return Table(self.columns, rows)


class AiryCovarianceExperiment(ExperimentBase):
    title = "Covariance of the Airy1 and Airy2 processes"
    columns = ('u', 'g1', 'g2')

    def apply(self, config):
        grid = config.u_grid
        g1 = self.theory_covariances(ProcessKind.AIRY1, config, grid)
        g2 = self.theory_covariances(ProcessKind.AIRY2, config, grid)
        return Table(self.columns, list(zip(grid, g1, g2)))


class TasepOnePointExperiment(ExperimentBase):
    title = "One-point law of the rescaled TASEP height"
    columns = ('s', 'ecdf', 'theory')

    def theory(self, config):
        if config.ic == tasep.STEP:
            return tracy_widom_cdf(ProcessKind.AIRY2, config.n_quad, config.M)
        if config.ic == tasep.FLAT:
            return flat_tasep_cdf(config.n_quad, config.M)
        return None

    def apply(self, config):
        ic = tasep.InitialCondition.from_name(config.ic, config.rho)
        function = functools.partial(tasep.onepoint_replica, ic, config.t, (config.u,), config.seed)
        values = np.array(self.map_replicas(function, config.runs))[:, 0]
        dist = stats.EmpiricalDistribution(values)
        theory = self.theory(config)
        grid = config.s_grid
        expected = theory(grid) if theory is not None else np.full(grid.size, math.nan)
        notes = [('runs', config.runs)]
        if theory is not None:
            notes.append(('ks', stats.ks_distance(dist, theory)))
            notes.append(('ad', stats.ad_statistic(dist, theory)))
        return Table(self.columns, list(zip(grid, dist.ecdf(grid), expected)), notes)


class TasepShapeExperiment(ExperimentBase):
    title = "Step-IC density profile against the rarefaction fan"
    columns = ('xi', 'density', 'theory')

    def apply(self, config):
        function = functools.partial(tasep.density_replica, config.t, config.bin_width, config.seed)
        profiles = self.map_replicas(function, config.runs)
        centers = sorted(profiles[0])
        density = np.mean([[profile[c] for c in centers] for profile in profiles], axis=0)
        theory = tasep.rarefaction_density(np.array(centers))
        return Table(self.columns, list(zip(centers, density, theory)), [('runs', config.runs)])


class PathCovarianceMixin:
    """Covariance table of replicated paths over the config's u grid."""

    def covariance_rows(self, paths, config, theory):
        rows = []
        for index, u in enumerate(config.u_grid):
            estimate = stats.path_covariance(paths, index, u=u, batches=config.batches)
            rows.append((u, estimate.value, estimate.stderr, theory[index]))
        return rows


class DbmCovarianceExperiment(PathCovarianceMixin, ExperimentBase):
    title = "Covariance of the rescaled DBM largest eigenvalue"
    columns = ('u', 'f_hat', 'stderr', 'theory')

    def paths(self, ensemble, config):
        function = functools.partial(rmt.dbm_replica, ensemble, config.N, config.u_grid, config.seed)
        return np.array(self.map_replicas(function, config.runs))

    def apply(self, config):
        paths = self.paths(config.ensemble, config)
        theory = self.theory_covariances(process_for(config.ensemble), config, config.u_grid)
        return Table(self.columns, self.covariance_rows(paths, config, theory), [('runs', config.runs)])


class CompareExperiment(DbmCovarianceExperiment):
    title = "GUE DBM against Airy2 and GOE DBM against Airy1"
    columns = ('u', 'f_gue', 'stderr_gue', 'g2', 'f_goe', 'stderr_goe', 'g1')

    def apply(self, config):
        joined = []
        for ensemble in (EnsembleKind.GUE, EnsembleKind.GOE):
            paths = self.paths(ensemble.value, config)
            theory = self.theory_covariances(process_for(ensemble), config, config.u_grid)
            joined.append(self.covariance_rows(paths, config, theory))
        rows = [gue + goe[1:] for gue, goe in zip(*joined)]
        return Table(self.columns, rows, [('runs', config.runs)])


class RmtOnePointExperiment(ExperimentBase):
    title = "Static largest-eigenvalue law"
    columns = ('s', 'ecdf', 'theory')

    def apply(self, config):
        kind = process_for(config.ensemble)
        function = functools.partial(rmt.static_replica, config.ensemble, config.N, config.seed)
        dist = stats.EmpiricalDistribution(self.map_replicas(function, config.runs))
        theory = tracy_widom_cdf(kind, config.n_quad, config.M)
        grid = config.s_grid
        notes = [('runs', config.runs), ('ks', stats.ks_distance(dist, theory))]
        return Table(self.columns, list(zip(grid, dist.ecdf(grid), theory(grid))), notes)


class TasepScalingExperiment(ExperimentBase):
    title = "Height variance growth for stationary TASEP"
    columns = ('t', 'var', 'stderr')

    def apply(self, config):
        ic = tasep.InitialCondition.stationary(config.rho)
        function = functools.partial(tasep.heights_replica, ic, config.times, config.u, config.seed)
        heights = np.array(self.map_replicas(function, config.runs))
        rows = []
        for index, t in enumerate(config.times):
            moments = stats.moments(stats.EmpiricalDistribution(heights[:, index]))
            rows.append((t, moments.variance, moments.variance_stderr))
        exponent = stats.scaling_exponent(config.times, [row[1] for row in rows])
        return Table(self.columns, rows, [('runs', config.runs), ('exponent', exponent)])


class TasepCovarianceExperiment(PathCovarianceMixin, ExperimentBase):
    title = "Covariance of the rescaled TASEP height process"
    columns = ('u', 'f_hat', 'stderr', 'theory')

    def apply(self, config):
        ic = tasep.InitialCondition.from_name(config.ic, config.rho)
        grid = config.u_grid
        function = functools.partial(tasep.onepoint_replica, ic, config.t, tuple(grid), config.seed)
        paths = np.array(self.map_replicas(function, config.runs))
        if ic.variant == tasep.STEP:
            theory = self.theory_covariances(ProcessKind.AIRY2, config, grid)
        elif ic.variant == tasep.FLAT:
            theory = self.theory_covariances(ProcessKind.AIRY1, config, grid)
        else:
            theory = [math.nan] * len(grid)
        return Table(self.columns, self.covariance_rows(paths, config, theory), [('runs', config.runs)])


tw_table = TracyWidomTableExperiment('tw-table')
airy_cov = AiryCovarianceExperiment('airy-cov')
tasep_onepoint = TasepOnePointExperiment('tasep-onepoint')
tasep_shape = TasepShapeExperiment('tasep-shape')
dbm_cov = DbmCovarianceExperiment('dbm-cov')
compare = CompareExperiment('compare')
rmt_onepoint = RmtOnePointExperiment('rmt-onepoint')
tasep_scaling = TasepScalingExperiment('tasep-scaling')
tasep_cov = TasepCovarianceExperiment('tasep-cov')

ExperimentBase.register_experiments(
    tw_table, airy_cov, tasep_onepoint, tasep_shape, dbm_cov, compare,
    rmt_onepoint, tasep_scaling, tasep_cov,
)
