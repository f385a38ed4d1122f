"""
Sample containers and the statistics used by the Monte-Carlo experiments.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .exceptions import ValidationError


logger = logging.getLogger(__name__)

MIN_BATCHES = 8


class EmpiricalDistribution:
    """Immutable sorted sample with its empirical CDF."""

    def __init__(self, values):
        values = np.sort(np.asarray(values, dtype=float).reshape(-1))
        if values.size == 0:
            raise ValidationError("an empirical distribution needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise ValidationError("samples must be finite")
        values.setflags(write=False)
        self._values = values

    @property
    def values(self):
        return self._values

    @property
    def count(self):
        return self._values.size

    def __len__(self):
        return self.count

    def __repr__(self):
        return '<EmpiricalDistribution n=%d [%g, %g]>' % (self.count, self._values[0], self._values[-1])

    def ecdf(self, s):
        """Fraction of samples <= s (right-continuous)."""
        s = np.asarray(s, dtype=float)
        result = np.searchsorted(self._values, s, side='right') / self.count
        return float(result) if s.ndim == 0 else result


def ecdf(dist, s):
    return dist.ecdf(s)


def ks_distance(dist, cdf):
    """
    Kolmogorov-Smirnov distance between the sample and ``cdf``::

        max_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|)

    ``cdf`` is called once on the whole sorted sample.
    """
    return float(scipy.stats.kstest(dist.values, cdf).statistic)


def ad_statistic(dist, cdf):
    """Anderson-Darling statistic A^2 of the sample against ``cdf``."""
    n = dist.count
    probabilities = np.clip(np.asarray(cdf(dist.values), dtype=float), 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    terms = (2 * i - 1) * (np.log(probabilities) + np.log1p(-probabilities[::-1]))
    return float(-n - terms.sum() / n)


@dataclass(frozen=True)
class SampleMoments:
    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float


def moments(dist):
    """
    Unbiased mean and variance with jackknife standard errors.

    The variance error needs three samples; with two it is reported as NaN.
    """
    values = dist.values
    n = values.size
    if n < 2:
        raise ValidationError("moments need at least two samples, got %d" % n)
    mean = values.mean()
    deviations = values - mean
    squares = deviations @ deviations
    variance = squares / (n - 1)
    mean_stderr = math.sqrt(variance / n)
    if n < 3:
        return SampleMoments(float(mean), float(variance), mean_stderr, math.nan)
    # leave-one-out variances in closed form
    partial = (squares - deviations ** 2 * n / (n - 1)) / (n - 2)
    spread = partial - partial.mean()
    variance_stderr = math.sqrt((n - 1) / n * (spread @ spread))
    return SampleMoments(float(mean), float(variance), mean_stderr, variance_stderr)


@dataclass(frozen=True)
class CovarianceEstimate:
    u: float
    value: float
    stderr: float
    batches: int


def _covariance(first, second):
    x = first - first.mean()
    y = second - second.mean()
    return (x @ y) / (x.size - 1)


def path_covariance(paths, u_index, u=None, batches=MIN_BATCHES):
    """
    Cov(path[u_index], path[0]) over replicas (rows of ``paths``).

    The standard error comes from ``batches`` equal consecutive batches of
    replicas; a remainder that does not fill a batch only enters the value.
    """
    paths = np.asarray(paths, dtype=float)
    if paths.ndim != 2:
        raise ValidationError("paths must be a replicas x grid array")
    if batches < MIN_BATCHES:
        raise ValidationError("at least %d batches are required" % MIN_BATCHES)
    replicas = paths.shape[0]
    size = replicas // batches
    if size < 2:
        raise ValidationError(
            "%d replicas are too few for %d batches of at least two" % (replicas, batches))
    reference = paths[:, 0]
    column = paths[:, u_index]
    value = _covariance(reference, column)
    batch_values = np.array([
        _covariance(reference[k * size:(k + 1) * size], column[k * size:(k + 1) * size])
        for k in range(batches)])
    stderr = float(batch_values.std(ddof=1) / math.sqrt(batches))
    return CovarianceEstimate(
        u=float(u_index if u is None else u), value=float(value), stderr=stderr, batches=batches)


def scaling_exponent(times, values):
    """Least-squares slope of log(values) against log(times)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2 or np.any(times <= 0) or np.any(values <= 0):
        raise ValidationError("a scaling fit needs at least two positive points")
    slope, _ = np.polyfit(np.log(times), np.log(values), 1)
    return float(slope)
