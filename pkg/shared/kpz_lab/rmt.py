"""
GUE / GOE matrices and Dyson Brownian Motion.

The stationary laws have densities proportional to ``exp(-Tr H^2 / (2N))``
(GUE) and ``exp(-Tr H^2 / (4N))`` (GOE). Dyson Brownian Motion is the matrix
Ornstein-Uhlenbeck process ``dH = -gamma H dt + dB`` with gamma = 1/(2N) or
1/(4N), which keeps those laws invariant; it is advanced with the exact
Gaussian transition of every independent entry, so there is no time step
error.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import rng as random_streams
from .exceptions import ValidationError


logger = logging.getLogger(__name__)


class EnsembleKind(enum.Enum):
    GUE = 'gue'
    GOE = 'goe'

    @property
    def complex(self):
        return self is EnsembleKind.GUE

    def relaxation(self, N):
        """OU drift coefficient gamma."""
        return 1.0 / (2.0 * N) if self is EnsembleKind.GUE else 1.0 / (4.0 * N)

    def diagonal_variance(self, N):
        return float(N) if self is EnsembleKind.GUE else 2.0 * N

    def off_diagonal_variance(self, N):
        """Variance of each real component of an off-diagonal entry."""
        return N / 2.0 if self is EnsembleKind.GUE else float(N)

    def time_factor(self):
        """Physical time per unit of u, in units of N^(2/3)."""
        return 2.0 if self is EnsembleKind.GUE else 8.0

    def scale_factor(self):
        """Fluctuation scale of the dynamic rescaling, in units of N^(1/3)."""
        return 1.0 if self is EnsembleKind.GUE else 2.0


@dataclass(frozen=True)
class MatrixState:
    """
    A GUE or GOE matrix stored as its diagonal and strict upper triangle.

    ``upper`` holds the entries at ``numpy.triu_indices(N, 1)`` (complex for
    GUE); the full matrix is assembled from it, so it is Hermitian exactly.
    """
    kind: EnsembleKind
    N: int
    diagonal: np.ndarray
    upper: np.ndarray
    time: float = 0.0

    @property
    def matrix(self):
        rows, columns = np.triu_indices(self.N, 1)
        dtype = complex if self.kind.complex else float
        matrix = np.zeros((self.N, self.N), dtype=dtype)
        matrix[np.arange(self.N), np.arange(self.N)] = self.diagonal
        matrix[rows, columns] = self.upper
        matrix[columns, rows] = np.conj(self.upper)
        return matrix


def _check_dimension(N):
    if int(N) != N or N < 1:
        raise ValidationError("matrix dimension must be a positive integer, got %r" % (N,))
    return int(N)


def _gaussian_entries(kind, N, generator, diagonal_scale, off_scale):
    count = N * (N - 1) // 2
    diagonal = diagonal_scale * generator.standard_normal(N)
    upper = off_scale * generator.standard_normal(count)
    if kind.complex:
        upper = upper + 1j * off_scale * generator.standard_normal(count)
    return diagonal, upper


def sample_stationary(kind, N, generator):
    """A fresh GUE/GOE sample at time 0."""
    kind = EnsembleKind(kind)
    N = _check_dimension(N)
    diagonal, upper = _gaussian_entries(
        kind, N, generator,
        math.sqrt(kind.diagonal_variance(N)), math.sqrt(kind.off_diagonal_variance(N)))
    return MatrixState(kind, N, diagonal, upper, 0.0)


def ou_step(state, delta, generator):
    """
    Exact OU transition over ``delta``::

        x <- exp(-gamma delta) x + Normal(0, v (1 - exp(-2 gamma delta)))

    with ``v`` the stationary variance of the entry.
    """
    delta = float(delta)
    if not delta >= 0:
        raise ValidationError("OU step needs delta >= 0, got %r" % delta)
    if delta == 0:
        return MatrixState(state.kind, state.N, state.diagonal.copy(), state.upper.copy(), state.time)
    kind, N = state.kind, state.N
    gamma = kind.relaxation(N)
    decay = math.exp(-gamma * delta)
    fraction = -math.expm1(-2.0 * gamma * delta)
    noise_diagonal, noise_upper = _gaussian_entries(
        kind, N, generator,
        math.sqrt(kind.diagonal_variance(N) * fraction),
        math.sqrt(kind.off_diagonal_variance(N) * fraction))
    return MatrixState(
        kind, N,
        decay * state.diagonal + noise_diagonal,
        decay * state.upper + noise_upper,
        state.time + delta)


def lambda_max(state):
    """
    Largest eigenvalue: Householder reduction to tridiagonal form, then
    Sturm-sequence bisection for the top eigenvalue only.
    """
    if not (np.all(np.isfinite(state.diagonal)) and np.all(np.isfinite(state.upper))):
        raise ValidationError("matrix has non-finite entries")
    if state.N == 1:
        return float(np.real(state.diagonal[0]))
    reduced = scipy.linalg.hessenberg(state.matrix)
    d = np.real(np.diag(reduced)).copy()
    # a unitary diagonal similarity makes the Hermitian tridiagonal real
    e = np.abs(np.diag(reduced, -1))
    top = scipy.linalg.eigvalsh_tridiagonal(
        d, e, select='i', select_range=(state.N - 1, state.N - 1), lapack_driver='stebz')
    return float(top[0])


def static_rescale(value, N):
    N = _check_dimension(N)
    return (value - 2.0 * N) / N ** (1.0 / 3.0)


def dbm_times(kind, N, u_grid):
    kind = EnsembleKind(kind)
    return kind.time_factor() * np.asarray(u_grid, dtype=float) * N ** (2.0 / 3.0)


def _check_grid(u_grid):
    grid = np.asarray(u_grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ValidationError("u grid must be nonnegative and strictly increasing")
    return grid


def dbm_path(kind, N, u_grid, generator):
    """
    Rescaled largest eigenvalue of stationary DBM along ``u_grid``:
    ``(lambda(t_k) - 2N) / N^(1/3)`` for GUE, ``/ (2 N^(1/3))`` for GOE.
    """
    kind = EnsembleKind(kind)
    N = _check_dimension(N)
    grid = _check_grid(u_grid)
    times = dbm_times(kind, N, grid)
    scale = kind.scale_factor() * N ** (1.0 / 3.0)
    state = sample_stationary(kind, N, generator)
    path = np.empty(grid.size)
    for k, t in enumerate(times):
        state = ou_step(state, t - state.time, generator)
        path[k] = (lambda_max(state) - 2.0 * N) / scale
    return path


def dbm_replica(kind, N, u_grid, seed, index):
    kind = EnsembleKind(kind)
    generator = random_streams.replica_generator(seed, 'dbm-%s' % kind.value, index)
    return dbm_path(kind, N, u_grid, generator)


def static_replica(kind, N, seed, index):
    kind = EnsembleKind(kind)
    generator = random_streams.replica_generator(seed, 'static-%s' % kind.value, index)
    return static_rescale(lambda_max(sample_stationary(kind, N, generator)), N)


def static_samples(kind, N, count, seed):
    """``count`` static rescaled largest eigenvalues, replica by replica."""
    return np.array([static_replica(kind, N, seed, index) for index in range(int(count))])
