"""
Fredholm determinants of the Airy kernels.

One-point Tracy-Widom laws F1, F2, multi-time joint distributions of the
Airy1 / Airy2 processes and their covariance curves g1, g2, all by Nystrom
discretization with Gauss-Legendre nodes::

    det(Id - chi_s K chi_s)  ~  det(I - [sqrt(w_i) K(u_a, x_i; u_b, y_j) sqrt(w_j)])

Each cut ``(u_k, s_k)`` is discretized on ``[s_k, s_k + span]``; the Airy
parts of both kernels decay superexponentially beyond that.

The extended Airy kernel K2 between distinct times is an integral over an
auxiliary variable lambda. It is evaluated with a composite Gauss-Legendre
rule in lambda, arranged as a matrix product ``A diag(w e^(tau lambda)) B^T``
of tabulated Airy values. For ``u < u'`` the integral over the negative axis
is taken directly, cut where ``exp(tau * lambda)`` reaches 1e-16, once that
cut lies above LAMBDA_BOTTOM or wherever the closed form of the full-line
integral::

    int_R e^(tau l) Ai(x+l) Ai(y+l) dl
        = (4 pi tau)^(-1/2) exp(tau^3/12 - tau (x+y)/2 - (x-y)^2 / (4 tau))

is too large to subtract from the positive-axis integral. Elsewhere the
difference of the two is used.
"""
import enum
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from . import airy, conf
from .exceptions import QuadratureError, ValidationError


logger = logging.getLogger(__name__)

S_MIN = -10.0
S_MAX = 6.0

MIN_NODES = 40
MIN_SPAN = 12.0

LAMBDA_PANEL = 0.5
LAMBDA_ORDER = 12
LAMBDA_TOP = 24.0
LAMBDA_BOTTOM = -20.0
LAMBDA_CUT = math.log(1e-16)
LAMBDA_FLOOR = -400.0
TAU_DIRECT = LAMBDA_CUT / LAMBDA_BOTTOM
LAMBDA_TOLERANCE = 1e-10
MAX_HALVINGS = 4
EXPONENT_LIMIT = 700.0
# Relative error of the positive-axis rule, as seen through the Gaussian
# subtraction.
CANCELLATION = 1e-12

COVARIANCE_PANEL = 1.0
COVARIANCE_ORDER = 5
# Node pairs whose Frechet bound min(F, 1 - F) falls below this are skipped.
COVARIANCE_CUTOFF = 1e-12


class ProcessKind(enum.Enum):
    AIRY1 = 'airy1'
    AIRY2 = 'airy2'


@functools.lru_cache(maxsize=None)
def _legendre(n):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(a, b, panel, order):
    """Gauss-Legendre nodes and weights on [a, b], panels of width <= ``panel``."""
    panels = max(1, int(math.ceil((b - a) / panel - 1e-12)))
    edges = np.linspace(a, b, panels + 1)
    x, w = _legendre(order)
    half = np.diff(edges) / 2.0
    nodes = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class KernelCut:
    """Cutoffs ``s_k`` at strictly increasing times ``u_k``."""
    times: tuple
    cutoffs: tuple

    def __post_init__(self):
        if not self.times or len(self.times) != len(self.cutoffs):
            raise ValidationError("a kernel cut needs one cutoff per time")
        if not all(math.isfinite(v) for v in self.times + self.cutoffs):
            raise ValidationError("kernel cut times and cutoffs must be finite")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValidationError("kernel cut times must be strictly increasing: %r" % (self.times,))

    @classmethod
    def from_pairs(cls, pairs):
        times, cutoffs = zip(*pairs)
        return cls(tuple(map(float, times)), tuple(map(float, cutoffs)))

    @classmethod
    def single(cls, s, u=0.0):
        return cls((float(u),), (float(s),))

    def __iter__(self):
        return iter(zip(self.times, self.cutoffs))


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: tuple
    weights: tuple
    span: float
    n: int
    cutoffs: tuple = ()

    @classmethod
    def build(cls, cuts, n=None, span=None):
        n = conf.QUAD_NODES if n is None else int(n)
        span = conf.QUAD_SPAN if span is None else float(span)
        if n < MIN_NODES or span < MIN_SPAN:
            logger.warning("Nystrom grid below adequacy thresholds (n=%d, span=%g)", n, span)
        x, w = _legendre(n)
        nodes = tuple(s + span * (x + 1.0) / 2.0 for s in cuts.cutoffs)
        weights = tuple(w * span / 2.0 for _ in cuts.cutoffs)
        return cls(nodes, weights, span, n, tuple(cuts.cutoffs))

    @property
    def bounds(self):
        """Upper truncation point ``s_k + span`` of every cut."""
        return tuple(s + self.span for s in self.cutoffs)


def _airy_pair(x):
    """Ai, Ai' for any argument >= airy.X_MIN."""
    value, derivative = airy.airy_scaled(x)
    decay = np.exp(-2.0 / 3.0 * np.maximum(x, 0.0) ** 1.5)
    return value * decay, derivative * decay


def _as_result(value, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(value)
    return value


#
# Kernels

def k1(u, s, v, t):
    """The Airy1 kernel K1(u, s; v, t), broadcasting over its arguments."""
    u, s, v, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, s, v, t)))
    tau = v - u
    argument = s + t + tau ** 2
    exponent = tau * (s + t) + 2.0 / 3.0 * tau ** 3
    decay = 2.0 / 3.0 * np.maximum(argument, 0.0) ** 1.5
    airy_part = airy.ai_scaled(argument) * np.exp(exponent - decay)
    later = tau > 0
    safe = np.where(later, tau, 1.0)
    gaussian = np.where(
        later, np.exp(-(t - s) ** 2 / (4.0 * safe)) / np.sqrt(4.0 * math.pi * safe), 0.0)
    return _as_result(airy_part - gaussian, u, s, v, t)


def airy_kernel(x, y):
    """Equal-time Airy kernel by its closed form, as a len(x) x len(y) matrix."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax, apx = _airy_pair(x)
    ay, apy = _airy_pair(y)
    difference = x[:, None] - y[None, :]
    same = difference == 0.0
    numerator = ax[:, None] * apy[None, :] - apx[:, None] * ay[None, :]
    diagonal = np.broadcast_to((apx ** 2 - x * ax ** 2)[:, None], difference.shape)
    return np.where(same, diagonal, numerator / np.where(same, 1.0, difference))


@functools.lru_cache(maxsize=None)
def _panel_rule(panels, direction, width):
    x, w = _legendre(LAMBDA_ORDER)
    starts = np.arange(panels) * width
    nodes = direction * (starts[:, None] + width * (x[None, :] + 1.0) / 2.0).ravel()
    weights = np.tile(w * width / 2.0, panels)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class AiryTable:
    """
    ``Ai(x_i + lambda_q)`` on the lambda rules of the time-shifted K2 blocks.

    The positive rule covers ``[0, LAMBDA_TOP - min(x)]`` in panels anchored
    at zero, so tables for different point sets share a common prefix. The
    negative rule is anchored at zero too; it is built on first use and
    extended whenever a deeper cut is asked for.
    """

    def __init__(self, points, width=None):
        self.points = np.asarray(points, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.points)):
            raise ValidationError("extended Airy kernel needs finite arguments")
        self.width = lambda_width() if width is None else width
        panels = max(1, int(math.ceil((LAMBDA_TOP - self.points.min()) / self.width)))
        self.positive_nodes, self.positive_weights = _panel_rule(panels, 1, self.width)
        self.positive = airy.ai_unbounded(self.points[:, None] + self.positive_nodes[None, :])
        self._negative = None

    def negative(self, cut=LAMBDA_BOTTOM):
        """Nodes, weights and Airy values of the rule on ``[cut, 0]``, in whole panels."""
        count = LAMBDA_ORDER * max(1, int(math.ceil(-cut / self.width - 1e-12)))
        if self._negative is None or self._negative[0].size < count:
            nodes, weights = _panel_rule(count // LAMBDA_ORDER, -1, self.width)
            table = airy.ai_unbounded(self.points[:, None] + nodes[None, :])
            self._negative = (nodes, weights, table)
        nodes, weights, table = self._negative
        return nodes[:count], weights[:count], table[:, :count]


@functools.lru_cache(maxsize=None)
def lambda_width():
    """Panel width of the lambda rule, halved until the Airy kernel diagonal settles."""
    points = np.linspace(S_MIN, S_MAX + MIN_SPAN, 33)
    width = LAMBDA_PANEL
    coarse = _diagonal_integral(AiryTable(points, width))
    for _ in range(4):
        fine = _diagonal_integral(AiryTable(points, width / 2.0))
        change = np.max(np.abs(fine - coarse))
        logger.debug("lambda rule width %g -> %g changes the Airy kernel by %.3g", width, width / 2.0, change)
        if change <= LAMBDA_TOLERANCE:
            return width
        width, coarse = width / 2.0, fine
    logger.warning("lambda rule did not reach %g (last change %.3g)", LAMBDA_TOLERANCE, change)
    return width


def _diagonal_integral(table):
    return (table.positive ** 2) @ table.positive_weights


def _gaussian(x, y, tau):
    with np.errstate(over='ignore'):
        return np.exp(tau ** 3 / 12.0 - tau * (x + y) / 2.0 - (x - y) ** 2 / (4.0 * tau)) \
            / math.sqrt(4.0 * math.pi * tau)


def negative_cut(tau):
    """Lower end of the direct integral for ``tau > 0``: where exp(tau * lambda) reaches 1e-16."""
    return max(LAMBDA_CUT / tau, LAMBDA_FLOOR)


def _lambda_integral(a, b, nodes, weights, tau, pairwise):
    # Entries that hit the clamp belong to cancelling pairs and are replaced
    # by the direct integral.
    factor = weights * np.exp(np.minimum(tau * nodes, EXPONENT_LIMIT))
    if pairwise:
        return (a * b) @ factor
    return (a * factor) @ b.T


def _direct(tau, rows, columns, pairwise):
    cut = negative_cut(tau)
    nodes, weights, a = rows.negative(cut)
    b = columns.negative(cut)[2]
    return -_lambda_integral(a, b, nodes, weights, tau, pairwise)


def shifted_block(tau, rows, columns, pairwise=False):
    """
    K2 between times ``u`` and ``u + tau`` from two AiryTables of equal width.

    For ``0 < tau < TAU_DIRECT`` the positive-axis integral minus the Gaussian
    closed form is used unless the two cancel to worse than
    LAMBDA_TOLERANCE, in which case the negative-axis integral is taken
    directly down to :func:`negative_cut`.
    """
    if tau >= TAU_DIRECT:
        return _direct(tau, rows, columns, pairwise)
    if pairwise:
        x, y = rows.points, columns.points
    else:
        x, y = rows.points[:, None], columns.points[None, :]
    common = min(rows.positive.shape[1], columns.positive.shape[1])
    nodes = rows.positive_nodes[:common]
    weights = rows.positive_weights[:common]
    upper = _lambda_integral(rows.positive[:, :common], columns.positive[:, :common],
                             nodes, weights, tau, pairwise)
    if tau <= 0:
        return upper
    gaussian = _gaussian(x, y, tau)
    cancelling = CANCELLATION * gaussian > LAMBDA_TOLERANCE
    if not cancelling.any():
        return upper - gaussian
    if negative_cut(tau) == LAMBDA_FLOOR:
        logger.warning("direct K2 integral at tau=%g truncated at lambda=%g", tau, LAMBDA_FLOOR)
    logger.debug("K2 at tau=%g: %d of %d entries by the direct integral",
                 tau, int(cancelling.sum()), cancelling.size)
    direct = _direct(tau, rows, columns, pairwise)
    with np.errstate(invalid='ignore'):
        return np.where(cancelling, direct, upper - gaussian)


def _k2_values(tau, s, t, width):
    return shifted_block(tau, AiryTable(s, width), AiryTable(t, width), pairwise=True)


def k2(u, s, v, t, halvings=0):
    """
    The extended Airy kernel K2(u, s; v, t) by lambda quadrature.

    ``u`` and ``v`` are scalars, ``s`` and ``t`` broadcast elementwise. The
    lambda rule is halved until two successive values agree to
    LAMBDA_TOLERANCE; ``halvings`` starts from a finer rule.
    """
    s_array, t_array = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    tau = float(v) - float(u)
    width = lambda_width() / 2 ** int(halvings)
    values = _k2_values(tau, s_array, t_array, width)
    for _ in range(MAX_HALVINGS):
        finer = _k2_values(tau, s_array, t_array, width / 2.0)
        change = float(np.max(np.abs(finer - values)))
        width, values = width / 2.0, finer
        if change <= LAMBDA_TOLERANCE:
            break
    else:
        logger.warning("K2 at tau=%g did not settle to %g (last change %.3g)", tau, LAMBDA_TOLERANCE, change)
    return _as_result(values.reshape(s_array.shape), s, t)


def airy1_block(u, x, v, y):
    return k1(u, x[:, None], v, y[None, :])


def airy2_block(u, x, v, y):
    if u == v:
        return airy_kernel(x, y)
    return shifted_block(v - u, AiryTable(x), AiryTable(y))


KERNELS = {
    ProcessKind.AIRY1: airy1_block,
    ProcessKind.AIRY2: airy2_block,
}


#
# Determinants

def _determinant(matrix, context):
    bad = ~np.isfinite(matrix)
    if bad.any():
        first = np.unravel_index(np.argmax(bad), matrix.shape)
        raise QuadratureError(
            "Nystrom matrix for %s has %d non-finite entries (first at %s)"
            % (context, int(bad.sum()), tuple(int(i) for i in first)))
    return float(scipy.linalg.det(np.eye(matrix.shape[0]) - matrix))


def nystrom_matrix(kernel, cuts, grid):
    roots = [np.sqrt(w) for w in grid.weights]
    rows = []
    for a, (u, _) in enumerate(cuts):
        row = []
        for b, (v, _) in enumerate(cuts):
            block = kernel(u, grid.nodes[a], v, grid.nodes[b])
            row.append(roots[a][:, None] * block * roots[b][None, :])
        rows.append(row)
    return np.block(rows)


def nystrom_determinant(kernel, cuts, grid=None):
    """det(Id - chi_s K chi_s) for any kernel ``kernel(u, x, v, y) -> matrix``."""
    grid = QuadratureGrid.build(cuts) if grid is None else grid
    matrix = nystrom_matrix(kernel, cuts, grid)
    return _determinant(matrix, "cuts %r" % (tuple(cuts),))


def fredholm_det(kind, cuts, grid=None):
    kind = ProcessKind(kind)
    return nystrom_determinant(KERNELS[kind], cuts, grid)


def _check_s(s, lo=S_MIN, hi=S_MAX):
    array = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(array)) or np.any(array < lo) or np.any(array > hi):
        raise ValidationError("argument must lie in [%g, %g]" % (lo, hi))
    return array


def process_cdf(kind, s, n=None, span=None):
    """
    One-point law of the process: P(A2(0) <= s) = F2(s), P(A1(0) <= s) = F1(2s).
    """
    kind = ProcessKind(kind)
    array = np.asarray(s, dtype=float)
    values = [
        fredholm_det(kind, KernelCut.single(value), QuadratureGrid.build(KernelCut.single(value), n, span))
        for value in array.reshape(-1)]
    return _as_result(np.array(values).reshape(array.shape), s)


def f2(s, n=None, span=None):
    """GUE Tracy-Widom distribution F2(s), s in [S_MIN, S_MAX]."""
    _check_s(s)
    return process_cdf(ProcessKind.AIRY2, s, n, span)


def f1(s, n=None, span=None):
    """GOE Tracy-Widom distribution F1(s), s in [S_MIN, S_MAX]; flat TASEP sees s -> F1(2s)."""
    array = _check_s(s)
    return _as_result(process_cdf(ProcessKind.AIRY1, array / 2.0, n, span), s)


def tracy_widom(kind):
    """The Tracy-Widom CDF attached to a process kind: F1 for Airy1, F2 for Airy2."""
    return f1 if ProcessKind(kind) is ProcessKind.AIRY1 else f2


def density(kind, s, step=1e-3, n=None, span=None):
    """
    Tracy-Widom density F1' or F2' by central differences of the determinant.
    ``kind`` may also be any vectorized CDF on [S_MIN, S_MAX].
    """
    if isinstance(kind, (ProcessKind, str)):
        law = tracy_widom(kind)

        def cdf(x):
            return law(x, n, span)
    else:
        cdf = kind
    array = np.asarray(s, dtype=float)
    lo = np.maximum(array - step, S_MIN)
    hi = np.minimum(array + step, S_MAX)
    return _as_result((np.asarray(cdf(hi)) - np.asarray(cdf(lo))) / (hi - lo), s)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def cdf_moments(cdf, box=(S_MIN, S_MAX), panel=0.5, order=8):
    """
    Mean and variance from a CDF by integration by parts over ``box``::

        mean = int_0^inf (1 - F) - int_-inf^0 F
    """
    lo, hi = box
    below_nodes, below_weights = composite_rule(lo, 0.0, panel, order)
    above_nodes, above_weights = composite_rule(0.0, hi, panel, order)
    below = np.asarray(cdf(below_nodes))
    above = 1.0 - np.asarray(cdf(above_nodes))
    mean = above @ above_weights - below @ below_weights
    second = 2.0 * (above * above_nodes) @ above_weights - 2.0 * (below * below_nodes) @ below_weights
    return Moments(mean=float(mean), variance=float(second - mean ** 2))


def moments(kind, n=None, span=None):
    """Mean and variance of F1 (Airy1) or F2 (Airy2)."""
    law = tracy_widom(kind)
    return cdf_moments(lambda s: law(s, n, span))


def process_moments(kind, n=None, span=None):
    """Mean and variance of the one-point law of the process itself."""
    kind = ProcessKind(kind)
    return cdf_moments(lambda s: process_cdf(kind, s, n, span))


def _ordered(first, second):
    return (first, second) if first[0] <= second[0] else (second, first)


def joint_cdf(kind, first, second, n=None, span=None):
    """P(A(u1) <= s1, A(u2) <= s2) from the two-cut block determinant."""
    kind = ProcessKind(kind)
    (u1, s1), (u2, s2) = _ordered(first, second)
    if u1 == u2:
        return process_cdf(kind, min(s1, s2), n, span)
    cuts = KernelCut.from_pairs([(u1, s1), (u2, s2)])
    return fredholm_det(kind, cuts, QuadratureGrid.build(cuts, n, span))


class _Cut:
    """A single discretized cut with its equal-time block, reused across pairs."""

    def __init__(self, kind, s, n, span):
        self.kind = kind
        grid = QuadratureGrid.build(KernelCut.single(s), n, span)
        self.nodes = grid.nodes[0]
        self.roots = np.sqrt(grid.weights[0])
        self.block = self._weighted(KERNELS[kind](0.0, self.nodes, 0.0, self.nodes), self)
        self.table = AiryTable(self.nodes) if kind is ProcessKind.AIRY2 else None
        self.cdf = _determinant(self.block, "cut at %g" % s)

    def _weighted(self, block, other):
        return self.roots[:, None] * block * other.roots[None, :]

    def shifted(self, other, tau):
        if self.kind is ProcessKind.AIRY2:
            block = shifted_block(tau, self.table, other.table)
        else:
            block = k1(0.0, self.nodes[:, None], tau, other.nodes[None, :])
        return self._weighted(block, other)


def covariance(kind, u, n=None, span=None, box=(S_MIN, S_MAX),
               panel=COVARIANCE_PANEL, order=COVARIANCE_ORDER):
    """
    Cov(A(u), A(0)) by Hoeffding's identity::

        Cov = int int [P(A(0) <= s1, A(u) <= s2) - F(s1) F(s2)] ds1 ds2

    over ``box`` squared with a tensor Gauss-Legendre rule. At u = 0 the
    variance of the one-point law is returned instead.
    """
    kind = ProcessKind(kind)
    u = float(u)
    if not u >= 0:
        raise ValidationError("covariance needs u >= 0, got %r" % u)
    if u == 0:
        return process_moments(kind, n, span).variance

    nodes, weights = composite_rule(box[0], box[1], panel, order)
    cuts = [_Cut(kind, s, n, span) for s in nodes]
    marginal = np.array([cut.cdf for cut in cuts])
    tails = np.minimum(marginal, 1.0 - marginal)
    active = np.flatnonzero(tails >= COVARIANCE_CUTOFF)
    logger.debug("covariance %s u=%g: %d of %d nodes active", kind.value, u, len(active), len(nodes))

    total = 0.0
    for i in active:
        first = cuts[i]
        for j in active:
            second = cuts[j]
            matrix = np.block([
                [first.block, first.shifted(second, u)],
                [second.shifted(first, -u), second.block],
            ])
            joint = _determinant(matrix, "joint cut (%g, %g) at u=%g" % (nodes[i], nodes[j], u))
            total += weights[i] * weights[j] * (joint - marginal[i] * marginal[j])
    return float(total)
