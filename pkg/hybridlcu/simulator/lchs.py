"""Linear combination of Hamiltonian simulation (LCHS) for e^{-AT}.

The propagator is written as a Cauchy-weighted integral of unitaries,

    e^{-AT} = int dk e^{-iT(H + kL)} / (pi (1 + k^2)),   A = L + iH,  L >= 0,

truncated to |k| <= K1. The window |k| <= K2 is discretized by the
trapezoidal rule and implemented as one coherent group; the tail
K2 <= |k| <= K1 is sampled continuously as singletons.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError
from scipy.integrate import quad_vec
from scipy.linalg import expm

from . import lcu, partition, qcore, utils
from .constants import LCHS_EXPLICIT_NODE_LIMIT

logger = logging.getLogger(__name__)


def truncation_k1(epsilon):
    """K1 = tan(pi (1 - eps) / 2), the cutoff leaving Cauchy tail mass eps."""
    if not 0 < epsilon <= 1:
        raise ValidationError('epsilon %(e)r must lie in (0, 1]', code='bad_epsilon', params={'e': epsilon})
    return math.tan(math.pi * (1 - epsilon) / 2)


@dataclass(frozen=True)
class HermitianSplit:
    L: np.ndarray
    H: np.ndarray
    shift: float
    L_orig: np.ndarray


def split_hermitian(a):
    """A = L_orig + iH, and L = L_orig + c with the smallest c making L PSD."""
    a = qcore.as_square(a, 'A')
    l_orig = (a + qcore.dagger(a)) / 2
    h = (a - qcore.dagger(a)) / 2j
    lowest = float(np.linalg.eigvalsh(l_orig)[0])
    shift = max(0.0, -lowest)
    if shift > 0:
        logger.info('Hermitian part is not PSD (lambda_min = %.3e), shifting by %.3e', lowest, shift)
    return HermitianSplit(L=l_orig + shift * np.eye(a.shape[0]), H=h, shift=shift, L_orig=l_orig)


@dataclass(frozen=True, eq=False)
class LchsConfig:
    A: np.ndarray
    T: float
    epsilon: float
    K2: float = None
    c_m: float = 1.0
    nodes: int = None

    def __post_init__(self):
        object.__setattr__(self, 'A', qcore.as_square(self.A, 'A'))
        if self.T < 0:
            raise ValidationError('evolution time must be nonnegative', code='bad_time')
        k1 = truncation_k1(self.epsilon)
        k2 = k1 if self.K2 is None else float(self.K2)
        if not 0 <= k2 <= k1 * (1 + 1e-12):
            raise ValidationError('K2 = %(k2)g must lie in [0, K1 = %(k1)g]', code='bad_split',
                                  params={'k2': k2, 'k1': k1})
        object.__setattr__(self, 'K2', min(k2, k1))
        if self.c_m <= 0:
            raise ValidationError('node constant must be positive', code='bad_constant')
        if self.nodes is not None and self.nodes < 1:
            raise ValidationError('node count must be at least one', code='bad_nodes')

    @property
    def K1(self):
        return truncation_k1(self.epsilon)


def node_count(l_norm, T, K2, epsilon, c_m=1.0):
    """M = ceil(c_m ||L|| T sqrt(K2^3/eps)), never below ceil(K2/sqrt(eps))."""
    if K2 == 0:
        return 0
    scaled = math.ceil(c_m * l_norm * T * math.sqrt(K2 ** 3 / epsilon))
    density_floor = math.ceil(K2 / math.sqrt(epsilon))
    return max(scaled, density_floor, 1)


def trapezoid(K2, M):
    """Nodes k_j = -K2 + 2jK2/M and weights (2 - [j in {0, M}]) K2 / (M pi (1 + k_j^2))."""
    if M == 0:
        return np.zeros(0), np.zeros(0)
    nodes = np.linspace(-K2, K2, M + 1)
    weights = 2 * K2 / (M * math.pi * (1 + nodes ** 2))
    weights[0] /= 2
    weights[-1] /= 2
    return nodes, weights


def trapezoid_norm(K2, M):
    """||s||_1, summed explicitly up to the node limit and in closed form beyond."""
    if M == 0:
        return 0.0
    if M <= LCHS_EXPLICIT_NODE_LIMIT:
        return float(trapezoid(K2, M)[1].sum())
    return 2 / math.pi * math.atan(K2)


@dataclass(frozen=True, eq=False)
class LchsDiscretization:
    nodes: np.ndarray
    weights: np.ndarray
    K1: float
    K2: float
    M: int
    split: HermitianSplit = field(repr=False)

    @property
    def s_norm1(self):
        return float(self.weights.sum())

    @property
    def alpha(self):
        return math.atan(self.K1) - math.atan(self.K2)

    @property
    def tail_mass(self):
        return 2 / math.pi * self.alpha


def discretize(config):
    split = split_hermitian(config.A)
    M = config.nodes
    if config.K2 == 0:
        M = 0
    elif M is None:
        M = node_count(qcore.operator_norm(split.L), config.T, config.K2, config.epsilon, config.c_m)
    nodes, weights = trapezoid(config.K2, M)
    return LchsDiscretization(nodes, weights, config.K1, config.K2, M, split)


class LchsHybrid:
    """Coherent trapezoidal window plus continuously sampled Cauchy tail."""

    chunk = 1 << 15

    def __init__(self, config, discretization):
        if discretization.K2 > discretization.K1:
            raise ValidationError('K2 exceeds K1', code='bad_split')
        self.config = config
        self.discretization = discretization
        self.split = discretization.split
        window = discretization.s_norm1
        self.one_norm = window + discretization.tail_mass
        if self.one_norm == 0:
            raise ValidationError('empty window and empty tail', code='degenerate_decomposition')
        self.coherent_weight = window / self.one_norm
        self.tail_weight = discretization.tail_mass / self.one_norm

    def unitaries(self, ks):
        """Stack of e^{-iT(H + kL)} over ``ks``."""
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        stack = self.split.H[None] + ks[:, None, None] * self.split.L[None]
        stack = (stack + np.conj(np.swapaxes(stack, 1, 2))) / 2
        w, v = np.linalg.eigh(stack)
        phases = np.exp(-1j * self.config.T * w)
        return (v * phases[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))

    def unitary(self, k):
        return self.unitaries([k])[0]

    @cached_property
    def decomposition(self):
        """Normalized window LCU, or None when the window is empty."""
        disc = self.discretization
        if disc.M == 0:
            return None
        return lcu.normalize([lcu.UnitaryTerm(s, u) for s, u in zip(disc.weights, self.unitaries(disc.nodes))])

    def window_operator(self):
        """sum_j s_j e^{-iT(H + k_j L)}, unnormalized."""
        disc = self.discretization
        total = np.zeros(self.split.L.shape, dtype=complex)
        for start in range(0, disc.nodes.size, self.chunk):
            stop = start + self.chunk
            total += np.tensordot(disc.weights[start:stop], self.unitaries(disc.nodes[start:stop]), axes=1)
        return total

    def sample_tail(self, rng, n):
        """k from 1/(pi(1+k^2)) restricted to K2 <= |k| <= K1, by arctan inversion."""
        low, high = math.atan(self.discretization.K2), math.atan(self.discretization.K1)
        angles = rng.uniform(low, high, size=n)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * np.tan(angles)

    def tail_estimate(self, rng, n):
        """Monte-Carlo tail integral and the standard error of each entry."""
        samples = self.unitaries(self.sample_tail(rng, n))
        mass = self.discretization.tail_mass
        mean = mass * samples.mean(axis=0)
        stderr = mass * np.sqrt(samples.real.var(axis=0) + samples.imag.var(axis=0)) / math.sqrt(n)
        return mean, stderr

    def tail_integral(self, epsabs=None):
        """Deterministic tail integral, adaptive in u = arctan k."""
        low, high = math.atan(self.discretization.K2), math.atan(self.discretization.K1)
        if high - low <= 0:
            return np.zeros(self.split.L.shape, dtype=complex)
        epsabs = self.config.epsilon * 1e-3 if epsabs is None else epsabs

        def integrand(u):
            k = math.tan(u)
            return self.unitaries([k, -k]).sum(axis=0) / math.pi

        return _integrate(integrand, low, high, epsabs, self.split.L.shape)

    def propagator(self, epsabs=None):
        """Approximation of e^{-AT}, undoing the PSD shift by e^{cT}."""
        shifted = self.window_operator() + self.tail_integral(epsabs)
        return math.exp(self.split.shift * self.config.T) * shifted

    def assembled_decomposition(self, tail_nodes=64):
        """Explicit LCU: window terms plus equal-mass tail singletons, with its hybrid partition."""
        disc = self.discretization
        coefficients, ks = list(disc.weights), list(disc.nodes)
        if disc.alpha > 0:
            step = disc.alpha / tail_nodes
            for k in np.tan(math.atan(disc.K2) + (np.arange(tail_nodes) + 0.5) * step):
                coefficients += [step / math.pi] * 2
                ks += [k, -k]
        dec = lcu.normalize([lcu.UnitaryTerm(c, u) for c, u in zip(coefficients, self.unitaries(ks))])
        window = disc.M + 1 if disc.M > 0 else 0
        groups = [list(range(window))] if window else []
        groups += [[i] for i in range(window, dec.m)]
        return dec, partition.validate(groups, dec.m)


def _integrate(func, low, high, epsabs, shape):
    def stacked(x):
        value = func(x)
        return np.concatenate([value.real.ravel(), value.imag.ravel()])

    result, _ = quad_vec(stacked, low, high, epsabs=epsabs, epsrel=0, limit=20000)
    size = int(np.prod(shape))
    return (result[:size] + 1j * result[size:]).reshape(shape)


def build_hybrid_lcu(config, discretization=None):
    return LchsHybrid(config, discretize(config) if discretization is None else discretization)


def rp_bound(K1, K2, s_norm1):
    """Upper bound on R - P, (2 alpha/pi)(5 s + (2/pi) alpha)/(s + (2/pi) alpha)^2, capped at 1."""
    tail = 2 / math.pi * (math.atan(K1) - math.atan(K2))
    if s_norm1 + tail == 0:
        return 0.0
    return min(1.0, tail * (5 * s_norm1 + tail) / (s_norm1 + tail) ** 2)


def rp_bound_approx(K1, K2):
    """(1 - atan K2/atan K1)(1 + 4 atan K2/atan K1)."""
    if K1 == 0:
        return 0.0
    x = math.atan(K2) / math.atan(K1)
    return (1 - x) * (1 + 4 * x)


def propagator_error(config, epsabs=None):
    """Operator-norm distance between the assembled discretization and expm(-AT)."""
    hybrid = build_hybrid_lcu(config)
    return qcore.operator_norm(hybrid.propagator(epsabs) - expm(-config.A * config.T))


def quadrature_error(config):
    """Window-only trapezoid error against adaptive integration over [-K2, K2]."""
    hybrid = build_hybrid_lcu(config)
    K2 = config.K2
    if K2 == 0:
        return 0.0
    exact = _integrate(lambda k: hybrid.unitary(k) / (math.pi * (1 + k ** 2)),
                       -K2, K2, config.epsilon * 1e-4, hybrid.split.L.shape)
    return qcore.operator_norm(hybrid.window_operator() - exact)


def sweep_point(K2, l_norm, T, epsilon, p_assumed, c_m):
    K1 = truncation_k1(epsilon)
    M = node_count(l_norm, T, K2, epsilon, c_m)
    s_norm1 = trapezoid_norm(K2, M)
    bound = rp_bound(K1, K2, s_norm1)
    return {
        'K2': K2, 'M': M, 'alpha': math.atan(K1) - math.atan(K2), 's_norm1': s_norm1,
        'rp_bound': bound, 'overhead_bound_at_P': (p_assumed + bound) / p_assumed ** 2,
        'P_assumed': p_assumed, 'rp_bound_approx': rp_bound_approx(K1, K2),
    }


def k2_grid(epsilon, points):
    """0, a geometric ladder up to K1, and K1 itself."""
    K1 = truncation_k1(epsilon)
    ladder = np.geomspace(1e-3, K1, points - 1) if points > 2 else np.array([K1])
    return [0.0] + [float(k) for k in ladder[:-1]] + [K1]


def fig_sweep(l_norm=2.0, T=3.0, epsilon=5e-5, points=48, p_assumed=1e-2, c_m=1.0, k2_values=None, workers=1):
    """Bound on R - P and on the overhead R/P^2 against the node count M."""
    k2_values = k2_grid(epsilon, points) if k2_values is None else sorted(k2_values)
    logger.info('sweep uses M = ceil(%g ||L|| T sqrt(K2^3/eps)); the node constant is a calibration, not derived', c_m)
    return utils.parallel_map(lambda k2: sweep_point(k2, l_norm, T, epsilon, p_assumed, c_m), k2_values, workers)


def random_instance(dim, rng, l_norm=2.0):
    """Random A with PSD Hermitian part of norm ``l_norm``."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    l_part = g @ qcore.dagger(g)
    l_part *= l_norm / qcore.operator_norm(l_part)
    return l_part + 1j * qcore.random_hermitian(dim, rng)
