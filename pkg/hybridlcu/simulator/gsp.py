"""Two-stage ground-state preparation: a coherent cosine filter followed by a
virtually sampled Gaussian filter.

The cosine stage is the binomial LCU of cos^T(H - E + tau) over the unitaries
e^{i(T - 2l)(H - E + tau)}. The Gaussian stage has a continuous Fourier
representation that is sampled as singletons, so its R factor is 1.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError

from . import hybrid, lcu, partition, qcore, utils
from .constants import STREAM_INSTANCE, TOLERANCES
from .exceptions import NumericalInvariantError

logger = logging.getLogger(__name__)


def _ceil(x):
    """Ceiling that forgives round-off just above an integer."""
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def ground_state(h):
    """lambda_0, the gap Delta = lambda_1 - lambda_0, and |lambda_0>."""
    w, v = qcore.eigh(h)
    if w.size < 2:
        raise ValidationError('ground-state problems need dimension >= 2', code='bad_dimension')
    gap = float(w[1] - w[0])
    if gap <= 1e-12:
        raise ValidationError('ground state is degenerate (gap %(g).3e)', code='degenerate_ground', params={'g': gap})
    return float(w[0]), gap, v[:, 0]


@dataclass(frozen=True, eq=False)
class GspConfig:
    H: np.ndarray
    p0: float
    epsilon: float
    energy_error: float = 0.0
    refined_energy_error: float = 0.0
    c_t: float = 1.0
    c_tau: float = 1.0
    c_sigma: float = 1.0
    c_tau_refined: float = 1.0

    def __post_init__(self):
        h = qcore.check_hermitian(self.H, 'H')
        w = np.linalg.eigvalsh((h + qcore.dagger(h)) / 2)
        if w[0] < -TOLERANCES.hermiticity or w[-1] > 1 + TOLERANCES.hermiticity:
            raise ValidationError('spectrum [%(lo).6g, %(hi).6g] leaves [0, 1]', code='bad_spectrum',
                                  params={'lo': w[0], 'hi': w[-1]})
        if not 0 < self.p0 < 1:
            raise ValidationError('overlap bound p0 must lie in (0, 1)', code='bad_p0')
        if not 0 < self.epsilon < self.p0:
            raise ValidationError('epsilon must lie in (0, p0)', code='bad_epsilon')
        object.__setattr__(self, 'H', h)

    @cached_property
    def ground(self):
        return ground_state(self.H)


def cosine_params(delta, p0, epsilon, c_t=1.0, c_tau=1.0):
    """T = ceil(c_t Delta^-2 log^2(1/(p0 eps))) and tau = c_tau Delta / log(1/(p0 eps))."""
    if delta <= 0:
        raise ValidationError('gap must be positive', code='bad_gap')
    if not 0 < p0 * epsilon < 1:
        raise ValidationError('p0 * epsilon must lie in (0, 1)', code='bad_epsilon')
    log_term = math.log(1 / (p0 * epsilon))
    return _ceil(c_t * log_term ** 2 / delta ** 2), c_tau * delta / log_term


def gaussian_params(delta, p0, epsilon, c_sigma=1.0, c_tau=1.0):
    """sigma^2 = c_sigma Delta^-2 log(p0/eps) and tau' = c_tau Delta / sqrt(log(p0/eps))."""
    if delta <= 0:
        raise ValidationError('gap must be positive', code='bad_gap')
    if not 0 < epsilon < p0:
        raise ValidationError('epsilon must lie in (0, p0)', code='bad_epsilon')
    log_term = math.log(p0 / epsilon)
    return c_sigma * log_term / delta ** 2, c_tau * delta / math.sqrt(log_term)


def cosine_filter(h, energy, tau, T):
    """cos^T(H - E + tau)."""
    return qcore.matrix_function(h, lambda w: np.cos(w - energy + tau) ** T)


def gaussian_filter(h, energy, tau, sigma2):
    """exp(-sigma^2 (H - E + tau)^2 / 2)."""
    return qcore.matrix_function(h, lambda w: np.exp(-sigma2 * (w - energy + tau) ** 2 / 2))


def cosine_lcu(h, energy, tau, T):
    """cos^T(H') = 2^-T sum_l binom(T, l) e^{i(T - 2l)H'}, with H' = H - E + tau."""
    shifted = qcore.check_hermitian(h) - (energy - tau) * np.eye(h.shape[0])
    return lcu.normalize([
        lcu.UnitaryTerm(math.comb(T, l) / 2 ** T, qcore.expm_i_hermitian(shifted, -(T - 2 * l)))
        for l in range(T + 1)
    ])


@dataclass(frozen=True)
class FilterQuality:
    distance: float
    survival: float


def filter_quality(h, psi, filt):
    """Distance of the filtered, normalized state to |lambda_0>, and the survival norm."""
    _, _, ground = ground_state(h)
    phi = filt @ qcore.PureState(psi).vector
    survival = float(np.linalg.norm(phi))
    if survival == 0:
        return FilterQuality(distance=math.sqrt(2), survival=0.0)
    overlap = abs(np.vdot(ground, phi)) / survival
    return FilterQuality(distance=math.sqrt(max(0.0, 2 - 2 * overlap)), survival=survival)


@dataclass(frozen=True)
class ComplexityReport:
    term1: float
    term2: float
    alpha: float
    interpolated: float
    limit: float
    evolution_factor: float

    @property
    def total(self):
        return self.term1 + self.term2


def complexity_report(p0, delta, epsilon, alpha=None):
    """Total-evolution-time terms of the two-stage method and their alpha-interpolated form."""
    if not 0 < epsilon < p0 < 1:
        raise ValidationError('complexity needs 0 < epsilon < p0 < 1', code='bad_epsilon')
    if delta <= 0:
        raise ValidationError('gap must be positive', code='bad_gap')
    prefactor = 1 / (p0 * epsilon ** 2)
    log_inv_eps = math.log(1 / epsilon)
    term1 = prefactor * math.log(1 / p0) ** 2 / delta ** 2
    term2 = prefactor / delta * math.sqrt(log_inv_eps * math.log(p0 / epsilon))
    alpha = math.log(epsilon) / math.log(p0) if alpha is None else alpha
    if alpha < 1:
        raise ValidationError('alpha = log eps / log p0 must be at least 1', code='bad_alpha')
    interpolated = prefactor / delta * log_inv_eps * (log_inv_eps / (delta * alpha ** 2) + math.sqrt(1 - 1 / alpha))
    return ComplexityReport(
        term1=term1, term2=term2, alpha=alpha, interpolated=interpolated,
        limit=prefactor / delta * log_inv_eps, evolution_factor=math.sqrt(log_inv_eps),
    )


@dataclass(frozen=True)
class GspReport:
    dim: int
    Delta: float
    p0: float
    eps: float
    Tprime: int
    tau: float
    sigma2: float
    tau_refined: float
    R: float
    survival: float
    stage1_dist: float
    final_dist: float
    total_time_term1: float
    total_time_term2: float

    def row(self):
        return {name: getattr(self, name) for name in (
            'dim', 'Delta', 'p0', 'eps', 'Tprime', 'sigma2', 'R', 'stage1_dist', 'final_dist',
            'total_time_term1', 'total_time_term2')}


def hybrid_gsp(config, psi):
    """Run both stages on |psi> and report R, distances and the time terms."""
    psi = qcore.PureState(psi).vector
    lambda0, gap, ground = config.ground
    overlap = abs(np.vdot(ground, psi)) ** 2
    if overlap < config.p0 - TOLERANCES.normalization:
        raise ValidationError(
            'initial overlap %(o).6g is below the promised p0 = %(p).6g', code='overlap_below_p0',
            params={'o': overlap, 'p': config.p0},
        )

    T_prime, tau = cosine_params(gap, config.p0, 1.0, config.c_t, config.c_tau)
    energy = lambda0 + config.energy_error
    dec = cosine_lcu(config.H, energy, tau, T_prime)
    channel = hybrid.HybridChannel(dec, partition.coarsest(dec.m))
    rounds = hybrid.compose_rounds([channel], psi)

    stage1 = cosine_filter(config.H, energy, tau, T_prime)
    first = filter_quality(config.H, psi, stage1)
    deviation = abs(rounds.reduction_factor - first.survival ** 2)
    if deviation > TOLERANCES.backend_agreement:
        raise NumericalInvariantError(
            'cosine LCU and spectral filter disagree', quantity='R', deviation=deviation,
            tolerance=TOLERANCES.backend_agreement,
        )
    filtered = stage1 @ psi
    filtered /= np.linalg.norm(filtered)

    sigma2, tau_refined = gaussian_params(gap, config.p0, config.epsilon, config.c_sigma, config.c_tau_refined)
    refined_energy = lambda0 + config.refined_energy_error
    second = filter_quality(config.H, filtered, gaussian_filter(config.H, refined_energy, tau_refined, sigma2))

    complexity = complexity_report(config.p0, gap, config.epsilon)
    return GspReport(
        dim=config.H.shape[0], Delta=gap, p0=config.p0, eps=config.epsilon, Tprime=T_prime, tau=tau,
        sigma2=sigma2, tau_refined=tau_refined, R=rounds.reduction_factor, survival=first.survival,
        stage1_dist=first.distance, final_dist=second.distance,
        total_time_term1=complexity.term1, total_time_term2=complexity.term2,
    )


def random_instance(dim, gap, p0, rng, lambda0=0.1):
    """H with spectrum in [0, 1], gap ``gap`` above ``lambda0``, and |psi> with overlap exactly ``p0``."""
    if dim < 2:
        raise ValidationError('ground-state problems need dimension >= 2', code='bad_dimension')
    if lambda0 + gap > 1:
        raise ValidationError('gap does not fit inside [0, 1]', code='bad_gap')
    excited = np.concatenate([[lambda0 + gap], rng.uniform(lambda0 + gap, 1.0, size=dim - 2)])
    u = qcore.haar_unitary(dim, rng)
    h = (u * np.concatenate([[lambda0], excited])) @ qcore.dagger(u)
    h = (h + qcore.dagger(h)) / 2
    rest = rng.normal(size=dim - 1) + 1j * rng.normal(size=dim - 1)
    rest /= np.linalg.norm(rest)
    psi = u @ np.concatenate([[math.sqrt(p0)], math.sqrt(1 - p0) * rest])
    return h, psi


def sweep(dim, gap, p0, epsilons, instances, seed, constants=None, workers=1):
    """GspReport for every (instance, epsilon), instances drawn from seeded substreams."""
    constants = constants or {}
    problems = [random_instance(dim, gap, p0, utils.substream(seed, STREAM_INSTANCE, i)) for i in range(instances)]

    def point(item):
        (h, psi), epsilon = item
        return hybrid_gsp(GspConfig(h, p0, epsilon, **constants), psi)

    return utils.parallel_map(point, [(problem, eps) for problem in problems for eps in epsilons], workers)
