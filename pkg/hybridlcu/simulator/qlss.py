"""Fourier-type LCU for M^{-1} b, with the y-integral sampled virtually.

    M^{-1} ~ (i / sqrt(2 pi)) sum_j dy sum_k dz z_k e^{-z_k^2/2} e^{-i M y_j z_k}

Each y_j selects one coherently implemented group K_j (the k-sum), drawn with
probability q_j = 1/J. In the eigenbasis of M every K_j is diagonal with
entries F(lambda y_j), F(x) = (2/beta) sum_{k>0} w_k sin(x z_k).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from . import qcore, utils
from .constants import STREAM_INSTANCE

logger = logging.getLogger(__name__)

KERNEL_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class QlssConfig:
    M: np.ndarray
    b: np.ndarray
    kappa: float
    epsilon: float
    c_j: float = 1.0
    c_k: float = 1.0
    c_y: float = 1.0
    c_z: float = 1.0

    def __post_init__(self):
        m = qcore.check_hermitian(self.M, 'M')
        if self.kappa < 1:
            raise ValidationError('condition number must be at least 1', code='bad_kappa')
        if not 0 < self.epsilon < 1:
            raise ValidationError('epsilon must lie in (0, 1)', code='bad_epsilon')
        magnitudes = np.abs(np.linalg.eigvalsh((m + qcore.dagger(m)) / 2))
        if magnitudes.min() < 1 / self.kappa - 1e-9 or magnitudes.max() > 1 + 1e-9:
            raise ValidationError(
                'spectrum magnitudes [%(lo).6g, %(hi).6g] leave [1/kappa, 1]', code='bad_spectrum',
                params={'lo': magnitudes.min(), 'hi': magnitudes.max()},
            )
        b = qcore.PureState(self.b).vector
        if b.shape[0] != m.shape[0]:
            raise ValidationError('b has the wrong dimension', code='dimension_mismatch')
        object.__setattr__(self, 'M', m)
        object.__setattr__(self, 'b', b)
        for name in ('c_j', 'c_k', 'c_y', 'c_z'):
            if getattr(self, name) <= 0:
                raise ValidationError('grid constant %(n)s must be positive', code='bad_constant', params={'n': name})

    @property
    def log_term(self):
        return math.log(self.kappa / self.epsilon)


@dataclass(frozen=True, eq=False)
class QlssGrid:
    J: int
    K: int
    dy: float
    dz: float

    def __post_init__(self):
        if self.J < 1 or self.K < 1:
            raise ValidationError('grid needs J >= 1 and K >= 1', code='empty_grid')
        if self.dy <= 0 or self.dz <= 0:
            raise ValidationError('grid spacings must be positive', code='empty_grid')

    @property
    def y(self):
        return self.dy * np.arange(self.J)

    @property
    def z(self):
        return self.dz * np.arange(-self.K, self.K + 1)

    @property
    def positive_weights(self):
        """w_k = dz z_k e^{-z_k^2/2} for k = 1..K."""
        z = self.dz * np.arange(1, self.K + 1)
        return self.dz * z * np.exp(-z ** 2 / 2)

    @property
    def beta(self):
        return float(2 * self.positive_weights.sum())

    @property
    def one_norm(self):
        """(1/sqrt(2 pi)) sum_j dy sum_k dz |z_k| e^{-z_k^2/2}."""
        return self.J * self.dy * self.beta / math.sqrt(2 * math.pi)

    @property
    def q(self):
        return np.full(self.J, 1.0 / self.J)


def build_grid(config):
    log_term = config.log_term
    ratio = config.kappa / config.epsilon
    grid = QlssGrid(
        J=math.ceil(config.c_j * ratio * log_term),
        K=math.ceil(config.c_k * config.kappa * log_term),
        dy=config.c_y * config.epsilon / math.sqrt(log_term),
        dz=config.c_z / (config.kappa * math.sqrt(log_term)),
    )
    if abs(grid.beta - 2) > 0.1:
        logger.warning('z-grid mass beta = %.4f is more than 5%% away from 2; raise c_k', grid.beta)
    return grid


def kernel(grid, x):
    """F(x) = (2/beta) sum_{k>0} w_k sin(x z_k), elementwise over ``x``."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    weights = grid.positive_weights * (2 / grid.beta)
    z = grid.dz * np.arange(1, grid.K + 1)
    out = np.empty_like(flat)
    step = max(1, KERNEL_CHUNK // grid.K)
    for start in range(0, flat.size, step):
        out[start:start + step] = np.sin(np.outer(flat[start:start + step], z)) @ weights
    return out.reshape(x.shape)


def group_operators(grid, m):
    """K_j = V diag(F(lambda y_j)) V^dagger, stacked over j."""
    w, v = qcore.eigh(m)
    diagonals = kernel(grid, np.outer(grid.y, w))
    return np.einsum('ik,jk,lk->jil', v, diagonals, np.conj(v))


def hybrid_partition(grid, m):
    """Virtual split over the y grid: weights q_j and the coherent group operators K_j."""
    return grid.q, group_operators(grid, m)


@dataclass(frozen=True)
class QlssFactors:
    kappa: float
    epsilon: float
    J: int
    K: int
    one_norm: float
    P: float
    R_int: float
    R_int_closed_form: float
    R_rand: float
    anc_hybrid: int
    anc_coherent: int
    beta: float
    inverse_error: float

    def row(self):
        return {name: getattr(self, name) for name in (
            'kappa', 'epsilon', 'J', 'K', 'one_norm', 'P', 'R_int', 'R_int_closed_form',
            'R_rand', 'anc_hybrid', 'anc_coherent')}


def reduction_factors(config, grid=None):
    """R for the y-virtual partition, its closed-form asymptote, and P = ||A_norm b||^2."""
    grid = build_grid(config) if grid is None else grid
    w, v = qcore.eigh(config.M)
    amplitudes = qcore.dagger(v) @ config.b
    populations = np.abs(amplitudes) ** 2
    f = kernel(grid, np.outer(grid.y, w))
    q = grid.q

    r_int = float(q @ (f ** 2 @ populations))
    a_norm = q @ f
    p = float(populations @ a_norm ** 2)
    closed = math.pi * math.sqrt(2) / (4 * grid.beta * grid.one_norm) * float(populations @ (1 / np.abs(w)))

    exact = amplitudes / w
    approx = grid.one_norm * a_norm * amplitudes
    inverse_error = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))

    return QlssFactors(
        kappa=config.kappa, epsilon=config.epsilon, J=grid.J, K=grid.K, one_norm=grid.one_norm, P=p,
        R_int=r_int, R_int_closed_form=closed, R_rand=1.0,
        anc_hybrid=math.ceil(math.log2(2 * grid.K + 1)),
        anc_coherent=math.ceil(math.log2(grid.J * (2 * grid.K + 1))),
        beta=grid.beta, inverse_error=inverse_error,
    )


def sanity_bounds(config):
    """<b|M^{-2}|b> and <b| |M|^{-1} |b>, both inside [1, kappa^2] and [1, kappa]."""
    w, v = qcore.eigh(config.M)
    populations = np.abs(qcore.dagger(v) @ config.b) ** 2
    return float(populations @ w ** -2.0), float(populations @ (1 / np.abs(w)))


def random_instance(dim, kappa, rng, align=True):
    """Hermitian M with |spectrum| spanning [1/kappa, 1], and b on the 1/kappa eigenvector when ``align``."""
    if dim < 2:
        raise ValidationError('instances need dimension >= 2', code='bad_dimension')
    magnitudes = np.concatenate([[1 / kappa, 1.0], np.exp(rng.uniform(-math.log(kappa), 0, size=dim - 2))])
    signs = np.where(rng.random(dim) < 0.5, -1.0, 1.0)
    u = qcore.haar_unitary(dim, rng)
    m = (u * (signs * magnitudes)) @ qcore.dagger(u)
    m = (m + qcore.dagger(m)) / 2
    b = u[:, 0].copy() if align else qcore.random_pure_state(dim, rng)
    return m, b


def sweep(kappas, epsilon, dim, seed, constants=None, align=True, workers=1):
    """One QlssFactors per kappa, each on its own seeded instance."""
    constants = constants or {}

    def point(index):
        kappa = kappas[index]
        m, b = random_instance(dim, kappa, utils.substream(seed, STREAM_INSTANCE, index), align)
        return reduction_factors(QlssConfig(m, b, kappa, epsilon, **constants))

    return utils.parallel_map(point, range(len(kappas)), workers)


def fit_exponent(xs, ys):
    """Least-squares slope of log y against log x."""
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)
