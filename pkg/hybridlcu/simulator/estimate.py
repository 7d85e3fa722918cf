"""Sample-count planning and confidence intervals for hybrid LCU estimators.

Finite-sample planners use Bernstein's inequality; the ratio estimator also
has an asymptotic (delta-method) interval. Variances are population-style
(divide by N), which is biased at small N.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError
from scipy.optimize import bisect
from scipy.stats import norm

from . import utils
from .constants import REPORT_FIELDS, TOLERANCES

logger = logging.getLogger(__name__)


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ValidationError('failure probability %(d)r must lie in (0, 1)', code='bad_delta', params={'d': delta})


def _check_positive(**values):
    for name, value in values.items():
        if value is None or not value > 0:
            raise ValidationError('%(name)s must be positive, got %(v)r', code='not_positive',
                                  params={'name': name, 'v': value})


@dataclass(frozen=True)
class EstimationConfig:
    epsilon: float
    delta: float
    bound_c: float = 1.0
    ratio_bound_cprime: float = None
    sigma2_bound_x: float = None
    sigma2_bound_y: float = None

    def __post_init__(self):
        _check_positive(epsilon=self.epsilon, bound_c=self.bound_c)
        _check_delta(self.delta)
        for name in ('ratio_bound_cprime', 'sigma2_bound_x', 'sigma2_bound_y'):
            if getattr(self, name) is not None:
                _check_positive(**{name: getattr(self, name)})

    @property
    def cprime(self):
        """Bound on |mu_X / mu_Y|; falls back to ||O|| (= bound_c) when not supplied."""
        return self.bound_c if self.ratio_bound_cprime is None else self.ratio_bound_cprime


@dataclass(frozen=True, eq=False)
class SampleBatch:
    g_obs: np.ndarray
    g_one: np.ndarray = None
    seed: int = None
    bound_c: float = None

    def __post_init__(self):
        g_obs = np.asarray(self.g_obs, dtype=float).reshape(-1)
        object.__setattr__(self, 'g_obs', g_obs)
        if self.g_one is not None:
            g_one = np.asarray(self.g_one, dtype=float).reshape(-1)
            if g_one.size != g_obs.size:
                raise ValidationError('paired batches differ in length (%(a)d vs %(b)d)', code='unpaired',
                                      params={'a': g_obs.size, 'b': g_one.size})
            object.__setattr__(self, 'g_one', g_one)
        if self.bound_c is not None and g_obs.size:
            largest = np.max(np.abs(g_obs))
            if largest > self.bound_c + TOLERANCES.backend_agreement:
                raise ValidationError('|g| = %(g).6g exceeds the bound %(c).6g', code='out_of_bound',
                                      params={'g': largest, 'c': self.bound_c})

    @property
    def N(self):
        return self.g_obs.size


@dataclass(frozen=True)
class EstimationReport:
    method: str
    target: str
    estimate: float
    half_width: float
    delta: float
    epsilon: float
    N: int
    sigma2_O: float
    sigma2_one: float = None
    R_hat: float = None
    seed: int = None
    notes: tuple = field(default=())

    def row(self):
        return {name: getattr(self, name) for name in REPORT_FIELDS}

    @property
    def interval(self):
        return (self.estimate - self.half_width, self.estimate + self.half_width)

    def covers(self, value):
        return abs(value - self.estimate) <= self.half_width


@dataclass(frozen=True)
class SamplePlan:
    N: int
    path: str
    sigma2: float
    c: float


def bernstein_n(sigma2_bound, c, epsilon, delta):
    """N = ceil(2 ln(2/delta) (sigma^2/eps^2 + 2c/(3 eps)))."""
    _check_positive(sigma2_bound=sigma2_bound, c=c, epsilon=epsilon)
    _check_delta(delta)
    return math.ceil(2 * math.log(2 / delta) * (sigma2_bound / epsilon ** 2 + 2 * c / (3 * epsilon)))


def bernstein_half_width(sigma2, c, n, delta):
    """Smallest eps for which ``n`` samples meet the Bernstein tail ``delta``."""
    _check_delta(delta)
    log_term = math.log(2 / delta)
    linear = 4 * log_term * c / 3
    return (linear + math.sqrt(linear ** 2 + 8 * n * log_term * sigma2)) / (2 * n)


def ratio_n(config, sigma_x2, sigma_y2, mu_y_abs):
    """Sample count for |X_bar/Y_bar - mu_X/mu_Y| <= eps with probability 1 - delta."""
    _check_positive(mu_y_abs=mu_y_abs)
    c, cprime, eps = config.bound_c, config.cprime, config.epsilon
    if eps > 2 * cprime:
        raise ValidationError(
            'epsilon %(eps)g exceeds 2 c\' = %(limit)g', code='epsilon_range',
            params={'eps': eps, 'limit': 2 * cprime},
        )
    linear = c / (6 * mu_y_abs * eps)
    first = sigma_x2 / (mu_y_abs ** 2 * eps ** 2) + linear
    second = sigma_y2 / (mu_y_abs ** 2 * eps ** 2) * cprime ** 2 + linear * cprime
    return math.ceil(32 * math.log(4 / config.delta) * max(first, second))


def plan_numerator_n(config, one_norm, r_bound=None):
    """Bernstein count for ||c||^2 g_bar, with sigma^2 <= ||c||^4 R ||O||^2."""
    path = 'supplied_R'
    if r_bound is None:
        r_bound, path = 1.0, 'worst_case_R'
        logger.info('no reduction-factor bound supplied, planning with R = 1')
    scale = one_norm ** 2
    sigma2 = scale ** 2 * r_bound * config.bound_c ** 2
    c = scale * config.bound_c
    if config.sigma2_bound_x is not None:
        sigma2, path = scale ** 2 * config.sigma2_bound_x, 'supplied_sigma2'
    return SamplePlan(bernstein_n(sigma2, c, config.epsilon, config.delta), path, sigma2, c)


def plan_ratio_n(config, p_lower, r_bound=None):
    """Ratio count with sigma_X^2 <= R ||O||^2, sigma_Y^2 <= R and |mu_Y| >= ``p_lower``."""
    path = 'supplied_R'
    if r_bound is None:
        r_bound, path = 1.0, 'worst_case_R'
    if config.ratio_bound_cprime is None:
        path += '+cprime_default'
        logger.warning('ratio bound c\' not supplied, defaulting to ||O|| = %g', config.bound_c)
    sigma_x2 = config.sigma2_bound_x if config.sigma2_bound_x is not None else r_bound * config.bound_c ** 2
    sigma_y2 = config.sigma2_bound_y if config.sigma2_bound_y is not None else r_bound
    return SamplePlan(ratio_n(config, sigma_x2, sigma_y2, p_lower), path, sigma_x2, config.bound_c)


def gaussian_quantile(delta):
    """z with P(Z > z) = delta/2, by bisection."""
    _check_delta(delta)
    return bisect(lambda z: norm.sf(z) - delta / 2, 0.0, 40.0, xtol=1e-10)


def sample_variance(values):
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValidationError('no samples', code='empty_batch')
    return float(np.mean((values - values.mean()) ** 2))


def estimate_R_obs(batch):
    """sigma_hat^2 + g_bar^2, the plug-in estimate of R^O."""
    values = batch.g_obs if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float).reshape(-1)
    return sample_variance(values) + float(values.mean()) ** 2


def estimate_numerator(batch, one_norm, delta=0.05, sigma2_bound=None, bound_c=None, method='bernstein'):
    """Estimate of tr[O K rho K^dagger] = ||c||^2 E[g_O]."""
    if batch.N == 0:
        raise ValidationError('no samples', code='empty_batch')
    _check_delta(delta)
    scale = one_norm ** 2
    mean = float(batch.g_obs.mean())
    sigma2 = sample_variance(batch.g_obs)
    r_hat = estimate_R_obs(batch)

    if method == 'bernstein':
        notes = ('sigma2_bound',) if sigma2_bound is not None else ('sigma2_from_R_hat',)
        sigma2_tilde = scale ** 2 * (r_hat if sigma2_bound is None else sigma2_bound)
        c = bound_c if bound_c is not None else (batch.bound_c if batch.bound_c is not None else np.max(np.abs(batch.g_obs)))
        half = bernstein_half_width(sigma2_tilde, scale * float(c), batch.N, delta)
    elif method == 'asymptotic':
        notes = ()
        half = gaussian_quantile(delta) * scale * math.sqrt(sigma2 / batch.N)
    else:
        raise ValidationError('unknown method %(m)r', code='bad_method', params={'m': method})

    return EstimationReport(
        method=method, target='numerator', estimate=scale * mean, half_width=float(half), delta=delta,
        epsilon=float(half), N=batch.N, sigma2_O=sigma2, R_hat=r_hat, seed=batch.seed, notes=notes,
    )


def estimate_ratio(batch, delta=0.05):
    """g_bar_O / g_bar_1 with the asymptotic interval z_{delta/2} sigma_ratio / sqrt(N)."""
    if batch.N == 0:
        raise ValidationError('no samples', code='empty_batch')
    if batch.g_one is None:
        raise ValidationError('ratio needs paired identity samples', code='unpaired')
    mean_obs, mean_one = float(batch.g_obs.mean()), float(batch.g_one.mean())
    if mean_one == 0:
        raise ValidationError('identity mean vanishes, ratio undefined', code='undefined_ratio')
    var_obs, var_one = sample_variance(batch.g_obs), sample_variance(batch.g_one)
    sigma2_ratio = var_obs / mean_one ** 2 + mean_obs ** 2 * var_one / mean_one ** 4
    half = gaussian_quantile(delta) * math.sqrt(sigma2_ratio / batch.N)
    return EstimationReport(
        method='asymptotic', target='ratio', estimate=mean_obs / mean_one, half_width=half, delta=delta,
        epsilon=half, N=batch.N, sigma2_O=var_obs, sigma2_one=var_one, R_hat=estimate_R_obs(batch),
        seed=batch.seed,
    )


def ratio_sigma2(report):
    """sigma_ratio^2 recovered from a ratio report."""
    return report.half_width ** 2 * report.N / gaussian_quantile(report.delta) ** 2


def write_reports(path, reports, metadata):
    return utils.write_csv(path, REPORT_FIELDS, [r.row() for r in reports], metadata)
