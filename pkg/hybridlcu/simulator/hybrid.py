"""The hybrid LCU channel over ancilla A, control qubit B and system S.

Groups of a partition are block-encoded coherently; pairs of groups are
combined virtually through a controlled pair unitary and a Hadamard-test
style measurement. Two backends evaluate the same expectation values:

* ``analytic``: closed-form projected state built from the group operators.
* ``circuit``: explicit block-encoding unitaries and Born-rule probabilities.

Register order in every explicit matrix is B (control) then A (ancilla) then S.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError
from scipy.linalg import block_diag

from . import partition as partitions, qcore, utils
from .constants import SHOT_BLOCK_SIZE, SHOT_LOG_FIELDS, STREAM_SHOTS_OBS, TOLERANCES
from .exceptions import DegenerateRoundError

logger = logging.getLogger(__name__)

BACKENDS = ('analytic', 'circuit')

PLUS = np.full((2, 2), 0.5, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    ancilla_qubits: int
    unitary: np.ndarray
    operator: np.ndarray
    members: tuple

    @property
    def group_size(self):
        return len(self.members)


@dataclass(frozen=True)
class OutcomeRecord:
    k: int
    kprime: int
    z: int
    b: int
    j: int
    g: float

    def __post_init__(self):
        if self.z == 1 and self.g != 0:
            raise ValidationError('g must vanish when the ancilla is not all-zero', code='bad_record')


def prepare_unitary(amplitudes, width):
    """Unitary on ``width`` qubits whose first column is ``amplitudes`` (zero padded).

    Completed by the Householder reflection about (first column - e_0).
    """
    dim = 2 ** width
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.size > dim:
        raise ValidationError('%(n)d amplitudes do not fit on %(w)d qubits', code='bad_width',
                              params={'n': amplitudes.size, 'w': width})
    v = np.zeros(dim, dtype=complex)
    v[:amplitudes.size] = amplitudes / np.linalg.norm(amplitudes)
    u = v.copy()
    u[0] -= 1.0
    norm2 = np.vdot(u, u).real
    if norm2 < 1e-28:
        return np.eye(dim, dtype=complex)
    return np.eye(dim, dtype=complex) - 2.0 * np.outer(u, np.conj(u)) / norm2


def build_block_encoding(group, dec, width=None):
    """L_k = (PRE^dagger x 1) SEL (PRE x 1), padded to ``width`` ancilla qubits."""
    size = len(group.members)
    own = math.ceil(math.log2(size))
    width = own if width is None else width
    if width < own:
        raise ValidationError('group of size %(s)d needs %(own)d ancilla qubits', code='bad_width',
                              params={'s': size, 'own': own})
    if width == 0:
        u = dec.terms[group.members[0]].unitary
        return BlockEncoding(0, u, group.operator, group.members)

    amplitudes = np.sqrt(dec.probs[list(group.members)] / group.weight)
    pre = np.kron(prepare_unitary(amplitudes, width), np.eye(dec.dim))
    identity = np.eye(dec.dim, dtype=complex)
    blocks = [dec.terms[i].unitary for i in group.members] + [identity] * (2 ** width - size)
    select = block_diag(*blocks)
    unitary = qcore.dagger(pre) @ select @ pre
    return BlockEncoding(width, unitary, group.operator, group.members)


def build_controlled_pair(l_k, l_kprime):
    """|0><0|_B x L_k' + |1><1|_B x L_k."""
    return np.kron(KET0, l_kprime) + np.kron(KET1, l_k)


class HybridChannel:
    """Mixed-unitary channel for a decomposition and a partition of its terms."""

    def __init__(self, decomposition, partition, backend='analytic'):
        if backend not in BACKENDS:
            raise ValidationError('unknown backend %(b)r', code='bad_backend', params={'b': backend})
        self.decomposition = decomposition
        self.partition = partition
        self.backend = backend
        self.groups = partitions.group_operators(decomposition, partition)
        self.weights = np.array([g.weight for g in self.groups])
        self.ancilla_width = partitions.ancilla_width(partition)
        if abs(self.pair_weights.sum() - 1.0) > TOLERANCES.normalization:
            raise ValidationError('pair weights do not sum to one', code='bad_weights')

    @property
    def G(self):
        return len(self.groups)

    @property
    def dim(self):
        return self.decomposition.dim

    @property
    def pair_weights(self):
        return np.outer(self.weights, self.weights)

    @cached_property
    def block_encodings(self):
        return [build_block_encoding(g, self.decomposition, self.ancilla_width) for g in self.groups]

    def pair_unitary(self, k, kprime):
        encodings = self.block_encodings
        if k == kprime:
            return encodings[k].unitary
        return build_controlled_pair(encodings[k].unitary, encodings[kprime].unitary)

    def __repr__(self):
        return '<HybridChannel m=%d G=%d a*=%d %s>' % (
            self.decomposition.m, self.G, self.ancilla_width, self.backend)


@dataclass(frozen=True, eq=False)
class ProjectedState:
    """Blocks of the ancilla-projected output: I_B/2 x ``diagonal`` + X_B/2 x ``coherent``."""
    diagonal: np.ndarray
    coherent: np.ndarray


def projected_state(channel, rho):
    rho = qcore.as_density(rho)
    diagonal = np.zeros_like(rho)
    for g in channel.groups:
        diagonal += g.weight * g.operator @ rho @ qcore.dagger(g.operator)
    # the pair sum of (K_k rho K_k'^dagger + h.c.)/2 collapses onto K_LCU
    k_lcu = sum(g.weight * g.operator for g in channel.groups)
    coherent = k_lcu @ rho @ qcore.dagger(k_lcu)
    return ProjectedState(diagonal=diagonal, coherent=coherent)


def _input_state(channel, rho, with_control):
    state = np.kron(qcore.projector_zero(channel.ancilla_width), rho)
    return np.kron(PLUS, state) if with_control else state


def _pair_output(channel, rho, k, kprime):
    unitary = channel.pair_unitary(k, kprime)
    state = _input_state(channel, rho, with_control=k != kprime)
    return unitary @ state @ qcore.dagger(unitary)


def _circuit_expectation(channel, rho, o):
    pi_a = qcore.projector_zero(channel.ancilla_width)
    diagonal_obs = np.kron(pi_a, o.matrix)
    pair_obs = np.kron(PAULI_X, diagonal_obs)
    total = 0.0
    for k in range(channel.G):
        for kprime in range(channel.G):
            sigma = _pair_output(channel, rho, k, kprime)
            measured = diagonal_obs if k == kprime else pair_obs
            total += channel.pair_weights[k, kprime] * np.trace(measured @ sigma).real
    return float(total)


def exact_expectation(channel, rho, o, backend=None):
    """tr[O Lambda(rho)] for the normalized LCU map."""
    backend = channel.backend if backend is None else backend
    o = qcore.as_observable(o)
    rho = qcore.as_density(rho)
    if backend == 'circuit':
        return _circuit_expectation(channel, rho, o)
    if backend != 'analytic':
        raise ValidationError('unknown backend %(b)r', code='bad_backend', params={'b': backend})
    return float(np.trace(o.matrix @ projected_state(channel, rho).coherent).real)


def second_moment(channel, rho, o):
    """E[g_O^2] = sum_k q_k tr[O^2 K_k rho K_k^dagger].

    Only the I_B/2 block contributes because g^2 carries no (-1)^b.
    """
    o = qcore.as_observable(o)
    return float(np.trace(o.squared() @ projected_state(channel, rho).diagonal).real)


@dataclass(frozen=True, eq=False)
class OutcomeTable:
    """Born probabilities over (z, b, j) for one pair, with the matching g values."""
    probs: np.ndarray
    values: np.ndarray

    @property
    def mean(self):
        return float((self.probs * self.values).sum())

    @property
    def second_moment(self):
        return float((self.probs * self.values ** 2).sum())


def outcome_values(o):
    values = np.zeros((2, 2, o.dim))
    values[0, 0] = o.eigenvalues
    values[0, 1] = -o.eigenvalues
    return values


def outcome_distribution(channel, rho, o, k, kprime):
    o = qcore.as_observable(o)
    rho = qcore.as_density(rho)
    ancillas = 2 ** channel.ancilla_width
    sigma = _pair_output(channel, rho, k, kprime)
    rotate = np.kron(np.eye(ancillas), qcore.dagger(o.eigenvectors))
    if k != kprime:
        rotate = np.kron(HADAMARD, rotate)
    diagonal = np.clip(np.diag(rotate @ sigma @ qcore.dagger(rotate)).real, 0.0, None)

    probs = np.zeros((2, 2, o.dim))
    if k == kprime:
        block = diagonal.reshape(ancillas, o.dim)
        probs[0, 0] = block[0]
        probs[1, 0] = block[1:].sum(axis=0)
    else:
        block = diagonal.reshape(2, ancillas, o.dim)
        probs[0] = block[:, 0]
        probs[1] = block[:, 1:].sum(axis=1)
    return OutcomeTable(probs=probs, values=outcome_values(o))


def exhaustive_expectation(channel, rho, o):
    return float(sum(
        channel.pair_weights[k, kp] * outcome_distribution(channel, rho, o, k, kp).mean
        for k in range(channel.G) for kp in range(channel.G)
    ))


def exhaustive_second_moment(channel, rho, o):
    return float(sum(
        channel.pair_weights[k, kp] * outcome_distribution(channel, rho, o, k, kp).second_moment
        for k in range(channel.G) for kp in range(channel.G)
    ))


@dataclass(frozen=True, eq=False)
class ShotLog:
    k: np.ndarray
    kprime: np.ndarray
    z: np.ndarray
    b: np.ndarray
    j: np.ndarray
    g: np.ndarray

    def __len__(self):
        return self.g.size

    def records(self):
        for row in zip(self.k, self.kprime, self.z, self.b, self.j, self.g):
            yield OutcomeRecord(*(int(v) for v in row[:5]), float(row[5]))

    @classmethod
    def concatenate(cls, logs):
        return cls(*(np.concatenate([getattr(log, f) for log in logs])
                     for f in ('k', 'kprime', 'z', 'b', 'j', 'g')))


class ShotSampler:
    """Pair weights and per-pair outcome tables for one (channel, rho, O)."""

    def __init__(self, channel, rho, o):
        self.channel = channel
        self.observable = qcore.as_observable(o)
        rho = qcore.as_density(rho)
        G = channel.G
        self.pairs = [(k, kp) for k in range(G) for kp in range(G)]
        self.pair_cdf = np.cumsum(channel.pair_weights.reshape(-1))
        tables = [outcome_distribution(channel, rho, self.observable, k, kp) for k, kp in self.pairs]
        self.table_cdfs = [np.cumsum(t.probs.reshape(-1)) for t in tables]
        self.values = outcome_values(self.observable).reshape(-1)
        self.shape = (2, 2, self.observable.dim)

    @staticmethod
    def _draw(cdf, u):
        return np.minimum(np.searchsorted(cdf, u * cdf[-1], side='right'), cdf.size - 1)

    def sample(self, rng):
        pair = int(self._draw(self.pair_cdf, rng.random()))
        outcome = int(self._draw(self.table_cdfs[pair], rng.random()))
        z, b, j = np.unravel_index(outcome, self.shape)
        k, kp = self.pairs[pair]
        return OutcomeRecord(k, kp, int(z), int(b), int(j), float(self.values[outcome]))

    def sample_block(self, rng, n):
        pair = self._draw(self.pair_cdf, rng.random(n))
        u = rng.random(n)
        outcome = np.empty(n, dtype=np.int64)
        for p in np.unique(pair):
            mask = pair == p
            outcome[mask] = self._draw(self.table_cdfs[p], u[mask])
        z, b, j = np.unravel_index(outcome, self.shape)
        pairs = np.array(self.pairs)[pair]
        return ShotLog(pairs[:, 0], pairs[:, 1], z, b, j, self.values[outcome])


def sample_g(channel, rho, o, rng):
    """One shot: (k,k') ~ q_k q_k', then (z,b,j) from the pair's Born table."""
    return ShotSampler(channel, rho, o).sample(rng)


def run_shots(channel, rho, o, shots, seed, workers=1, tag=STREAM_SHOTS_OBS, sampler=None):
    """``shots`` draws in fixed-size blocks; block b uses substream (seed, tag, b)."""
    if shots < 1:
        raise ValidationError('shot count must be positive', code='bad_shots')
    sampler = ShotSampler(channel, rho, o) if sampler is None else sampler
    blocks = range(math.ceil(shots / SHOT_BLOCK_SIZE))

    def draw(block):
        size = min(SHOT_BLOCK_SIZE, shots - block * SHOT_BLOCK_SIZE)
        return sampler.sample_block(utils.substream(seed, tag, block), size)

    return ShotLog.concatenate(utils.parallel_map(draw, blocks, workers))


def write_shot_log(path, log, metadata):
    rows = (
        (shot, k + 1, kp + 1, z, b, j, g)
        for shot, (k, kp, z, b, j, g) in enumerate(zip(log.k, log.kprime, log.z, log.b, log.j, log.g))
    )
    return utils.write_csv(path, SHOT_LOG_FIELDS, rows, metadata)


@dataclass(frozen=True, eq=False)
class RoundComposition:
    states: list
    factors: list

    @property
    def reduction_factor(self):
        return float(np.prod(self.factors))


def compose_rounds(channels, rho):
    """Per-round R values and renormalized intermediate states."""
    state = qcore.as_density(rho)
    states, factors = [state], []
    for index, channel in enumerate(channels):
        if channel.dim != state.shape[0]:
            raise ValidationError('round %(i)d expects dimension %(d)d', code='dimension_mismatch',
                                  params={'i': index, 'd': channel.dim})
        mixed = projected_state(channel, state).diagonal
        factor = np.trace(mixed).real
        if factor <= TOLERANCES.normalization:
            raise DegenerateRoundError(
                'round %d leaves a state of trace %.3e' % (index, factor), quantity='trace', deviation=factor)
        factors.append(float(factor))
        state = mixed / factor
        states.append(state)
    return RoundComposition(states=states, factors=factors)


@dataclass(frozen=True)
class ResourceSummary:
    ancilla_width: int
    group_sizes: tuple
    gate_scaling: float


def resource_summary(channel):
    """Ancilla width a* and the select-cost scaling max_{k!=l} log(|S_k|^|S_k| |S_l|^|S_l|)."""
    sizes = tuple(len(g.members) for g in channel.groups)
    costs = sorted((s * math.log2(s) for s in sizes), reverse=True)
    scaling = costs[0] + (costs[1] if len(costs) > 1 else 0.0)
    return ResourceSummary(channel.ancilla_width, sizes, scaling)


def extreme_channels(dec, backend='analytic'):
    """The fully coherent and fully virtual channels of a decomposition."""
    return (HybridChannel(dec, partitions.coarsest(dec.m), backend),
            HybridChannel(dec, partitions.singletons(dec.m), backend))
