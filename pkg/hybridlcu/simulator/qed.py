"""Hybrid quantum error detection on the Steane code.

X-type stabilizers are measured coherently (one group, projector P_X) and
Z-type stabilizers are sampled virtually. The channel's success probability
is tr[P_C rho] with P_C = P_Z P_X, and its reduction factor is tr[P_X rho].
"""
import logging
import math
from dataclasses import dataclass
from functools import cache, reduce

import numpy as np
from django.core.exceptions import ValidationError

from . import hybrid, lcu, partition, qcore, utils
from .constants import STEANE_QUBITS, STEANE_SUPPORTS, STREAM_CODEWORDS

logger = logging.getLogger(__name__)

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products as (power of i, label)
_PRODUCTS = {
    ('X', 'Y'): (1, 'Z'), ('Y', 'X'): (3, 'Z'),
    ('Y', 'Z'): (1, 'X'), ('Z', 'Y'): (3, 'X'),
    ('Z', 'X'): (1, 'Y'), ('X', 'Z'): (3, 'Y'),
}


def _multiply_labels(a, b):
    if a == 'I':
        return 0, b
    if b == 'I':
        return 0, a
    if a == b:
        return 0, 'I'
    return _PRODUCTS[(a, b)]


@dataclass(frozen=True)
class PauliString:
    """i^phase times a tensor product of single-qubit Paulis, qubit 1 leftmost."""
    labels: str
    phase: int = 0

    def __post_init__(self):
        if not self.labels or set(self.labels) - set(PAULI_MATRICES):
            raise ValidationError('invalid Pauli labels %(l)r', code='bad_pauli', params={'l': self.labels})
        object.__setattr__(self, 'phase', self.phase % 4)

    @classmethod
    def from_support(cls, kind, support, n=STEANE_QUBITS):
        """``kind`` on the 1-based qubits in ``support``, identity elsewhere."""
        support = set(support)
        if any(q < 1 or q > n for q in support):
            raise ValidationError('support %(s)s outside 1..%(n)d', code='bad_pauli', params={'s': sorted(support), 'n': n})
        return cls(''.join(kind if q + 1 in support else 'I' for q in range(n)))

    @classmethod
    def identity(cls, n=STEANE_QUBITS):
        return cls('I' * n)

    @property
    def n(self):
        return len(self.labels)

    @property
    def sign(self):
        """+1 or -1 for Hermitian strings."""
        if self.phase % 2:
            raise ValidationError('Pauli string with phase i^%(p)d is not Hermitian', code='not_hermitian',
                                  params={'p': self.phase})
        return 1 if self.phase == 0 else -1

    @property
    def weight(self):
        return sum(1 for label in self.labels if label != 'I')

    def __mul__(self, other):
        if self.n != other.n:
            raise ValidationError('Pauli strings act on different qubit counts', code='dimension_mismatch')
        phase, labels = self.phase + other.phase, []
        for a, b in zip(self.labels, other.labels):
            p, label = _multiply_labels(a, b)
            phase += p
            labels.append(label)
        return PauliString(''.join(labels), phase)

    def commutes_with(self, other):
        clashes = sum(1 for a, b in zip(self.labels, other.labels) if a != 'I' and b != 'I' and a != b)
        return clashes % 2 == 0

    def matrix(self):
        return 1j ** self.phase * qcore.kron(*(PAULI_MATRICES[label] for label in self.labels))


def stabilizer_group(generators, n=STEANE_QUBITS):
    """All 2^g products of the generators, identity first."""
    generators = list(generators)
    for i, a in enumerate(generators):
        for b in generators[i + 1:]:
            if not a.commutes_with(b):
                raise ValidationError('stabilizer generators must commute', code='noncommuting')
    elements = []
    for mask in range(2 ** len(generators)):
        chosen = [g for bit, g in enumerate(generators) if mask >> bit & 1]
        elements.append(reduce(lambda a, b: a * b, chosen, PauliString.identity(n)))
    return elements


@dataclass(frozen=True, eq=False)
class StabilizerProjector:
    generators: tuple
    elements: tuple
    matrix: np.ndarray


def stabilizer_projector(generators, n=STEANE_QUBITS):
    """P = 2^-g sum_{S in <generators>} S."""
    elements = stabilizer_group(generators, n)
    matrix = sum(s.matrix() for s in elements) / len(elements)
    matrix.setflags(write=False)
    return StabilizerProjector(tuple(generators), tuple(elements), matrix)


def steane_generators(kind):
    return [PauliString.from_support(kind, support) for support in STEANE_SUPPORTS]


@dataclass(frozen=True, eq=False)
class SteaneProjectors:
    p_x: StabilizerProjector
    p_z: StabilizerProjector
    p_c: np.ndarray


@cache
def steane_projectors():
    p_x = stabilizer_projector(steane_generators('X'))
    p_z = stabilizer_projector(steane_generators('Z'))
    p_c = p_z.matrix @ p_x.matrix
    p_c.setflags(write=False)
    return SteaneProjectors(p_x, p_z, p_c)


@cache
def codespace_basis():
    """Orthonormal basis (128 x 2) of the Steane code space."""
    w, v = qcore.eigh(steane_projectors().p_c)
    basis = v[:, w > 0.5]
    if basis.shape[1] != 2:
        raise ValidationError('code space has dimension %(d)d', code='bad_code', params={'d': basis.shape[1]})
    basis.setflags(write=False)
    return basis


def random_codeword(rng):
    """Haar-random logical state embedded in the code space."""
    return codespace_basis() @ qcore.random_pure_state(2, rng)


@dataclass(frozen=True)
class NoiseModel:
    p_z: float
    r: float

    def __post_init__(self):
        if not 0 <= self.p_z <= 1 or self.r < 0 or not 0 <= self.p_x <= 1:
            raise ValidationError('noise probabilities p_Z = %(pz)g, p_X = %(px)g leave [0, 1]',
                                  code='bad_probability', params={'pz': self.p_z, 'px': self.r * self.p_z})

    @property
    def p_x(self):
        return self.r * self.p_z


def apply_biased_noise(rho, noise):
    """Independent Z flips (probability p_Z), then X flips (p_X = r p_Z), on every qubit."""
    rho = qcore.as_density(rho)
    n = int(round(math.log2(rho.shape[0])))
    if 2 ** n != rho.shape[0]:
        raise ValidationError('state is not a qubit register', code='dimension_mismatch')
    tensor = rho.reshape((2,) * (2 * n))
    signs = np.array([1.0, -1.0])
    for q in range(n):
        row_shape = [1] * (2 * n)
        row_shape[q] = 2
        col_shape = [1] * (2 * n)
        col_shape[n + q] = 2
        flipped = tensor * signs.reshape(row_shape) * signs.reshape(col_shape)
        tensor = (1 - noise.p_z) * tensor + noise.p_z * flipped
    for q in range(n):
        flipped = np.flip(np.flip(tensor, q), n + q)
        tensor = (1 - noise.p_x) * tensor + noise.p_x * flipped
    return tensor.reshape(rho.shape)


@dataclass(frozen=True)
class QedMetrics:
    P: float
    R: float

    @property
    def R_minus_P(self):
        return self.R - self.P


def qed_metrics(rho):
    """P = tr[P_C rho], R = tr[P_X rho]."""
    rho = qcore.as_density(rho)
    projectors = steane_projectors()
    return QedMetrics(P=float(np.trace(projectors.p_c @ rho).real),
                      R=float(np.trace(projectors.p_x.matrix @ rho).real))


def _stabilizer_decomposition(elements):
    return lcu.normalize([lcu.UnitaryTerm(1.0, s.matrix()) for s in elements])


def qed_round_channels():
    """A coherent round over the X stabilizers, then a virtual round over the Z stabilizers."""
    projectors = steane_projectors()
    coherent = _stabilizer_decomposition(projectors.p_x.elements)
    virtual = _stabilizer_decomposition(projectors.p_z.elements)
    return [hybrid.HybridChannel(coherent, partition.coarsest(coherent.m)),
            hybrid.HybridChannel(virtual, partition.singletons(virtual.m))]


def hybrid_qed_channel(virtual_generators=None, coherent_generators=None):
    """Single-round channel over the products S_Z S_X, grouped by the virtually sampled S_Z.

    Group k is S_Z^(k) P_X with weight 1/|<virtual>|; with no virtual generators
    the channel is the fully coherent P_X detection.
    """
    virtual = stabilizer_group(steane_generators('Z') if virtual_generators is None else virtual_generators)
    coherent = stabilizer_group(steane_generators('X') if coherent_generators is None else coherent_generators)
    terms = [lcu.UnitaryTerm(1.0, (s_z * s_x).matrix()) for s_z in virtual for s_x in coherent]
    dec = lcu.normalize(terms)
    size = len(coherent)
    groups = [list(range(k * size, (k + 1) * size)) for k in range(len(virtual))]
    return hybrid.HybridChannel(dec, partition.validate(groups, dec.m))


def detection_metrics(channel, rho):
    """P and R read off a detection channel through the hybrid estimator's moments."""
    identity = qcore.Observable.identity(channel.dim)
    return QedMetrics(P=hybrid.exact_expectation(channel, rho, identity),
                      R=hybrid.second_moment(channel, rho, identity))


def sweep_point(codewords, r, p_z):
    noise = NoiseModel(p_z, r)
    metrics = [qed_metrics(apply_biased_noise(np.outer(psi, np.conj(psi)), noise)) for psi in codewords]
    p = np.array([m.P for m in metrics])
    rr = np.array([m.R for m in metrics])
    return {
        'r': r, 'pZ': p_z, 'pX': noise.p_x, 'P': float(p.mean()), 'R': float(rr.mean()),
        'R_minus_P': float((rr - p).mean()), 'P_std': float(p.std()), 'R_std': float(rr.std()),
        'codewords': len(codewords),
    }


def pz_grid(pz_min=1e-3, pz_max=1e-1, points=10, include_zero=False):
    grid = [float(p) for p in np.geomspace(pz_min, pz_max, points)]
    return [0.0] + grid if include_zero else grid


def fig_sweep(r_values, pz_values, seed, codewords=32, workers=1):
    """Mean P, R and R - P over shared random codewords, for every (r, p_Z)."""
    if codewords < 1:
        raise ValidationError('need at least one codeword', code='bad_codewords')
    rng = utils.substream(seed, STREAM_CODEWORDS)
    states = [random_codeword(rng) for _ in range(codewords)]
    steane_projectors()  # build the cached projectors before the pool starts
    rows = utils.parallel_map(lambda item: sweep_point(states, *item),
                              [(r, p_z) for r in r_values for p_z in pz_values], workers)
    for row in rows:
        row['seed'] = seed
    return rows
