"""Dense complex linear algebra over small Hilbert spaces.

Every other module goes through these helpers for spectral decompositions,
Kronecker products and partial traces. Matrix functions are always computed
from the spectral decomposition.
"""
import logging
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from django.core.exceptions import ValidationError
from scipy.stats import unitary_group

from .constants import FLOAT_DIGITS, MAX_MIXED_DIM, MAX_PURE_DIM, TOLERANCES

logger = logging.getLogger(__name__)


def as_matrix(a, name='matrix'):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(
            '%(name)s must be two-dimensional, got shape %(shape)s',
            code='not_matrix', params={'name': name, 'shape': m.shape},
        )
    if not np.all(np.isfinite(m)):
        raise ValidationError('%(name)s has non-finite entries', code='non_finite', params={'name': name})
    return m


def as_square(a, name='matrix'):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(
            '%(name)s must be square, got shape %(shape)s',
            code='not_square', params={'name': name, 'shape': m.shape},
        )
    return m


def dagger(m):
    return np.conj(m).T


def hermiticity_violation(h):
    return float(np.linalg.norm(h - dagger(h)))


def check_hermitian(h, name='matrix', tol=None):
    h = as_square(h, name)
    tol = TOLERANCES.hermiticity if tol is None else tol
    violation = hermiticity_violation(h)
    if violation > tol:
        raise ValidationError(
            '%(name)s is not Hermitian: symmetry violation %(violation).3e exceeds %(tol).1e',
            code='not_hermitian', params={'name': name, 'violation': violation, 'tol': tol},
        )
    return h


def eigh(h):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    The input is symmetrised before decomposition so the returned basis is
    exactly unitary even when ``h`` carries round-off asymmetry.
    """
    h = check_hermitian(h)
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    return w, v


def matrix_function(h, f):
    w, v = eigh(h)
    return (v * f(w)) @ dagger(v)


def expm_i_hermitian(h, t):
    """e^{-iHt} for Hermitian H."""
    return matrix_function(h, lambda w: np.exp(-1j * w * t))


def is_unitary(m, tol=None):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    tol = TOLERANCES.unitarity if tol is None else tol
    return bool(np.linalg.norm(dagger(m) @ m - np.eye(m.shape[0])) <= tol)


def kron(*ops):
    return reduce(np.kron, ops)


def trace(m):
    return complex(np.trace(m))


def partial_trace(m, dims, which):
    """Trace out the subsystems listed in ``which`` (indices into ``dims``)."""
    dims = [int(d) for d in dims]
    m = as_square(m)
    total = int(np.prod(dims))
    if m.shape[0] != total:
        raise ValidationError(
            'subsystem dimensions %(dims)s do not match matrix size %(size)d',
            code='dimension_mismatch', params={'dims': dims, 'size': m.shape[0]},
        )
    if isinstance(which, (int, np.integer)):
        which = (which,)
    traced = sorted({int(w) for w in which}, reverse=True)
    if any(w < 0 or w >= len(dims) for w in traced):
        raise ValidationError('subsystem index out of range', code='bad_subsystem')

    tensor = m.reshape(dims + dims)
    n = len(dims)
    for w in traced:
        tensor = np.trace(tensor, axis1=w, axis2=w + n)
        n -= 1
    kept = [d for i, d in enumerate(dims) if i not in traced]
    size = int(np.prod(kept)) if kept else 1
    return tensor.reshape(size, size)


def operator_norm(m):
    return float(np.linalg.norm(m, 2))


def projector_zero(width):
    """|0...0><0...0| on ``width`` qubits."""
    p = np.zeros((2 ** width, 2 ** width), dtype=complex)
    p[0, 0] = 1.0
    return p


@dataclass(frozen=True, eq=False)
class PureState:
    vector: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if v.size > MAX_PURE_DIM:
            raise ValidationError(
                'pure state dimension %(dim)d exceeds cap %(cap)d',
                code='dimension_cap', params={'dim': v.size, 'cap': MAX_PURE_DIM},
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError('state has non-finite amplitudes', code='non_finite')
        if self.normalized and abs(np.vdot(v, v).real - 1.0) > TOLERANCES.normalization:
            raise ValidationError(
                'state norm %(norm).15f is not 1', code='not_normalized',
                params={'norm': np.vdot(v, v).real},
            )
        object.__setattr__(self, 'vector', v)

    @property
    def dim(self):
        return self.vector.size

    def density(self):
        return np.outer(self.vector, np.conj(self.vector))


@dataclass(frozen=True, eq=False)
class MixedState:
    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        rho = check_hermitian(self.matrix, 'density matrix')
        if rho.shape[0] > MAX_MIXED_DIM:
            raise ValidationError(
                'density matrix dimension %(dim)d exceeds cap %(cap)d',
                code='dimension_cap', params={'dim': rho.shape[0], 'cap': MAX_MIXED_DIM},
            )
        if self.normalized and abs(np.trace(rho).real - 1.0) > TOLERANCES.hermiticity:
            raise ValidationError(
                'density matrix trace %(trace).12f is not 1', code='not_normalized',
                params={'trace': np.trace(rho).real},
            )
        lowest = np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0]
        if lowest < -TOLERANCES.psd:
            raise ValidationError(
                'density matrix has negative eigenvalue %(value).3e',
                code='not_psd', params={'value': lowest},
            )
        object.__setattr__(self, 'matrix', rho)

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False)
    norm: float = field(init=False)

    def __post_init__(self):
        o = check_hermitian(self.matrix, 'observable')
        w, v = eigh(o)
        residual = np.linalg.norm((v * w) @ dagger(v) - o)
        if residual > TOLERANCES.reconstruction:
            raise ValidationError(
                'observable spectrum reconstructs with residual %(residual).3e',
                code='bad_spectrum', params={'residual': residual},
            )
        object.__setattr__(self, 'matrix', o)
        object.__setattr__(self, 'eigenvalues', w)
        object.__setattr__(self, 'eigenvectors', v)
        object.__setattr__(self, 'norm', float(np.max(np.abs(w))))

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def squared(self):
        return self.matrix @ self.matrix


def as_density(state):
    """Density matrix from a PureState, MixedState, state vector or matrix.

    Raw arrays are validated as the matching state class, caps included.
    """
    if isinstance(state, MixedState):
        return state.matrix
    if isinstance(state, PureState):
        return state.density()
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        return PureState(a).density()
    return MixedState(a).matrix


def as_observable(o):
    return o if isinstance(o, Observable) else Observable(o)


# seeded instances

def haar_unitary(dim, rng):
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_hermitian(dim, rng, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + dagger(g)) / 2
    return scale * h / operator_norm(h)


def random_pure_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


# text format: "dim <rows> <cols>" then one "re im" line per entry, row-major

def dump_matrix(m):
    m = as_matrix(m)
    lines = ['dim %d %d' % m.shape]
    for z in m.reshape(-1):
        lines.append('%s %s' % (format(z.real, '.%dg' % FLOAT_DIGITS), format(z.imag, '.%dg' % FLOAT_DIGITS)))
    return '\n'.join(lines) + '\n'


def read_matrix(lines):
    """Parse one matrix block from an iterator of lines."""
    header = next(lines).split()
    if len(header) != 3 or header[0] != 'dim':
        raise ValidationError('expected "dim <rows> <cols>", got %(line)r', code='bad_format',
                              params={'line': ' '.join(header)})
    rows, cols = int(header[1]), int(header[2])
    entries = np.empty(rows * cols, dtype=complex)
    for i in range(rows * cols):
        re, im = next(lines).split()
        entries[i] = complex(float(re), float(im))
    return as_matrix(entries.reshape(rows, cols))


def load_matrix(text):
    lines = iter(line for line in text.splitlines() if line.strip())
    return read_matrix(lines)
