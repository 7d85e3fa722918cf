"""LCU decompositions K = sum_i c_i U_i and the coherent-LCU CP map."""
import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from . import qcore
from .constants import TOLERANCES

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnitaryTerm:
    coefficient: float
    unitary: np.ndarray

    def __post_init__(self):
        c = float(self.coefficient)
        if not np.isfinite(c) or c < 0:
            raise ValidationError(
                'coefficient %(c)r must be a nonnegative real; use UnitaryTerm.from_complex',
                code='negative_coefficient', params={'c': self.coefficient},
            )
        u = qcore.as_square(self.unitary, 'unitary')
        if not qcore.is_unitary(u):
            raise ValidationError('term matrix is not unitary', code='not_unitary')
        object.__setattr__(self, 'coefficient', c)
        object.__setattr__(self, 'unitary', u)

    @classmethod
    def from_complex(cls, coefficient, unitary):
        """Fold the phase of a complex coefficient into the unitary."""
        c = complex(coefficient)
        phase = c / abs(c) if abs(c) > 0 else 1.0
        return cls(abs(c), phase * np.asarray(unitary, dtype=complex))

    @property
    def dim(self):
        return self.unitary.shape[0]


@dataclass(frozen=True, eq=False)
class LcuDecomposition:
    terms: tuple
    one_norm: float
    probs: np.ndarray

    @property
    def m(self):
        return len(self.terms)

    @property
    def dim(self):
        return self.terms[0].dim

    @property
    def unitaries(self):
        return [t.unitary for t in self.terms]

    @property
    def coefficients(self):
        return np.array([t.coefficient for t in self.terms])


def normalize(terms):
    """Build an LcuDecomposition, dropping zero-coefficient terms.

    Accepts UnitaryTerm objects or ``(coefficient, unitary)`` pairs; complex
    coefficients are folded into their unitaries.
    """
    terms = [t if isinstance(t, UnitaryTerm) else UnitaryTerm.from_complex(*t) for t in terms]
    kept = [t for t in terms if t.coefficient > 0]
    if len(kept) < len(terms):
        logger.warning('dropped %d zero-coefficient term(s) from decomposition', len(terms) - len(kept))
    if not kept:
        raise ValidationError('all coefficients are zero', code='degenerate_decomposition')

    dims = {t.dim for t in kept}
    if len(dims) != 1:
        raise ValidationError(
            'terms have mismatched dimensions %(dims)s',
            code='dimension_mismatch', params={'dims': sorted(dims)},
        )

    coefficients = np.array([t.coefficient for t in kept])
    one_norm = float(coefficients.sum())
    probs = coefficients / one_norm
    return LcuDecomposition(terms=tuple(kept), one_norm=one_norm, probs=probs)


def assemble_klcu(dec):
    """K_LCU = sum_i p_i U_i."""
    return np.tensordot(dec.probs, np.array(dec.unitaries), axes=1)


def apply_cp_map(dec, state):
    rho = qcore.as_density(state)
    k = assemble_klcu(dec)
    return k @ rho @ qcore.dagger(k)


def success_probability(dec, state):
    p = np.trace(apply_cp_map(dec, state)).real
    return float(min(max(p, 0.0), 1.0))


def expectation_unnormalized(dec, state, o):
    """||c||_1^2 tr[O Lambda(rho)] = tr[O K rho K^dagger]."""
    o = qcore.as_observable(o)
    rho = qcore.as_density(state)
    if o.dim != dec.dim or rho.shape[0] != dec.dim:
        raise ValidationError(
            'observable (%(o)d), state (%(s)d) and decomposition (%(d)d) dimensions differ',
            code='dimension_mismatch', params={'o': o.dim, 's': rho.shape[0], 'd': dec.dim},
        )
    value = dec.one_norm ** 2 * np.trace(o.matrix @ apply_cp_map(dec, rho))
    if abs(value.imag) > TOLERANCES.hermiticity * max(1.0, abs(value.real)):
        logger.warning('expectation has imaginary residue %.3e', value.imag)
    return float(value.real)


def random_decomposition(m, dim, rng):
    """Haar-random unitaries with uniform random positive weights."""
    coefficients = rng.uniform(0.1, 1.0, size=m)
    return normalize([UnitaryTerm(c, qcore.haar_unitary(dim, rng)) for c in coefficients])


# instance file: "m <count> dim <d>", then per term a coefficient line and a matrix block

def dump_decomposition(dec):
    parts = ['m %d dim %d\n' % (dec.m, dec.dim)]
    for term in dec.terms:
        parts.append(format(term.coefficient, '.17g') + '\n')
        parts.append(qcore.dump_matrix(term.unitary))
    return ''.join(parts)


def load_decomposition(text):
    lines = iter(line for line in text.splitlines() if line.strip())
    header = next(lines).split()
    if len(header) != 4 or header[0] != 'm' or header[2] != 'dim':
        raise ValidationError('expected "m <count> dim <d>" header', code='bad_format')
    count, dim = int(header[1]), int(header[3])
    terms = []
    for _ in range(count):
        coefficient = float(next(lines))
        unitary = qcore.read_matrix(lines)
        if unitary.shape != (dim, dim):
            raise ValidationError('term matrix does not match declared dimension', code='dimension_mismatch')
        terms.append(UnitaryTerm(coefficient, unitary))
    return normalize(terms)
