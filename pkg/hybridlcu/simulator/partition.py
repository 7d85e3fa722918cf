"""Set partitions of the unitary indices, group operators and reduction factors.

Indices are 0-based in code and 1-based in the text form (``1,2|3|4,5``).
Reduction factors are computed from explicitly assembled group operators and
serve as the ground truth for the shot sampler.
"""
import logging
import math
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool

import numpy as np
from django.core.exceptions import ValidationError

from . import lcu, qcore
from .constants import MAX_ENUMERATION_M

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    groups: tuple
    m: int

    @property
    def G(self):
        return len(self.groups)

    @property
    def sizes(self):
        return [len(g) for g in self.groups]

    def __str__(self):
        return format_partition(self)


@dataclass(frozen=True, eq=False)
class GroupOperator:
    weight: float
    operator: np.ndarray
    members: tuple


def validate(groups, m):
    """Canonical Partition of range(m), or a ValidationError naming the defect."""
    groups = [tuple(int(i) for i in g) for g in groups]
    if any(len(g) == 0 for g in groups):
        raise ValidationError('partition has an empty group', code='empty_group')
    seen = set()
    for g in groups:
        for i in g:
            if i < 0 or i >= m:
                raise ValidationError(
                    'index %(i)d outside the index set of size %(m)d',
                    code='out_of_range', params={'i': i + 1, 'm': m},
                )
            if i in seen:
                raise ValidationError('index %(i)d appears in two groups', code='overlap', params={'i': i + 1})
            seen.add(i)
    missing = sorted(set(range(m)) - seen)
    if missing:
        raise ValidationError(
            'indices %(missing)s are not covered by any group',
            code='gap', params={'missing': [i + 1 for i in missing]},
        )
    canonical = sorted((tuple(sorted(g)) for g in groups), key=lambda g: g[0])
    return Partition(groups=tuple(canonical), m=m)


def parse_partition(text, m=None):
    groups = [[int(i) - 1 for i in chunk.split(',') if i.strip()] for chunk in text.strip().split('|')]
    if m is None:
        m = max((max(g) for g in groups if g), default=-1) + 1
    return validate(groups, m)


def format_partition(partition):
    return '|'.join(','.join(str(i + 1) for i in g) for g in partition.groups)


def singletons(m):
    return validate([[i] for i in range(m)], m)


def coarsest(m):
    return validate([list(range(m))], m)


def ancilla_width(partition):
    """a* = max_k ceil(log2 |S_k|)."""
    return max(math.ceil(math.log2(len(g))) for g in partition.groups)


def _check_same_m(dec, partition):
    if dec.m != partition.m:
        raise ValidationError(
            'partition covers %(pm)d indices but decomposition has %(dm)d terms',
            code='dimension_mismatch', params={'pm': partition.m, 'dm': dec.m},
        )


def group_operator(dec, members):
    members = tuple(members)
    probs = dec.probs[list(members)]
    weight = float(probs.sum())
    unitaries = np.array([dec.terms[i].unitary for i in members])
    operator = np.tensordot(probs / weight, unitaries, axes=1)
    return GroupOperator(weight=weight, operator=operator, members=members)


def group_operators(dec, partition):
    _check_same_m(dec, partition)
    return [group_operator(dec, g) for g in partition.groups]


def _weighted_second_moment(groups, rho, o2=None):
    total = 0.0
    for g in groups:
        k = g.operator
        kk = qcore.dagger(k) @ (k if o2 is None else o2 @ k)
        total += g.weight * np.trace(kk @ rho).real
    return float(total)


def reduction_factor(dec, partition, rho):
    """R = sum_k q_k tr[K_k^dagger K_k rho]."""
    return _weighted_second_moment(group_operators(dec, partition), qcore.as_density(rho))


def reduction_factor_obs(dec, partition, rho, o):
    """R^O = sum_k q_k tr[O^2 K_k rho K_k^dagger]."""
    o = qcore.as_observable(o)
    return _weighted_second_moment(group_operators(dec, partition), qcore.as_density(rho), o.squared())


def is_refinement(fine, coarse):
    if fine.m != coarse.m:
        return False
    owner = {}
    for idx, g in enumerate(coarse.groups):
        for i in g:
            owner[i] = idx
    return all(len({owner[i] for i in g}) == 1 for g in fine.groups)


def split(partition, group_index, subset_a):
    """Partition with group ``group_index`` split into ``subset_a`` and its complement."""
    if not 0 <= group_index < partition.G:
        raise ValidationError('group index %(k)d out of range', code='invalid_subset', params={'k': group_index})
    group = set(partition.groups[group_index])
    subset_a = set(int(i) for i in subset_a)
    if not subset_a or not subset_a < group:
        raise ValidationError(
            'subset %(a)s is not a proper nonempty subset of group %(g)s',
            code='invalid_subset',
            params={'a': sorted(i + 1 for i in subset_a), 'g': sorted(i + 1 for i in group)},
        )
    groups = [g for idx, g in enumerate(partition.groups) if idx != group_index]
    groups += [sorted(subset_a), sorted(group - subset_a)]
    return validate(groups, partition.m)


def split_delta(dec, partition, group_index, subset_a, rho, o):
    """R^O(split) - R^O(unsplit) in closed form:

        (q_A q_B / (q_A + q_B)) tr[(O K_A - O K_B)^dagger (O K_A - O K_B) rho]
    """
    split(partition, group_index, subset_a)
    o = qcore.as_observable(o)
    rho = qcore.as_density(rho)
    subset_b = sorted(set(partition.groups[group_index]) - set(subset_a))
    a = group_operator(dec, sorted(subset_a))
    b = group_operator(dec, subset_b)
    d = o.matrix @ (a.operator - b.operator)
    value = a.weight * b.weight / (a.weight + b.weight) * np.trace(qcore.dagger(d) @ d @ rho).real
    return float(value)


def harmonic_mean(a, b):
    if a + b == 0:
        return 0.0
    return 2 * a * b / (a + b)


def fragment_bound(weights, group_index, o):
    """||O^2|| q_G, the bound on the R^O increase from fully fragmenting group G."""
    o = qcore.as_observable(o)
    return float(o.norm ** 2 * weights[group_index])


def tail_bound_R(q_a, q_b, p):
    """Upper bound on R for {S_A} plus singletons over S_B."""
    return p + q_b + 2 * harmonic_mean(q_a, q_b)


def enumerate_partitions(m):
    """All set partitions of range(m) via restricted growth strings, canonical order."""
    if m < 1 or m > MAX_ENUMERATION_M:
        raise ValidationError(
            'partition enumeration needs 1 <= m <= %(cap)d, got %(m)d',
            code='enumeration_cap', params={'m': m, 'cap': MAX_ENUMERATION_M},
        )
    result = []

    def extend(labels, blocks):
        if len(labels) == m:
            groups = [[] for _ in range(blocks)]
            for i, label in enumerate(labels):
                groups[label].append(i)
            result.append(Partition(groups=tuple(tuple(g) for g in groups), m=m))
            return
        for label in range(blocks + 1):
            extend(labels + [label], max(blocks, label + 1))

    extend([0], 1)
    return result


def bell_number(m):
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(m - 1):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[-1]


@dataclass(frozen=True)
class PartitionScore:
    partition: Partition
    ancilla_width: int
    R: float
    R_minus_P: float

    def row(self):
        return {'partition': str(self.partition), 'groups': self.partition.G,
                'ancilla_width': self.ancilla_width, 'R': self.R, 'R_minus_P': self.R_minus_P}


def scan_partitions(dec, rho, workers=1, partitions=None):
    """R and R - P for every partition, in enumeration order."""
    rho = qcore.as_density(rho)
    p = lcu.success_probability(dec, rho)
    partitions = enumerate_partitions(dec.m) if partitions is None else partitions

    def score(partition):
        r = reduction_factor(dec, partition, rho)
        return PartitionScore(partition, ancilla_width(partition), r, r - p)

    if workers <= 1:
        return [score(part) for part in partitions]
    with ThreadPool(workers) as pool:
        return pool.map(score, partitions)
