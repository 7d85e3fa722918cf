import math

import numpy as np
from django.core.exceptions import ValidationError

from simulator import estimate, hybrid, lcu, partition, qcore, utils
from simulator.constants import (
    MAX_DEMO_DIM, MAX_DEMO_M, PARTITION_FIELDS, STREAM_INSTANCE, STREAM_SHOTS_ONE, STREAM_SHOTS_OBS, TOLERANCES,
)
from simulator.exceptions import NumericalInvariantError
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey

# Monte-Carlo mean must land within this many standard errors of the exact value
MC_SLACK = 5


def demo_observable(kind, dim, rng):
    if kind == 'random':
        return qcore.Observable(qcore.random_hermitian(dim, rng))
    if kind == 'sign':
        return qcore.Observable(np.diag([(-1.0) ** i for i in range(dim)]))
    raise ValidationError('unknown observable kind %(k)r', code='bad_observable', params={'k': kind})


def choose_partition(text, scores, m):
    """``auto`` picks the smallest R among partitions with at most one ancilla qubit."""
    if text != 'auto':
        return partition.parse_partition(text, m)
    cheap = [s for s in scores if s.ancilla_width <= 1] or scores
    return min(cheap, key=lambda s: s.R).partition


class Command(ExperimentCommand):
    help = 'Random LCU instance: partition scan, three-way cross-check of the hybrid estimator, estimation reports'

    name = 'demo'
    schema = {
        'demo.m': ConfigKey('int', 'number of unitaries'),
        'demo.dim': ConfigKey('int', 'system dimension'),
        'demo.state_rank': ConfigKey('int', 'rank of the random input state'),
        'demo.observable': ConfigKey('str', 'random | sign'),
        'demo.partition': ConfigKey('str', 'partition text such as 1,2|3, or auto'),
        'demo.delta': ConfigKey('float', 'failure probability of the reported intervals'),
    }

    def run(self, run):
        params = run.params
        m, dim = params['demo.m'], params['demo.dim']
        if not 1 <= m <= MAX_DEMO_M:
            raise ValidationError('demo needs 1 <= m <= %(cap)d, got %(m)d', code='bad_m',
                                  params={'m': m, 'cap': MAX_DEMO_M})
        if not 1 <= dim <= MAX_DEMO_DIM:
            raise ValidationError('demo needs 1 <= dim <= %(cap)d, got %(d)d', code='bad_dim',
                                  params={'d': dim, 'cap': MAX_DEMO_DIM})

        rng = utils.substream(run.seed, STREAM_INSTANCE)
        dec = lcu.random_decomposition(m, dim, rng)
        rho = qcore.random_density_matrix(dim, rng, min(params['demo.state_rank'], dim))
        o = demo_observable(params['demo.observable'], dim, rng)

        scores = partition.scan_partitions(dec, rho, run.workers)
        written = [self.write(run, 'demo_partitions.csv', PARTITION_FIELDS, [s.row() for s in scores])]

        chosen = choose_partition(params['demo.partition'], scores, m)
        channel = hybrid.HybridChannel(dec, chosen, backend='circuit')
        analytic = hybrid.exact_expectation(channel, rho, o, backend='analytic')
        circuit = hybrid.exact_expectation(channel, rho, o)
        exhaustive = hybrid.exhaustive_expectation(channel, rho, o)
        deviation = max(abs(analytic - circuit), abs(analytic - exhaustive))
        if deviation > TOLERANCES.backend_agreement:
            raise NumericalInvariantError(
                'backends disagree on partition %s' % chosen, quantity='expectation',
                deviation=deviation, tolerance=TOLERANCES.backend_agreement,
            )

        shots = hybrid.run_shots(channel, rho, o, run.shots, run.seed, run.workers, STREAM_SHOTS_OBS)
        identity_shots = hybrid.run_shots(channel, rho, qcore.Observable.identity(dim), run.shots, run.seed,
                                          run.workers, STREAM_SHOTS_ONE)
        mean = float(shots.g.mean())
        stderr = math.sqrt(estimate.sample_variance(shots.g) / len(shots))
        if abs(mean - analytic) > MC_SLACK * stderr + TOLERANCES.backend_agreement:
            raise NumericalInvariantError(
                'Monte-Carlo mean %.6g deviates from %.6g (standard error %.3g)' % (mean, analytic, stderr),
                quantity='shot_mean', deviation=abs(mean - analytic), tolerance=MC_SLACK * stderr,
            )
        written.append(hybrid.write_shot_log(run.path('demo_shots.csv'), shots,
                                             run.metadata(partition=str(chosen))))

        delta = params['demo.delta']
        batch = estimate.SampleBatch(shots.g, identity_shots.g, seed=run.seed, bound_c=o.norm)
        reports = [
            estimate.estimate_numerator(batch, dec.one_norm, delta, bound_c=o.norm),
            estimate.estimate_numerator(batch, dec.one_norm, delta, method='asymptotic'),
            estimate.estimate_ratio(batch, delta),
        ]
        written.append(estimate.write_reports(run.path('demo_reports.csv'), reports, run.metadata()))

        self.stdout.write(
            'cross-check pass: partition=%s analytic=%.12g circuit=%.12g exhaustive=%.12g '
            'monte-carlo=%.6g +- %.2g (%d shots)' % (chosen, analytic, circuit, exhaustive, mean, stderr, len(shots))
        )
        return written + self.plot(run, written[0], 'groups', 'R')
