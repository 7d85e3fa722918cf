from django.core.exceptions import ValidationError

from simulator import lcu, partition, qcore, utils
from simulator.constants import MAX_TABLE_M, PARTITION_FIELDS, STREAM_INSTANCE
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey


class Command(ExperimentCommand):
    help = 'R and R - P for every set partition of a random LCU instance'

    name = 'partitions'
    schema = {
        'partitions.m': ConfigKey('int', 'number of unitaries'),
        'partitions.dim': ConfigKey('int', 'system dimension'),
        'partitions.state_rank': ConfigKey('int', 'rank of the random input state'),
    }

    def run(self, run):
        m, dim = run.params['partitions.m'], run.params['partitions.dim']
        if not 1 <= m <= MAX_TABLE_M:
            raise ValidationError('partition table needs 1 <= m <= %(cap)d, got %(m)d', code='bad_m',
                                  params={'m': m, 'cap': MAX_TABLE_M})
        if dim < 1:
            raise ValidationError('dimension must be positive', code='bad_dim')

        rng = utils.substream(run.seed, STREAM_INSTANCE)
        dec = lcu.random_decomposition(m, dim, rng)
        rho = qcore.random_density_matrix(dim, rng, min(run.params['partitions.state_rank'], dim))
        scores = partition.scan_partitions(dec, rho, run.workers)
        self.stdout.write('%d partitions (Bell number %d), P = %.12g' % (
            len(scores), partition.bell_number(m), lcu.success_probability(dec, rho)))

        path = self.write(run, 'partitions.csv', PARTITION_FIELDS, [s.row() for s in scores])
        return [path] + self.plot(run, path, 'groups', 'R_minus_P')
