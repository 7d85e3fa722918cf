from simulator import lchs
from simulator.constants import LCHS_FIELDS
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey


class Command(ExperimentCommand):
    help = 'Bound on R - P and the overhead R/P^2 against the LCHS node count M'

    name = 'lchs'
    schema = {
        'lchs.l_norm': ConfigKey('float', '||L||'),
        'lchs.T': ConfigKey('float', 'evolution time'),
        'lchs.epsilon': ConfigKey('float', 'Cauchy tail mass beyond K1'),
        'lchs.c_m': ConfigKey('float', 'node-count constant'),
        'lchs.points': ConfigKey('int', 'number of K2 grid points'),
        'lchs.p_assumed': ConfigKey('float', 'success probability used for the overhead bound'),
    }

    def run(self, run):
        params = run.params
        rows = lchs.fig_sweep(
            l_norm=params['lchs.l_norm'], T=params['lchs.T'], epsilon=params['lchs.epsilon'],
            points=params['lchs.points'], p_assumed=params['lchs.p_assumed'], c_m=params['lchs.c_m'],
            workers=run.workers,
        )
        path = self.write(run, 'lchs.csv', LCHS_FIELDS, rows, c_m=params['lchs.c_m'])
        return [path] + self.plot(run, path, 'M', 'rp_bound', 'log', 'log')
