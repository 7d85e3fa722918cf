from simulator import qed
from simulator.constants import QED_FIELDS
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey


class Command(ExperimentCommand):
    help = 'Steane-code hybrid error detection under biased Pauli noise'

    name = 'qed'
    schema = {
        'qed.r_values': ConfigKey('floats', 'comma-separated bias ratios p_X / p_Z'),
        'qed.pz_min': ConfigKey('float', 'smallest p_Z'),
        'qed.pz_max': ConfigKey('float', 'largest p_Z'),
        'qed.pz_points': ConfigKey('int', 'geometric p_Z grid size'),
        'qed.include_zero': ConfigKey('bool', 'prepend p_Z = 0'),
        'qed.codewords': ConfigKey('int', 'random codewords averaged per point'),
    }

    def run(self, run):
        params = run.params
        pz_values = qed.pz_grid(params['qed.pz_min'], params['qed.pz_max'], params['qed.pz_points'],
                                params['qed.include_zero'])
        rows = qed.fig_sweep(params['qed.r_values'], pz_values, run.seed, params['qed.codewords'], run.workers)
        path = self.write(run, 'qed.csv', QED_FIELDS, rows)
        return [path] + self.plot(run, path, 'pZ', 'R_minus_P', 'log', 'log')
