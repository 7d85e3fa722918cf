from simulator import qlss
from simulator.constants import QLSS_FIELDS
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey


class Command(ExperimentCommand):
    help = 'Reduction factor of the y-virtual QLSS partition across condition numbers'

    name = 'qlss'
    schema = {
        'qlss.kappas': ConfigKey('floats', 'comma-separated condition numbers'),
        'qlss.epsilon': ConfigKey('float', 'target accuracy'),
        'qlss.dim': ConfigKey('int', 'dimension of M'),
        'qlss.align': ConfigKey('bool', 'put b on the 1/kappa eigenvector'),
        'qlss.c_j': ConfigKey('float', 'y-grid count constant'),
        'qlss.c_k': ConfigKey('float', 'z-grid count constant'),
        'qlss.c_y': ConfigKey('float', 'y-spacing constant'),
        'qlss.c_z': ConfigKey('float', 'z-spacing constant'),
    }

    def run(self, run):
        params = run.params
        constants = {name: params['qlss.' + name] for name in ('c_j', 'c_k', 'c_y', 'c_z')}
        factors = qlss.sweep(params['qlss.kappas'], params['qlss.epsilon'], params['qlss.dim'], run.seed,
                             constants, params['qlss.align'], run.workers)
        for f in factors:
            self.stdout.write('kappa=%g R_int=%.6g closed-form=%.6g P=%.6g' % (
                f.kappa, f.R_int, f.R_int_closed_form, f.P))
        path = self.write(run, 'qlss.csv', QLSS_FIELDS, [f.row() for f in factors])
        return [path] + self.plot(run, path, 'kappa', 'R_int', 'log', 'log')
