from simulator import gsp
from simulator.constants import GSP_FIELDS
from simulator.management.experiment import ExperimentCommand
from simulator.utils import ConfigKey


class Command(ExperimentCommand):
    help = 'Two-stage ground-state preparation on random gapped Hamiltonians'

    name = 'gsp'
    schema = {
        'gsp.dim': ConfigKey('int', 'Hamiltonian dimension'),
        'gsp.gap': ConfigKey('float', 'spectral gap Delta'),
        'gsp.p0': ConfigKey('float', 'initial ground-state overlap'),
        'gsp.epsilons': ConfigKey('floats', 'comma-separated target distances'),
        'gsp.instances': ConfigKey('int', 'random Hamiltonians per epsilon'),
        'gsp.energy_error': ConfigKey('float', 'error injected into the coarse energy E'),
        'gsp.refined_energy_error': ConfigKey('float', 'error injected into the refined energy E\''),
        'gsp.c_t': ConfigKey('float', 'cosine order constant'),
        'gsp.c_tau': ConfigKey('float', 'cosine shift constant'),
        'gsp.c_sigma': ConfigKey('float', 'Gaussian width constant'),
        'gsp.c_tau_refined': ConfigKey('float', 'Gaussian shift constant'),
    }

    def run(self, run):
        params = run.params
        constants = {name: params['gsp.' + name] for name in (
            'energy_error', 'refined_energy_error', 'c_t', 'c_tau', 'c_sigma', 'c_tau_refined')}
        reports = gsp.sweep(params['gsp.dim'], params['gsp.gap'], params['gsp.p0'], params['gsp.epsilons'],
                            params['gsp.instances'], run.seed, constants, run.workers)
        path = self.write(run, 'gsp.csv', GSP_FIELDS, [r.row() for r in reports])
        return [path] + self.plot(run, path, 'eps', 'final_dist', 'log', 'log')
