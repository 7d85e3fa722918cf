import logging
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from .. import utils
from ..exceptions import NumericalInvariantError

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
INVARIANT_ERROR = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    shots: int
    out: Path
    workers: int
    params: dict
    emit_plot_script: bool = False

    def metadata(self, **extra):
        """Trailing CSV metadata; the worker count is left out so outputs match across pools."""
        return {'seed': self.seed, 'version': settings.HYBRIDLCU_VERSION, 'command': self.command, **extra}

    def path(self, name):
        return self.out / name


class ExperimentCommand(BaseCommand):
    """Shared flags, config loading and exit codes for the experiment drivers."""

    name = None
    schema = {}

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None, help='key = value file overlaid on the golden config')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--shots', type=int, default=None)
        parser.add_argument('--out', default=None, help='output directory')
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--emit-plot-script', action='store_true')

    def build_run(self, options):
        params = utils.load_run_config(self.schema, Path(settings.GOLDEN_CONFIG_DIR) / ('%s.conf' % self.name),
                                       options.get('config'))
        seed = settings.DEFAULT_SEED if options.get('seed') is None else options['seed']
        if not 0 <= seed < 2 ** 64:
            raise ValidationError('seed must fit in 64 unsigned bits', code='bad_seed')
        shots = settings.DEFAULT_SHOTS if options.get('shots') is None else options['shots']
        if shots < 1:
            raise ValidationError('shot count must be positive', code='bad_shots')
        workers = settings.DEFAULT_WORKERS if options.get('workers') is None else options['workers']
        if workers < 1:
            raise ValidationError('worker count must be positive', code='bad_workers')
        out = Path(options.get('out') or settings.OUTPUT_DIR)
        out.mkdir(parents=True, exist_ok=True)
        return RunConfig(self.name, seed, shots, out, workers, params, bool(options.get('emit_plot_script')))

    def handle(self, *args, **options):
        try:
            run = self.build_run(options)
            logger.info('%s: seed=%d workers=%d out=%s', self.name, run.seed, run.workers, run.out)
            written = self.run(run)
        except ValidationError as exc:
            raise CommandError('invalid input: %s' % '; '.join(exc.messages), returncode=USAGE_ERROR)
        except NumericalInvariantError as exc:
            raise CommandError('numerical invariant violated: %s' % exc, returncode=INVARIANT_ERROR)
        for path in written:
            self.stdout.write('wrote %s' % path)
        self.stdout.write(self.style.SUCCESS('%s finished (seed %d)' % (self.name, run.seed)))

    def run(self, run):
        """Execute the experiment and return the written paths."""
        raise NotImplementedError

    def plot(self, run, csv_path, x, y, xscale='linear', yscale='linear'):
        if not run.emit_plot_script:
            return []
        return [utils.write_plot_script(run.out, self.name, csv_path.name, x, y, xscale, yscale)]

    def write(self, run, name, fields, rows, **extra):
        return utils.write_csv(run.path(name), fields, rows, run.metadata(**extra))
