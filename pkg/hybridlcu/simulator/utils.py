import csv
import logging
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from dotenv import dotenv_values

from .constants import FLOAT_DIGITS

logger = logging.getLogger(__name__)


# seeded substreams

def substream(seed, *key):
    """Counter-based generator for the stream identified by ``key`` under ``seed``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def parallel_map(func, items, workers=1):
    """Ordered map, optionally over a thread pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPool(min(workers, len(items))) as pool:
        return pool.map(func, items)


# CSV output

def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.%dg' % FLOAT_DIGITS)
    return str(value)


def write_csv(path, fields, rows, metadata):
    """Header, one line per row, then ``# key=value ...`` metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(fields)
        for row in rows:
            if isinstance(row, dict):
                row = [row[f] for f in fields]
            writer.writerow([format_value(v) for v in row])
        handle.write('# ' + ' '.join('%s=%s' % (k, v) for k, v in metadata.items()) + '\n')
    logger.info('wrote %s', path)
    return path


PLOT_SCRIPT = '''"""Plot stub for {csv_name}. Edit the column names to taste."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
with open(path) as handle:
    rows = [row for row in csv.DictReader(line for line in handle if not line.startswith("#"))]

x_column, y_column = "{x}", "{y}"
xs = [float(row[x_column]) for row in rows]
ys = [float(row[y_column]) for row in rows]
plt.plot(xs, ys, marker="o")
plt.xlabel(x_column)
plt.ylabel(y_column)
plt.xscale("{xscale}")
plt.yscale("{yscale}")
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def write_plot_script(directory, command, csv_name, x, y, xscale='linear', yscale='linear'):
    path = Path(directory) / ('plot_%s.py' % command)
    path.write_text(PLOT_SCRIPT.format(csv_name=csv_name, x=x, y=y, xscale=xscale, yscale=yscale))
    return path


# run configs: "key = value" lines with dotted sections

@dataclass(frozen=True)
class ConfigKey:
    kind: str
    help: str = ''

    def parse(self, name, raw):
        try:
            if self.kind == 'int':
                return int(raw)
            if self.kind == 'float':
                return float(raw)
            if self.kind == 'floats':
                return [float(v) for v in raw.split(',') if v.strip()]
            if self.kind == 'ints':
                return [int(v) for v in raw.split(',') if v.strip()]
            if self.kind == 'bool':
                return raw.strip().lower() in ('1', 'true', 'yes', 'on')
            return raw.strip()
        except ValueError:
            raise ValidationError(
                'config key %(key)s expects %(kind)s, got %(raw)r',
                code='bad_value', params={'key': name, 'kind': self.kind, 'raw': raw},
            )


def read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ValidationError('config file %(path)s does not exist', code='missing_file', params={'path': str(path)})
    return dotenv_values(path)


def load_run_config(schema, golden_path, override_path=None):
    """Golden config overlaid with an optional user config, typed by ``schema``.

    Keys outside the schema are rejected, as are schema keys left without a value.
    """
    raw = dict(read_config_file(golden_path))
    if override_path is not None:
        raw.update(read_config_file(override_path))

    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(
            'unknown config key(s): %(keys)s', code='unknown_key', params={'keys': ', '.join(unknown)},
        )
    values = {}
    for name, key in schema.items():
        value = raw.get(name)
        if value is None or str(value).strip() == '':
            raise ValidationError('missing value for config key %(key)s', code='missing_key', params={'key': name})
        values[name] = key.parse(name, value)
    return values
