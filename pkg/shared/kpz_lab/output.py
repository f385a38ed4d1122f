"""
CSV emission: ``#`` comment header (version, experiment, seed, every config
value, experiment notes), then one header row and the data rows.
"""
import csv
import logging
import math
import os
import sys

from . import __version__
from .exceptions import OutputError


logger = logging.getLogger(__name__)

STDOUT = '-'


def format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return ','.join(format_value(v) for v in value)
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, int):
        return '%d' % value
    value = float(value)
    if math.isnan(value):
        return 'nan'
    return '%.10g' % value


def check_writable(path):
    """Fail early, before any computation, when ``path`` cannot be written."""
    if path in (None, STDOUT):
        return
    directory = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path):
        raise OutputError("output path %s is a directory" % path)
    if not os.path.isdir(directory):
        raise OutputError("output directory %s does not exist" % directory)
    if os.path.exists(path):
        writable = os.access(path, os.W_OK)
    else:
        writable = os.access(directory, os.W_OK)
    if not writable:
        raise OutputError("output path %s is not writable" % path)


def header_lines(experiment, config, table):
    lines = [
        'kpz-lab %s' % __version__,
        'experiment: %s' % experiment.name,
        'seed: %d' % config.seed,
    ]
    lines.extend('config %s: %s' % (name, format_value(value)) for name, value in config.header_items())
    lines.extend('%s: %s' % (name, format_value(value)) for name, value in table.notes)
    return ['# %s' % line for line in lines]


def write_table(handle, experiment, config, table):
    for line in header_lines(experiment, config, table):
        handle.write(line + '\n')
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])


def save_table(path, experiment, config, table):
    if path in (None, STDOUT):
        write_table(sys.stdout, experiment, config, table)
        return
    try:
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            write_table(handle, experiment, config, table)
    except OSError as e:
        raise OutputError("cannot write %s: %s" % (path, e))
    logger.info("wrote %d rows to %s", len(table.rows), path)
