"""
Command line driver::

    kpz-lab tw-table --s-min -6 --s-max 4 --out tw.csv
    kpz-lab tasep-onepoint --ic flat --t 1000 --runs 10000 --seed 7
    KPZLAB_WORKERS=8 kpz-lab compare --N 100 --runs 5000 --u-max 2 --du 0.5

Exit codes: 0 success, 2 usage error, 3 invalid value, 4 unwritable output,
5 numerical failure.
"""
import argparse
import logging
import sys

from . import __version__
from .config import ExperimentConfig
from .exceptions import JammedError, OutputError, QuadratureError, ValidationError
from .experiments import ExperimentBase
from .output import check_writable, save_table


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_OUTPUT = 4
EXIT_NUMERICAL = 5

IC_SUBCOMMANDS = ('tasep-onepoint', 'tasep-cov')
ENSEMBLE_SUBCOMMANDS = ('dbm-cov', 'rmt-onepoint')


def _common_arguments():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--config', metavar='PATH', help="YAML file with config values; flags win")
    parser.add_argument('--out', metavar='PATH', help="output CSV, '-' for stdout (default: <subcommand>.csv)")
    parser.add_argument('--seed', type=int)
    parser.add_argument('--t', type=float, help="TASEP time")
    parser.add_argument('--runs', type=int, help="Monte-Carlo replicas")
    parser.add_argument('--N', type=int, help="matrix dimension")
    parser.add_argument('--rho', type=float, help="stationary density")
    parser.add_argument('--u-max', dest='u_max', type=float)
    parser.add_argument('--du', type=float)
    parser.add_argument('--u', type=float, help="measurement point for one-point laws")
    parser.add_argument('--n-quad', dest='n_quad', type=int, help="Nystrom nodes per cut")
    parser.add_argument('--M', type=float, help="Nystrom truncation length per cut")
    parser.add_argument('--s-min', dest='s_min', type=float)
    parser.add_argument('--s-max', dest='s_max', type=float)
    parser.add_argument('--ds', type=float)
    parser.add_argument('--bin-width', dest='bin_width', type=float)
    parser.add_argument('--times', help="comma separated TASEP times")
    parser.add_argument('--batches', type=int, help="batches for covariance errors")
    parser.add_argument('-v', '--verbose', action='store_true')
    parser.add_argument('--debug', action='store_true')
    return parser


def build_parser():
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog='kpz-lab', description="KPZ universality numerical laboratory")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')
    subparsers.required = True
    for experiment in ExperimentBase.registry:
        subparser = subparsers.add_parser(experiment.name, parents=[common], help=experiment.title)
        if experiment.name in IC_SUBCOMMANDS:
            subparser.add_argument('--ic', choices=('step', 'flat', 'stat'))
        if experiment.name in ENSEMBLE_SUBCOMMANDS:
            subparser.add_argument('--ensemble', choices=('gue', 'goe'))
    return parser


def configure_logging(args):
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def run(config):
    """Run the configured experiment and write its table."""
    experiment = ExperimentBase.get(config.subcommand)
    path = config.out or '%s.csv' % config.subcommand
    check_writable(path)
    table = experiment(config)
    save_table(path, experiment, config, table)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args)
    flags = {
        name: value for name, value in vars(args).items()
        if name in ExperimentConfig.field_names() and name != 'subcommand'}
    try:
        config = ExperimentConfig.from_sources(args.subcommand, flags, args.config)
        return run(config)
    except ValidationError as e:
        print("kpz-lab: invalid value: %s" % e, file=sys.stderr)
        return EXIT_INVALID
    except OutputError as e:
        print("kpz-lab: output error: %s" % e, file=sys.stderr)
        return EXIT_OUTPUT
    except (QuadratureError, JammedError) as e:
        print("kpz-lab: numerical failure: %s" % e, file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
