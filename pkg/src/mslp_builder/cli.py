import argparse
import importlib.metadata
import logging
import sys

from . import constants

from .exceptions import MSLPError
from .main import MSLPBuilder
from .utils import configure_logger


logger = logging.getLogger(__name__)


class CustomVerbosityAction(argparse.Action):
    """
    Custom argparse Action to accept both '-v N' and '-vvv'.
    """
    def __init__(self, option_strings, *args, **kwargs):
        super().__init__(option_strings=option_strings, *args, **kwargs)
        self.count = 0

    def __call__(self, parser, namespace, values, option_string=None):
        if values is None:
            self.count += 1
        else:
            try:
                self.count = int(values)
            except ValueError:
                self.count = values.count('v') + 1

        if self.count > constants.max_verbosity:
            raise ValueError(f'maximum verbosity is {constants.max_verbosity}')

        setattr(namespace, self.dest, self.count)


def run():
    args = parse_args()
    configure_logger(args.verbosity)

    try:
        builder = MSLPBuilder(**vars(args))
        sys.exit(builder.run())
    except MSLPError as e:
        logger.error(e.args[0])
        sys.exit(e.exit_code)


def get_version():
    return importlib.metadata.version('mslp_builder')


def add_program_options(parser):
    """
    Add sub-commands that read or write programs.
    """
    gen_parser = parser.add_parser(
        'gen',
        help='Emits the straight-line program for the Bruhat decomposition of a matrix.',
        description=(
            'Reads a matrix g in SL(d, q) and emits a program that leaves the monomial matrix w '
            'and the lower unitriangular u1, u2 with g = u1 * w * u2 in slots 11 to 13. '
            'A stats record is written to standard output.'
        )
    )
    gen_parser.add_argument(
        '--mode',
        choices=constants.modes,
        default=constants.default_mode,
        help='"step2" emits the program over the memory (s, ..., x^-1, g, 1, 1); '
             '"full" emits the program over the standard generators alone (default: %(default)s)')
    gen_parser.add_argument(
        '--result',
        help='Also write w, u1 and u2 to this file')
    gen_parser.add_argument(
        '--check-invariants',
        action='store_true',
        help='Check u1 * g * u2 = w after every column (slow)')

    eval_parser = parser.add_parser(
        'eval',
        help='Evaluates a program over matrices.',
        description=(
            'Loads the standard generators for the field in the program header, or the given '
            'generator matrices, into the first slots, followed by any payload matrices, and runs '
            'the program. Prints the selected output or the last element written.'
        )
    )
    eval_parser.add_argument(
        '--gens',
        nargs='+',
        help='Matrix files for slots 1, 2, ... (default: the standard generators)')
    eval_parser.add_argument(
        '--payload',
        nargs='+',
        help='Matrix files for the slots following the generators (at most 3)')

    stats_parser = parser.add_parser(
        'stats',
        help='Prints length, quota and input slots of a program.',
        description='Reads a program file and prints its statistics as key=value lines.'
    )

    for p in [gen_parser, eval_parser, stats_parser]:
        p.add_argument('--in',
                       required=True,
                       dest='filename',
                       help='Input file, "-" for standard input')

    return [gen_parser, eval_parser, stats_parser]


def add_matrix_options(parser):
    """
    Add sub-commands for matrices and benchmarks.
    """
    verify_parser = parser.add_parser(
        'verify',
        help='Decomposes a matrix and checks the result and its programs.',
        description=(
            'Runs the full pipeline and prints a PASS/FAIL report. '
            'Exits 0 only if every check passes.'
        )
    )
    verify_parser.add_argument('--in',
                               required=True,
                               dest='filename',
                               help='Matrix file, "-" for standard input')
    verify_parser.add_argument('--check-invariants',
                               action='store_true',
                               help='Check u1 * g * u2 = w after every column (slow)')

    random_parser = parser.add_parser(
        'random',
        help='Prints a seeded random matrix in SL(d, q).',
        description='Writes a random matrix with determinant 1. The same seed gives the same bytes.'
    )

    bench_parser = parser.add_parser(
        'bench',
        help='Runs the pipeline over random matrices and tabulates lengths and quotas.',
        description=(
            'Decomposes seeded random matrices, verifies each result, and prints one row per trial '
            'with the measured length and quota next to their bounds.'
        )
    )
    bench_parser.add_argument('-f', '--file',
                              dest='definition',
                              help=f'Sweep definition file, for example demo/{constants.default_bench_definition}. '
                                   'Overrides --d, --q, --trials and --seed.')
    bench_parser.add_argument('--trials',
                              type=int,
                              default=constants.default_bench_trials,
                              help='Random matrices per (d, q) (default: %(default)s)')

    for p in [random_parser, bench_parser]:
        p.add_argument('--d', type=int, required=p is random_parser, help='Dimension, at least 3')
        p.add_argument('--q', type=int, required=p is random_parser, help='Field order, a prime power')
        p.add_argument('--seed', type=int, default=constants.default_seed, help='Random seed (default: %(default)s)')

    for p in [verify_parser, bench_parser]:
        p.add_argument('--no-eval',
                       action='store_true',
                       help='Do not re-evaluate the emitted programs')

    return [verify_parser, random_parser, bench_parser]


def parse_args(args=None):

    parser = argparse.ArgumentParser(
        prog='mslp-builder',
        description=(
            'Memory-bounded straight-line programs for the Bruhat decomposition in SL(d, q). '
            'Get started by looking at the help text for one of the subcommands.'
        )
    )
    parser.add_argument(
        '--version', action='version', version=get_version(),
        help='Print mslp-builder version and exit.'
    )

    subparsers = parser.add_subparsers(
        help='The command to invoke.',
        dest='action',
        required=True,
    )

    for n in add_program_options(subparsers) + add_matrix_options(subparsers):

        n.add_argument('--out',
                       dest='output',
                       help='Output file (default: standard output)')

        n.add_argument('-v', '--verbosity',
                       dest='verbosity',
                       action=CustomVerbosityAction,
                       nargs='?',
                       default=constants.default_verbosity,
                       help='Set the verbosity output level. '
                            'Adding multiple -v will increase the verbosity to a max of 3 (-vvv). '
                            'Integer values are also accepted (for example, "-v3" or "--verbosity 3"). '
                            'Default is %(default)s.')

    return parser.parse_args(args)
