"""``fohorse`` command line entry point"""
import argparse
import logging
import sys

from fohorse import __version__, fsettings
from fohorse.commands import COMMANDS
from fohorse.commands.base import EXIT_INPUT, EXIT_NUMERICAL
from fohorse.util.exceptions import EmptyInput, InvalidParameter, NumericError, ProblemError, TooLarge
from fohorse.util.log_format import configure_logging

logger = logging.getLogger(__name__)


LEVELS = [logging.DEBUG, logging.INFO, logging.WARNING, logging.ERROR]

# Anything that means "the input was bad" rather than "the solve went wrong"
INPUT_ERRORS = (ProblemError, OSError, EmptyInput, TooLarge, InvalidParameter)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input error code, since 2 means
    'infeasible' for this program"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, "{}: error: {}\n".format(self.prog, message))


def build_parser():
    parser = _Parser(prog="fohorse", description="First order LP solver")

    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    parser.add_argument(
        "--log-format",
        choices=["color", "glog"],
        default="color",
        help="Format of log output on stderr"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="Less logging")

    subparsers = parser.add_subparsers(dest="command_name", metavar="command")
    subparsers.required = True

    for command_class in COMMANDS:
        command_class().create_parser(subparsers)

    return parser


def log_level(verbose, quiet):
    index = min(max(1 - verbose + quiet, 0), len(LEVELS) - 1)
    return LEVELS[index]


def main(argv=None):
    """Run the program and return its exit code"""
    options = vars(build_parser().parse_args(argv))

    command = options.pop("command")
    options.pop("command_name")
    level = log_level(options.pop("verbose"), options.pop("quiet"))
    configure_logging(options.pop("log_format"), level, config=fsettings.LOGGING)

    try:
        return command.execute(**options)
    except INPUT_ERRORS as e:
        logger.debug("Input error", exc_info=True)
        sys.stderr.write("fohorse: error: {}\n".format(e))
        return EXIT_INPUT
    except NumericError as e:
        logger.exception("Numerical failure")
        sys.stderr.write("fohorse: numerical error: {}\n".format(e))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
