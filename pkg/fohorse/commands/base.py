import json
import logging

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3
EXIT_INPUT = 4


class BaseCommand:
    """One subcommand of the ``fohorse`` program

    Subclasses set ``name`` and ``help``, add their options in
    ``add_arguments`` and do the work in ``handle``, which returns the exit
    code.
    """

    name = None
    help = ""

    def create_parser(self, subparsers):
        parser = subparsers.add_parser(self.name, help=self.help, description=self.help)
        self.add_arguments(parser)
        parser.set_defaults(command=self)
        return parser

    def add_arguments(self, parser):
        pass

    def handle(self, **options):
        raise NotImplementedError

    def execute(self, **options):
        logger.debug("Running '%s' with %s", self.name, options)
        return self.handle(**options)

    def handle_output(self, data, outputfile):
        """Dump data as json, if an output file was given"""
        if not outputfile:
            return

        with open(outputfile, "w") as ofile:
            json.dump(data, ofile, indent=2)
