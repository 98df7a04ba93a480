import logging
import os

from fohorse.bench import run_bench
from fohorse.mps import MpsDialect

from .base import EXIT_OK, BaseCommand
from .solve import add_solver_arguments, config_from_options

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    name = "bench"
    help = "Solve every MPS file in a directory and report SGM10"

    def add_arguments(self, parser):
        parser.add_argument(
            "directory",
            type=os.path.abspath,
            help="Directory containing .mps files"
        )

        add_solver_arguments(parser)

        parser.add_argument(
            "--csv",
            dest="outputfile",
            type=os.path.abspath,
            help="Path to the file where per-instance rows should be stored"
        )

        parser.add_argument(
            "--threads",
            type=int,
            help="Number of instances to solve at once (default: FOHORSE_THREADS or 1)"
        )

    def handle(self, **options):
        config = config_from_options(options)
        report = run_bench(
            options["directory"],
            config,
            threads=options.get("threads"),
            dialect=MpsDialect(options["dialect"]),
        )

        self.handle_output(report, options.get("outputfile"))

        print("solved {}/{} sgm10={:.4f}".format(report.solved_count, len(report.rows), report.sgm10))
        return EXIT_OK

    def handle_output(self, report, outputfile):
        if not outputfile:
            return

        with open(outputfile, "w", newline="") as ofile:
            report.to_csv(ofile)
