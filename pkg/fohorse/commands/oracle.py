import logging
import os

from fohorse.mps import read_mps
from fohorse.oracle import OracleStatus, enumerate_vertices_solve
from fohorse.serializers import oracle_solution_to_dict

from .base import EXIT_INFEASIBLE, EXIT_OK, BaseCommand

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    name = "oracle"
    help = "Solve a tiny MPS instance exactly by vertex enumeration"

    def add_arguments(self, parser):
        parser.add_argument(
            "path",
            type=os.path.abspath,
            help="The MPS file to solve"
        )

        parser.add_argument(
            "--json",
            dest="outputfile",
            type=os.path.abspath,
            help="Path to the file where the solution should be stored"
        )

    def handle(self, **options):
        problem = read_mps(options["path"])
        solution = enumerate_vertices_solve(problem)

        serialized = oracle_solution_to_dict(solution, maximize=problem.maximize)
        self.handle_output(serialized, options.get("outputfile"))

        print("{} {} objective={!r}".format(problem.name, solution.status.value, serialized["objective"]))

        if solution.status is OracleStatus.OPTIMAL:
            return EXIT_OK
        return EXIT_INFEASIBLE
