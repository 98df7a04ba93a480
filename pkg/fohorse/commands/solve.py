import logging
import os

from fohorse.mps import MpsDialect, read_mps
from fohorse.serializers import TraceWriter, result_to_dict
from fohorse.solver import SolverConfig, SolveStatus, solve

from .base import EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_NUMERICAL, EXIT_OK, BaseCommand

logger = logging.getLogger(__name__)


MODE_NAMES = {
    "r2hpdhg": "reflected_halpern",
    "hpdhg": "halpern",
    "pdhg": "vanilla_pdhg",
    "average": "average",
}

RESTART_NAMES = {
    "fpr": "fixed_point_residual",
    "kkt": "kkt_error",
    "none": "none",
}


def exit_code_for(status):
    if status is SolveStatus.OPTIMAL:
        return EXIT_OK
    if status.infeasible:
        return EXIT_INFEASIBLE
    if status.limit:
        return EXIT_LIMIT
    return EXIT_NUMERICAL


def config_from_options(options):
    """SolverConfig from settings plus whichever flags were actually given"""
    flags = {
        "tolerance_eps": options.get("tol"),
        "mode": MODE_NAMES.get(options.get("mode")),
        "restart_scheme": RESTART_NAMES.get(options.get("restart")),
        "step_size_mode": options.get("step_size"),
        "iteration_limit": options.get("iter_limit"),
        "time_limit": options.get("time_limit"),
    }
    overrides = {key: value for key, value in flags.items() if value is not None}

    if options.get("no_precondition"):
        overrides["preconditioning"] = False

    return SolverConfig.from_settings(**overrides)


def add_solver_arguments(parser):
    """Flags shared with bench"""
    parser.add_argument(
        "--tol",
        type=float,
        help="Relative KKT tolerance, eg 1e-4 (default) or 1e-8"
    )

    parser.add_argument(
        "--time-limit",
        type=float,
        help="Wall clock limit per solve in seconds"
    )

    parser.add_argument(
        "--dialect",
        choices=[d.value for d in MpsDialect],
        default=MpsDialect.FREE.value,
        help="MPS dialect of the input files"
    )


class Command(BaseCommand):
    name = "solve"
    help = "Solve a single MPS instance"

    def add_arguments(self, parser):
        parser.add_argument(
            "path",
            type=os.path.abspath,
            help="The MPS file to solve"
        )

        add_solver_arguments(parser)

        parser.add_argument(
            "--mode",
            choices=sorted(MODE_NAMES),
            help="Iteration scheme"
        )

        parser.add_argument(
            "--restart",
            choices=sorted(RESTART_NAMES),
            help="Restart scheme"
        )

        parser.add_argument(
            "--step-size",
            choices=["adaptive", "constant"],
            help="Step size rule"
        )

        parser.add_argument(
            "--iter-limit",
            type=int,
            help="Maximum number of iterations"
        )

        parser.add_argument(
            "--no-precondition",
            action="store_true",
            help="Skip Ruiz and Pock-Chambolle scaling"
        )

        parser.add_argument(
            "--json",
            dest="outputfile",
            type=os.path.abspath,
            help="Path to the file where the result should be stored"
        )

        parser.add_argument(
            "--trace",
            type=os.path.abspath,
            help="Path to a JSON lines file for the iteration trace"
        )

        parser.add_argument(
            "--trace-every",
            default=1,
            type=int,
            help="Only trace every N-th iteration (restarts and checks are always traced)"
        )

    def handle(self, **options):
        problem = read_mps(options["path"], dialect=MpsDialect(options["dialect"]))
        config = config_from_options(options)

        if options.get("trace"):
            with open(options["trace"], "w") as tfile:
                result = solve(problem, config, callback=TraceWriter(tfile, options["trace_every"]))
        else:
            result = solve(problem, config)

        self.handle_output(result_to_dict(result), options.get("outputfile"))

        print("{} {} objective={!r} iterations={} time={:.3f}s".format(
            problem.name, result.status.value, result.primal_objective, result.iterations, result.solve_time))

        return exit_code_for(result.status)
