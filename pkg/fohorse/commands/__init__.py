from .bench import Command as BenchCommand
from .oracle import Command as OracleCommand
from .solve import Command as SolveCommand

COMMANDS = (SolveCommand, BenchCommand, OracleCommand)
