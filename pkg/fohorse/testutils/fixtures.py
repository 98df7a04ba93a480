import numpy as np
import pytest

from fohorse.mps import write_mps_file
from fohorse.oracle import make_infeasible_fixture, random_feasible_lp
from fohorse.problem import LpProblem
from fohorse.solver import SolverConfig

RANDOM_SUITE_SIZE = 20


def random_suite_problems(count=RANDOM_SUITE_SIZE):
    """Random feasible LPs with 1-3 rows and up to 3 more columns than rows"""
    problems = []
    for seed in range(count):
        m = 1 + seed % 3
        n = m + 1 + (seed // 3) % 3
        problems.append(random_feasible_lp(seed, m, n))
    return problems


@pytest.fixture(name="fig2a")
def fix_fig2a():
    """min 2 x1 + 3 x2 st. x1 + 2 x2 = 1, x >= 0

    Optimum 1.5 at (0, 0.5)
    """
    return LpProblem.build([2.0, 3.0], A=[[1.0, 2.0]], b=[1.0], name="fig2a")


@pytest.fixture(name="fig2b")
def fix_fig2b():
    """Same as fig2a but x1 >= -10 and x2 free

    Optimum -3.5 at (-10, 5.5)
    """
    return LpProblem.build(
        [2.0, 3.0],
        A=[[1.0, 2.0]],
        b=[1.0],
        lower=[-10.0, -np.inf],
        upper=np.inf,
        name="fig2b",
    )


@pytest.fixture(name="bilinear_saddle")
def fix_bilinear_saddle():
    """min_{x >= 0} max_y (x - 3) y, written as the LP min 0 st. -x = -3

    The unique saddle point is (3, 0)
    """
    return LpProblem.build([0.0], A=[[-1.0]], b=[-3.0], name="bilinear")


@pytest.fixture(name="primal_infeasible")
def fix_primal_infeasible():
    return make_infeasible_fixture("primal")


@pytest.fixture(name="dual_infeasible")
def fix_dual_infeasible():
    return make_infeasible_fixture("dual")


@pytest.fixture(name="both_infeasible")
def fix_both_infeasible():
    return make_infeasible_fixture("both")


@pytest.fixture(name="random_suite", scope="session")
def fix_random_suite():
    return random_suite_problems()


@pytest.fixture(name="tight_config")
def fix_tight_config():
    return SolverConfig(tolerance_eps=1e-8, iteration_limit=200000, time_limit=60.0)


@pytest.fixture(name="settings_file")
def fix_settings_file(tmp_path, monkeypatch):
    """Point FOHORSE_SETTINGS at a yaml file. Call the fixture with the yaml
    text to write."""

    def write_settings(text):
        path = tmp_path / "fohorse.yaml"
        path.write_text(text)
        monkeypatch.setenv("FOHORSE_SETTINGS", str(path))
        return path

    return write_settings


@pytest.fixture(name="instance_dir")
def fix_instance_dir(tmp_path, fig2a, fig2b, primal_infeasible):
    """A directory with three small MPS files, one of them infeasible"""
    directory = tmp_path / "instances"
    directory.mkdir()
    for problem in (fig2a, fig2b, primal_infeasible):
        write_mps_file(directory / "{}.mps".format(problem.name), problem)
    return directory
