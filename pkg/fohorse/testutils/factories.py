import factory
import numpy as np

from fohorse.problem import LpProblem
from fohorse.solver import SolverConfig


class LpProblemFactory(factory.Factory):
    """min 2 x1 + 3 x2 subject to x1 + 2 x2 = 1, x >= 0 unless overridden"""

    class Meta:
        model = LpProblem

    name = factory.Sequence(lambda n: "lp-{}".format(n))
    c = (2.0, 3.0)
    A = ((1.0, 2.0),)
    b = (1.0,)
    G = None
    h = None
    lower = 0.0
    upper = np.inf

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return model_class.build(*args, **kwargs)

    @classmethod
    def _build(cls, model_class, *args, **kwargs):
        return model_class.build(*args, **kwargs)


class SolverConfigFactory(factory.Factory):
    """Tight tolerance and limits that keep a runaway test short"""

    class Meta:
        model = SolverConfig

    tolerance_eps = 1e-8
    iteration_limit = 100000
    time_limit = 60.0
