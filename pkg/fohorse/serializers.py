"""Plain dict/JSON views of solver and oracle results

The output schema is stable: tooling downstream reads the keys below, so new
keys can be added but existing ones should not change meaning.
"""
import json
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


def _number(value):
    """JSON has no NaN/inf, so those go out as null"""
    value = float(value)
    if math.isfinite(value):
        return value
    return None


def _vector(values):
    if values is None:
        return None
    return [_number(v) for v in np.asarray(values, dtype=np.float64)]


def kkt_to_dict(kkt):
    return {key: _number(value) for key, value in kkt.as_dict().items()}


def certificate_to_dict(certificate):
    if certificate is None:
        return None

    return {
        "kind": certificate.kind,
        "source": certificate.source,
        "ray": _vector(certificate.ray),
    }


def result_to_dict(result, include_solution=True):
    """Serialize a SolveResult

    Args:
        result (SolveResult): finished solve
        include_solution (bool): whether to include x, y and reduced costs

    Returns:
        dict: always has status, primal_objective, dual_objective,
            iterations, restarts, solve_time_sec and kkt. certificate is only
            present for infeasible results.
    """
    serialized = {
        "status": result.status.value,
        "primal_objective": _number(result.primal_objective),
        "dual_objective": _number(result.dual_objective),
        "iterations": int(result.iterations),
        "restarts": int(result.restarts),
        "solve_time_sec": float(result.solve_time),
        "kkt": kkt_to_dict(result.kkt),
        "objective_sense_flipped": bool(result.objective_sense_flipped),
        "warnings": list(result.warnings),
        "restart_log": [
            {key: (_number(value) if isinstance(value, float) else value) for key, value in entry.as_dict().items()}
            for entry in result.restart_log
        ],
    }

    if include_solution:
        serialized["x"] = _vector(result.x)
        serialized["y"] = _vector(result.y)
        serialized["reduced_costs"] = _vector(result.reduced_costs)

    if result.certificate is not None:
        serialized["certificate"] = certificate_to_dict(result.certificate)

    return serialized


def oracle_solution_to_dict(solution, maximize=False):
    """Serialize an OracleSolution. The objective is flipped back for
    maximisation problems."""
    objective = -solution.objective if maximize else solution.objective
    serialized = {
        "status": solution.status.value,
        "objective": _number(objective),
        "x": _vector(solution.x),
        "y": _vector(solution.y),
        "active_set": list(solution.active_set),
        "singular_bases": int(solution.singular_bases),
    }

    if solution.ray is not None:
        serialized["ray"] = _vector(solution.ray)

    return serialized


def trace_record_to_dict(record):
    """Make one solver callback record JSON safe"""
    serialized = {
        "k": int(record["k"]),
        "inner_k": int(record["inner_k"]),
        "epoch": int(record["epoch"]),
        "eta": _number(record["eta"]),
        "omega": _number(record["omega"]),
        "residual": _number(record["residual"]),
        "restart": bool(record["restart"]),
    }

    if record.get("kkt") is not None:
        serialized["kkt"] = {key: _number(value) for key, value in record["kkt"].items()}

    return serialized


class TraceWriter:
    """Callback writing every ``every``-th record, and every restart, as a
    JSON line"""

    def __init__(self, stream, every=1):
        if every < 1:
            raise ValueError("Trace interval must be at least 1")

        self.stream = stream
        self.every = every
        self.written = 0

    def __call__(self, record):
        if record["restart"] or record["k"] % self.every == 0 or record.get("kkt") is not None:
            self.stream.write(json.dumps(trace_record_to_dict(record)))
            self.stream.write("\n")
            self.written += 1
