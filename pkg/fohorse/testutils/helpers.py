"""Reference routines for tests

These deliberately avoid the solver's own bookkeeping: KKT is recomputed
with dense numpy, trajectories are driven straight from the kernels.
"""
import numpy as np

from fohorse.kernels import Iterate, halpern_combine, pdhg_step, reflected_halpern_combine
from fohorse.oracle import OracleStatus, enumerate_vertices_solve


def relative_kkt_errors(problem, x, y):
    """(relative primal, relative dual, relative gap) computed densely"""
    G = problem.ineq_matrix.to_dense()
    A = problem.eq_matrix.to_dense()
    m1 = problem.m1
    y_ineq, y_eq = np.asarray(y[:m1]), np.asarray(y[m1:])

    primal = np.concatenate([np.maximum(problem.ineq_rhs - G @ x, 0.0), A @ x - problem.eq_rhs])
    residual = problem.objective - G.T @ y_ineq - A.T @ y_eq

    lam = np.zeros_like(residual)
    for j, r in enumerate(residual):
        if r > 0 and np.isfinite(problem.lower[j]):
            lam[j] = r
        elif r < 0 and np.isfinite(problem.upper[j]):
            lam[j] = r

    dual = residual - lam

    primal_obj = float(problem.objective @ x)
    dual_obj = float(problem.ineq_rhs @ y_ineq + problem.eq_rhs @ y_eq)
    for j, value in enumerate(lam):
        if value > 0:
            dual_obj += problem.lower[j] * value
        elif value < 0:
            dual_obj += problem.upper[j] * value

    q_norm = np.linalg.norm(np.concatenate([problem.ineq_rhs, problem.eq_rhs]))
    c_norm = np.linalg.norm(problem.objective)

    return (
        np.linalg.norm(primal) / (1.0 + q_norm),
        np.linalg.norm(dual) / (1.0 + c_norm),
        abs(primal_obj - dual_obj) / (1.0 + abs(primal_obj) + abs(dual_obj)),
    )


def passes_relative_kkt(problem, x, y, eps):
    if problem.m1 and np.min(y[:problem.m1]) < 0:
        return False
    return all(error <= eps for error in relative_kkt_errors(problem, x, y))


def oracle_saddle_point(problem):
    """(x*, y*) from vertex enumeration as an Iterate"""
    solution = enumerate_vertices_solve(problem)
    assert solution.status is OracleStatus.OPTIMAL
    assert solution.y is not None
    return Iterate(np.asarray(solution.x, dtype=np.float64), np.asarray(solution.y, dtype=np.float64))


def spectral_norm(matrix):
    dense = matrix.to_dense()
    if dense.size == 0:
        return 0.0
    return float(np.linalg.norm(dense, 2))


def gda_trajectory(saddle, z0, tau, sigma, iterations):
    """Simultaneous gradient descent ascent, without projection"""
    trajectory = [z0]
    z = z0
    for _ in range(iterations):
        grad_x = saddle.objective - saddle.k_matrix.spmv_t(z.y)
        grad_y = saddle.q - saddle.k_matrix.spmv(z.x)
        z = Iterate(z.x - tau * grad_x, z.y + sigma * grad_y)
        trajectory.append(z)
    return trajectory


def pdhg_trajectory(saddle, z0, params, iterations, mode="vanilla"):
    """z^0 ... z^iterations for one of vanilla, halpern or reflected
    iteration, anchored at z^0 and never restarted"""
    trajectory = [z0]
    z = z0
    for k in range(iterations):
        w = pdhg_step(z, saddle, params)
        if mode == "vanilla":
            z = w
        elif mode == "halpern":
            z = halpern_combine(w, z0, k)
        elif mode == "reflected":
            z = reflected_halpern_combine(w, z, z0, k)
        else:
            raise ValueError(mode)
        trajectory.append(z)
    return trajectory


def running_averages(trajectory):
    """Uniform averages of z^1..z^k for every k"""
    averages = []
    total = None
    for k, z in enumerate(trajectory[1:], start=1):
        total = z if total is None else total + z
        averages.append(total / k)
    return averages


def p_inner(a, b, saddle, params):
    """<a, b>_P for P = [[I/tau, K^T], [K, I/sigma]]"""
    k_matrix = saddle.k_matrix
    return float(
        (a.x @ b.x) / params.tau
        + (a.y @ b.y) / params.sigma
        + a.y @ k_matrix.spmv(b.x)
        + b.y @ k_matrix.spmv(a.x)
    )
