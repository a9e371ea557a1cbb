"""Time marching of the implicit scheme."""
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .grunwald import GrunwaldTable
from .krylov import IterationRecord, SolverConfig, cgnr, gmres_restarted
from .operator import SchemeScalars, assemble_operator, assemble_rhs, build_factors
from .preconditioner import assemble_preconditioner
from .problem import initial_vector, sample_fields


class ConvergenceError(RuntimeError):
    """A time step's linear solve did not reach the requested tolerance."""

    def __init__(self, step, record):
        self.step = step
        self.record = record
        super().__init__(
            f"solver did not converge at time step {step}: relative residual "
            f"{record.final_relative_residual:.3e} after {record.total_inner_iterations} iterations"
        )


@dataclass
class SolutionHistory:
    """Interior values ``u^{(0)}, ..., u^{(n)}`` stored as rows of ``steps``."""

    grid: object
    steps: np.ndarray
    count: int = 1

    @classmethod
    def start(cls, grid, u0):
        steps = np.zeros((grid.n + 1, grid.m - 1))
        steps[0] = u0
        return cls(grid=grid, steps=steps, count=1)

    def append(self, u):
        self.steps[self.count] = u
        self.count += 1

    @property
    def filled(self):
        return self.steps[: self.count]

    @property
    def final(self):
        return self.steps[self.count - 1]

    def __len__(self):
        return self.count


@dataclass
class SolveReport:
    method: str
    ell: int
    m: int
    n: int
    per_step: List[IterationRecord] = field(default_factory=list)
    wall_time_seconds: float = 0.0
    sup_error_final: Optional[float] = None

    @property
    def avg_iterations(self):
        return sum(r.total_inner_iterations for r in self.per_step) / self.n

    @property
    def converged(self):
        return len(self.per_step) == self.n and all(r.converged for r in self.per_step)


def initial_guess(history, k):
    """Extrapolated start for step ``k + 1``: ``u^{(0)}`` first, then ``2 u^{(k)} - u^{(k-1)}``."""
    if k == 0:
        return history.steps[0].copy()
    return 2.0 * history.steps[k] - history.steps[k - 1]


def solve_step(op, b, x0, config, ell):
    """Solve one time step's system with the configured method."""
    precond = assemble_preconditioner(op, ell) if config.preconditioned else None
    if config.method in ("gmres", "pgmres"):
        return gmres_restarted(op.apply, b, x0, config, precond)
    return cgnr(op.apply, op.apply_transpose, b, x0, config, precond)


def march(problem, grid, config, ell=8, u0=None):
    """Advance from ``t = 0`` to ``t = T``.

    Returns ``(history, report)``. Raises :class:`ConvergenceError` naming the
    step as soon as a solve fails; the partial history and report are attached
    to the exception as ``history`` and ``report``.
    """
    table = GrunwaldTable.build(problem.orders, grid.m, grid.n)
    factors = build_factors(table, grid.m)
    omega3 = SchemeScalars.from_grid(problem.orders, grid).omega3
    if u0 is None:
        u0 = initial_vector(problem, grid)
    history = SolutionHistory.start(grid, np.asarray(u0, dtype=float))
    report = SolveReport(method=config.method, ell=ell, m=grid.m, n=grid.n)

    started = time.perf_counter()
    for k in range(grid.n):
        coefficients = sample_fields(problem, grid, k + 1)
        op = assemble_operator(problem, grid, table, k + 1, factors=factors, coefficients=coefficients)
        b = assemble_rhs(table, history.steps, coefficients.source, omega3, k)
        u, record = solve_step(op, b, initial_guess(history, k), config, ell)
        report.per_step.append(record)
        if not record.converged:
            report.wall_time_seconds = time.perf_counter() - started
            err = ConvergenceError(k + 1, record)
            err.history, err.report = history, report
            raise err
        history.append(u)
    report.wall_time_seconds = time.perf_counter() - started

    if problem.exact is not None:
        report.sup_error_final = sup_error(history, problem.exact)
    return history, report


def sup_error(history, exact):
    """Max over interior nodes of ``|u(x_i, T) - u_i^{(n)}|`` at the last stored step."""
    grid = history.grid
    x = grid.interior
    t = grid.time(history.count - 1)
    return float(np.max(np.abs(exact(x, t) - history.final)))


def stability_probe(problem, grid, config, ell, perturbation):
    """Sup-norm of the difference between two marches whose initial data differ.

    Returns one value per stored step, starting with the initial difference.
    """
    perturbation = np.asarray(perturbation, dtype=float)
    base = initial_vector(problem, grid)
    reference, _ = march(problem, grid, config, ell, u0=base)
    perturbed, _ = march(problem, grid, config, ell, u0=base + perturbation)
    return np.max(np.abs(perturbed.steps - reference.steps), axis=1)
