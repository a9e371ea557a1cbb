"""Restarted (left-preconditioned) GMRES and (preconditioned) CGNR.

Both solvers stop on the relative residual of the original system,
``||b - A x|| / ||b|| < tol``, whatever preconditioner is in use.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.linalg import solve_triangular

METHODS = ("gmres", "pgmres", "cgnr", "pcgnr")


class BreakdownError(ArithmeticError):
    """Raised when CGNR meets a non-positive curvature direction."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    restart: int = 20
    iter_max: int = 500
    method: str = "pgmres"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.restart < 1:
            raise ValueError(f"restart must be at least 1, got {self.restart}")
        if self.iter_max < 1:
            raise ValueError(f"iter_max must be at least 1, got {self.iter_max}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")

    @property
    def preconditioned(self):
        return self.method.startswith("p")


@dataclass
class IterationRecord:
    total_inner_iterations: int = 0
    final_relative_residual: float = np.inf
    converged: bool = False
    residual_history: List[float] = field(default_factory=list)


def _orthogonalize(basis, w, j):
    """Modified Gram-Schmidt of ``w`` against ``basis[:j+1]``, with one re-pass.

    Returns the coefficients and the orthogonalized vector. A second pass is
    taken when the norm drops by more than a factor 0.7 (cancellation).
    """
    h = np.zeros(j + 1)
    norm_before = np.linalg.norm(w)
    for i in range(j + 1):
        c = basis[i] @ w
        w = w - c * basis[i]
        h[i] += c
    if np.linalg.norm(w) < 0.7 * norm_before:
        for i in range(j + 1):
            c = basis[i] @ w
            w = w - c * basis[i]
            h[i] += c
    return h, w


def arnoldi(apply_op, v1, steps):
    """Arnoldi process with modified Gram-Schmidt.

    Returns ``(V, H)`` with ``V`` of shape ``(k + 1, n)`` holding the basis as
    rows and ``H`` the ``(k + 1, k)`` Hessenberg matrix, ``k <= steps``
    (smaller on breakdown).
    """
    n = len(v1)
    basis = np.zeros((steps + 1, n))
    hess = np.zeros((steps + 1, steps))
    basis[0] = v1 / np.linalg.norm(v1)
    for j in range(steps):
        h, w = _orthogonalize(basis, apply_op(basis[j]), j)
        hess[: j + 1, j] = h
        hess[j + 1, j] = np.linalg.norm(w)
        if hess[j + 1, j] == 0.0:
            return basis[: j + 1], hess[: j + 1, : j + 1]
        basis[j + 1] = w / hess[j + 1, j]
    return basis, hess


def _givens(a, b):
    r = np.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def gmres_restarted(apply_A, b, x0, config, precond=None):
    """GMRES(restart) with optional left preconditioning by a banded LU.

    The least-squares problem is kept in triangular form by Givens rotations.
    After every inner step the true residual ``r - P V_{j+1} H_j y_j`` of the
    original system is formed and tested; with ``precond=None``, ``P = I``.
    ``config.iter_max`` caps the number of restart cycles.
    """
    b = np.asarray(b, dtype=float)
    x = np.array(x0, dtype=float)
    n = len(b)
    record = IterationRecord()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        bnorm = 1.0

    if precond is None:
        solve_p = apply_p = lambda v: v
    else:
        solve_p, apply_p = precond.apply_inverse, precond.apply

    rho = config.restart
    r = b - apply_A(x)
    rel = np.linalg.norm(r) / bnorm
    record.residual_history.append(rel)
    cycles = 0
    while cycles < config.iter_max and rel >= config.tol:
        cycles += 1
        rw = solve_p(r)
        beta = np.linalg.norm(rw)
        if beta == 0.0:
            break
        basis = np.zeros((rho + 1, n))
        hess = np.zeros((rho + 1, rho))
        tri = np.zeros((rho, rho))
        rot = np.zeros((rho, 2))
        g = np.zeros(rho + 1)
        g[0] = beta
        basis[0] = rw / beta
        y = np.zeros(0)
        j = 0
        while j < rho and rel >= config.tol:
            h, w = _orthogonalize(basis, solve_p(apply_A(basis[j])), j)
            hess[: j + 1, j] = h
            hess[j + 1, j] = np.linalg.norm(w)
            breakdown = hess[j + 1, j] <= 1e-14 * max(1.0, np.abs(h).max())
            if not breakdown:
                basis[j + 1] = w / hess[j + 1, j]
            # rotate the new column into upper-triangular form
            col = hess[: j + 2, j].copy()
            for i in range(j):
                c, s = rot[i]
                col[i], col[i + 1] = c * col[i] + s * col[i + 1], -s * col[i] + c * col[i + 1]
            c, s = _givens(col[j], col[j + 1])
            rot[j] = c, s
            tri[: j + 1, j] = col[: j + 1]
            tri[j, j] = c * col[j] + s * col[j + 1]
            g[j], g[j + 1] = c * g[j], -s * g[j]
            j += 1
            record.total_inner_iterations += 1
            y = solve_triangular(tri[:j, :j], g[:j])
            # true residual of the original system: r - P V_{j+1} H_j y
            k = j if breakdown else j + 1
            r_true = r - apply_p(basis[:k].T @ (hess[:k, :j] @ y))
            rel = np.linalg.norm(r_true) / bnorm
            record.residual_history.append(rel)
            if breakdown:
                break
        x = x + basis[:j].T @ y
        # restart from the recomputed residual so rounding in r_t cannot accumulate
        r = b - apply_A(x)
        rel = np.linalg.norm(r) / bnorm
    # report the residual of the returned iterate, recomputed from scratch
    final = np.linalg.norm(b - apply_A(x)) / bnorm
    record.final_relative_residual = final
    record.converged = bool(final < config.tol)
    return x, record


def cgnr(apply_A, apply_At, b, x0, config, precond=None):
    """Conjugate gradients on ``A^T A x = A^T b``.

    With ``precond`` the normal-equation residual is preconditioned by
    ``(P^T P)^{-1}``. The stopping test uses the original residual
    ``b - A x``, updated recursively and confirmed from scratch at the end.
    The iteration cap is ``config.iter_max * config.restart`` steps.
    """
    b = np.asarray(b, dtype=float)
    x = np.array(x0, dtype=float)
    record = IterationRecord()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        bnorm = 1.0
    solve_m = (lambda v: v) if precond is None else precond.apply_normal_inverse

    s = b - apply_A(x)
    rel = np.linalg.norm(s) / bnorm
    record.residual_history.append(rel)
    max_steps = config.iter_max * config.restart
    steps = 0
    while steps < max_steps and rel >= config.tol:
        r = apply_At(s)
        z = solve_m(r)
        p = z.copy()
        rz = r @ z
        while steps < max_steps:
            ap = apply_A(p)
            curvature = ap @ ap
            if not curvature > 0.0:
                raise BreakdownError(f"non-positive curvature {curvature:.3e} at step {steps}")
            step = rz / curvature
            x = x + step * p
            s = s - step * ap
            steps += 1
            rel = np.linalg.norm(s) / bnorm
            record.residual_history.append(rel)
            if rel < config.tol:
                break
            r = apply_At(s)
            z = solve_m(r)
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        # the recursive residual can drift; confirm and restart if needed
        s = b - apply_A(x)
        rel = np.linalg.norm(s) / bnorm
    record.total_inner_iterations = steps
    final = np.linalg.norm(b - apply_A(x)) / bnorm
    record.final_relative_residual = final
    record.converged = bool(final < config.tol)
    return x, record
