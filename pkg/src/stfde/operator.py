"""Matrix-free system operator ``I + A`` and the right-hand side of each step."""
from dataclasses import dataclass
from math import gamma as gamma_fn

import numpy as np

from .problem import sample_fields
from .toeplitz import DENSE_SIZE_LIMIT, beta_factor, gamma_factor


@dataclass(frozen=True)
class SchemeScalars:
    omega1: float
    omega2: float
    omega3: float

    @classmethod
    def from_grid(cls, orders, grid):
        c = gamma_fn(2.0 - orders.alpha) * grid.tau**orders.alpha
        return cls(
            omega1=c / grid.h**orders.beta,
            omega2=c / grid.h**orders.gamma,
            omega3=c,
        )


def build_factors(table, m):
    """Toeplitz factors ``(G_beta, G_gamma)`` of order ``m - 1``."""
    return beta_factor(table.g_beta, m - 1), gamma_factor(table.g_gamma, m - 1)


class StfdeOperator:
    """``I + w1 (D+ Gb + D- Gb^T) - w2 (E+ Gg + E- Gg^T)`` applied matrix-free."""

    def __init__(self, scalars, d_plus, d_minus, e_plus, e_minus, g_beta_factor, g_gamma_factor):
        self.scalars = scalars
        self.size = g_beta_factor.size
        self.diag_d_plus = np.asarray(d_plus, dtype=float)
        self.diag_d_minus = np.asarray(d_minus, dtype=float)
        self.diag_e_plus = np.asarray(e_plus, dtype=float)
        self.diag_e_minus = np.asarray(e_minus, dtype=float)
        self.g_beta_factor = g_beta_factor
        self.g_gamma_factor = g_gamma_factor
        for d in (self.diag_d_plus, self.diag_d_minus, self.diag_e_plus, self.diag_e_minus):
            if d.shape != (self.size,):
                raise ValueError(f"diagonal of shape {d.shape} does not match size {self.size}")
        if g_gamma_factor.size != self.size:
            raise ValueError("Toeplitz factors differ in size")

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got shape {v.shape}")
        return v

    def apply(self, v):
        v = self._check(v)
        w1, w2 = self.scalars.omega1, self.scalars.omega2
        gb, gbt = self.g_beta_factor.apply_pair(v)
        gg, ggt = self.g_gamma_factor.apply_pair(v)
        return (
            v
            + w1 * (self.diag_d_plus * gb + self.diag_d_minus * gbt)
            - w2 * (self.diag_e_plus * gg + self.diag_e_minus * ggt)
        )

    def apply_transpose(self, v):
        v = self._check(v)
        w1, w2 = self.scalars.omega1, self.scalars.omega2
        # (D G)^T = G^T D, so the diagonals scale the input instead of the output
        gb_minus, gbt_plus = self.g_beta_factor.apply_mixed(self.diag_d_minus * v, self.diag_d_plus * v)
        gg_minus, ggt_plus = self.g_gamma_factor.apply_mixed(self.diag_e_minus * v, self.diag_e_plus * v)
        return v + w1 * (gbt_plus + gb_minus) - w2 * (ggt_plus + gg_minus)

    def apply_normal(self, v):
        return self.apply_transpose(self.apply(v))

    def to_dense(self):
        if self.size > DENSE_SIZE_LIMIT:
            raise ValueError(f"refusing to materialize operator of size {self.size}")
        w1, w2 = self.scalars.omega1, self.scalars.omega2
        gb = self.g_beta_factor.to_dense()
        gg = self.g_gamma_factor.to_dense()
        a = w1 * (self.diag_d_plus[:, None] * gb + self.diag_d_minus[:, None] * gb.T) - w2 * (
            self.diag_e_plus[:, None] * gg + self.diag_e_minus[:, None] * gg.T
        )
        return np.eye(self.size) + a


def apply_system(op, v):
    return op.apply(v)


def apply_normal(op, v):
    return op.apply_normal(v)


def assemble_operator(problem, grid, table, k, factors=None, coefficients=None):
    """System operator of the step that produces ``u^{(k)}`` (``1 <= k <= n``).

    ``factors`` may carry prebuilt ``(G_beta, G_gamma)`` to reuse their cached
    spectra; ``coefficients`` may carry an already sampled
    :class:`~stfde.problem.DiagonalCoefficients`.
    """
    if not 1 <= k <= grid.n:
        raise ValueError(f"time index {k} outside 1..{grid.n}")
    if factors is None:
        factors = build_factors(table, grid.m)
    if coefficients is None:
        coefficients = sample_fields(problem, grid, k)
    return StfdeOperator(
        SchemeScalars.from_grid(problem.orders, grid),
        coefficients.d_plus,
        coefficients.d_minus,
        coefficients.e_plus,
        coefficients.e_minus,
        *factors,
    )


def memory_weights(a, k):
    """Weights on ``u^{(0)}, ..., u^{(k)}`` in the right-hand side of step ``k + 1``."""
    a = np.asarray(a)
    if k >= len(a):
        raise ValueError(f"need time weights up to a_{k}, have {len(a)}")
    w = np.empty(k + 1)
    w[0] = a[k]
    if k > 0:
        # coefficient of u^{(j)} is a_{k-j} - a_{k-j+1}
        j = np.arange(1, k + 1)
        w[1:] = a[k - j] - a[k - j + 1]
    return w


def assemble_rhs(table, steps, f_sample, omega3, k):
    """``b^{(k+1)} = a_k u^{(0)} + sum_j (a_{k-j} - a_{k-j+1}) u^{(j)} + omega3 f^{(k+1)}``.

    ``steps`` holds at least ``u^{(0)}..u^{(k)}`` as rows.
    """
    if len(steps) < k + 1:
        raise ValueError(f"history has {len(steps)} steps, need u^(0)..u^({k})")
    u = np.asarray(steps[: k + 1], dtype=float)
    return memory_weights(table.a, k) @ u + omega3 * np.asarray(f_sample, dtype=float)
