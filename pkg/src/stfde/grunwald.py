"""Fractional difference weights.

Time weights come from the L1-type discretization of the Caputo derivative;
space weights are the (shifted) Grunwald coefficients of the left and right
Riemann-Liouville derivatives.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FractionalOrders:
    """Orders of the time derivative and the two space derivatives."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not 1.0 < self.gamma <= 2.0:
            raise ValueError(f"gamma must lie in (1, 2], got {self.gamma}")


def time_weights(alpha, n):
    """Return ``a_j = (j+1)**(1-alpha) - j**(1-alpha)`` for ``j = 0..n-1``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    p = np.arange(n + 1, dtype=float) ** (1.0 - alpha)
    # j**(1 - alpha) at j = 0 is 0, also for alpha = 1 where numpy gives 0**0 = 1
    p[0] = 0.0
    a = np.diff(p)
    a.setflags(write=False)
    return a


def space_weights(order, count):
    """Grunwald weights ``g_j = (-1)**j * binom(order, j)`` for ``j < count``.

    Uses the multiplicative recurrence ``g_j = g_{j-1} (j - 1 - order) / j``,
    which never forms factorials.
    """
    if order <= 0:
        raise ValueError(f"order must be positive, got {order}")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    j = np.arange(1, count, dtype=float)
    g = np.empty(count)
    g[0] = 1.0
    g[1:] = np.cumprod((j - 1.0 - order) / j)
    g.setflags(write=False)
    return g


@dataclass(frozen=True)
class GrunwaldTable:
    """All weights needed to march a grid with ``m`` intervals and ``n`` steps.

    ``a`` holds ``a_0..a_{n-1}``, enough for the memory term of every step;
    ``g_beta`` has ``m`` entries and ``g_gamma`` has ``m + 1``.
    """

    orders: FractionalOrders
    a: np.ndarray
    g_beta: np.ndarray
    g_gamma: np.ndarray

    @classmethod
    def build(cls, orders, m, n):
        return cls(
            orders=orders,
            a=time_weights(orders.alpha, n),
            g_beta=space_weights(orders.beta, m),
            g_gamma=space_weights(orders.gamma, m + 1),
        )
