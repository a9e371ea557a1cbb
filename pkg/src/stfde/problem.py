"""Problem definitions: coefficient fields, source, initial data, grids."""
from dataclasses import dataclass
from math import gamma as gamma_fn
from typing import Callable, Optional

import numpy as np

from .grunwald import FractionalOrders

Field = Callable[[np.ndarray, float], np.ndarray]


def _zero_field(x, t):
    return np.zeros_like(x, dtype=float)


@dataclass(frozen=True)
class StfdeProblem:
    """Space-time fractional advection-diffusion problem on ``(a, b) x (0, T]``.

    Coefficient and source fields take a vector of nodes and a scalar time and
    must be vectorized over ``x``. Boundary values are homogeneous Dirichlet.
    """

    orders: FractionalOrders
    a: float
    b: float
    T: float
    d_plus: Field = _zero_field
    d_minus: Field = _zero_field
    e_plus: Field = _zero_field
    e_minus: Field = _zero_field
    source: Field = _zero_field
    initial: Callable[[np.ndarray], np.ndarray] = lambda x: np.zeros_like(x, dtype=float)
    exact: Optional[Field] = None
    name: str = "custom"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")


@dataclass(frozen=True)
class Grid:
    m: int
    n: int
    a: float = 0.0
    b: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"need at least 2 spatial intervals, got m={self.m}")
        if self.n < 1:
            raise ValueError(f"need at least 1 time step, got n={self.n}")

    @classmethod
    def for_problem(cls, problem, m, n):
        return cls(m=m, n=n, a=problem.a, b=problem.b, T=problem.T)

    @property
    def h(self):
        return (self.b - self.a) / self.m

    @property
    def tau(self):
        return self.T / self.n

    @property
    def nodes(self):
        return self.a + self.h * np.arange(self.m + 1)

    @property
    def interior(self):
        return self.nodes[1:-1]

    def time(self, k):
        return k * self.tau


@dataclass(frozen=True)
class DiagonalCoefficients:
    """Coefficient diagonals and source sampled at the interior nodes."""

    d_plus: np.ndarray
    d_minus: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    source: np.ndarray


def _sample(field, x, t):
    return np.broadcast_to(np.asarray(field(x, t), dtype=float), x.shape).copy()


def sample_fields(problem, grid, k):
    """Sample ``d_+, d_-, e_+, e_-`` and ``f`` at interior nodes at time ``t_k``."""
    if not 0 <= k <= grid.n:
        raise ValueError(f"time index {k} outside 0..{grid.n}")
    x = grid.interior
    t = grid.time(k)
    diagonals = {}
    for name in ("d_plus", "d_minus", "e_plus", "e_minus"):
        values = _sample(getattr(problem, name), x, t)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            i = int(np.argmin(np.where(np.isfinite(values), values, -np.inf)))
            raise ValueError(
                f"coefficient {name} is negative or non-finite at x={x[i]:.6g}, t={t:.6g}"
            )
        diagonals[name] = values
    return DiagonalCoefficients(source=_sample(problem.source, x, t), **diagonals)


def initial_vector(problem, grid):
    x = grid.interior
    return np.broadcast_to(np.asarray(problem.initial(x), dtype=float), x.shape).copy()


def _example1_source(x, t):
    g = gamma_fn
    c3 = g(4) / g(3.4) - g(4) / g(2.2)
    c4 = 3 * g(5) / g(4.4) - 3 * g(5) / g(3.2)
    c5 = 3 * g(6) / g(5.4) - 3 * g(6) / g(4.2)
    c6 = g(7) / g(6.4) - g(7) / g(5.2)
    y = 1.0 - x
    space = (
        c3 * (x**3 + y**3)
        - c4 * (x**4 + y**4)
        + c5 * (x**5 + y**5)
        - c6 * (x**6 + y**6)
    )
    return np.exp(t) * (6 * (1 + t) * space + x**3 * y**3)


def example1():
    """Variable-coefficient benchmark with ``u(x, t) = e^t x^3 (1-x)^3``.

    The source is the closed-form expression published with the benchmark,
    kept verbatim so reported errors can be reproduced.
    """
    return StfdeProblem(
        orders=FractionalOrders(alpha=0.8, beta=0.6, gamma=1.8),
        a=0.0,
        b=1.0,
        T=1.0,
        d_plus=lambda x, t: 6 * (1 + t) * x**0.6,
        d_minus=lambda x, t: 6 * (1 + t) * (1 - x) ** 0.6,
        e_plus=lambda x, t: 6 * (1 + t) * x**1.8,
        e_minus=lambda x, t: 6 * (1 + t) * (1 - x) ** 1.8,
        source=_example1_source,
        initial=lambda x: x**3 * (1 - x) ** 3,
        exact=lambda x, t: np.exp(t) * x**3 * (1 - x) ** 3,
        name="example1",
    )


def constant_problem(
    alpha=0.8,
    beta=0.6,
    gamma=1.8,
    d_plus=0.0,
    d_minus=0.0,
    e_plus=1.0,
    e_minus=1.0,
    source=0.0,
    a=0.0,
    b=1.0,
    T=1.0,
    initial="bump",
):
    """Constant-coefficient problem with a constant source.

    ``initial`` is ``"bump"`` for ``x^3 (1-x)^3`` rescaled to ``(a, b)`` or
    ``"zero"``. No exact solution is attached.
    """
    for label, value in (("d_plus", d_plus), ("d_minus", d_minus),
                         ("e_plus", e_plus), ("e_minus", e_minus)):
        if value < 0:
            raise ValueError(f"coefficient {label} must be non-negative, got {value}")
    if initial == "bump":
        def phi(x):
            s = (x - a) / (b - a)
            return s**3 * (1 - s) ** 3
    elif initial == "zero":
        def phi(x):
            return np.zeros_like(x, dtype=float)
    else:
        raise ValueError(f"unknown initial profile {initial!r}")

    def const(value):
        return lambda x, t: np.full_like(x, value, dtype=float)

    return StfdeProblem(
        orders=FractionalOrders(alpha=alpha, beta=beta, gamma=gamma),
        a=a,
        b=b,
        T=T,
        d_plus=const(d_plus),
        d_minus=const(d_minus),
        e_plus=const(e_plus),
        e_minus=const(e_minus),
        source=const(source),
        initial=phi,
        name="constant",
    )


BUILTIN_PROBLEMS = {"example1": example1, "constant": constant_problem}
