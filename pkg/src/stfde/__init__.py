"""Preconditioned Krylov solvers for space-time fractional advection-diffusion equations."""
from .grunwald import FractionalOrders, GrunwaldTable, space_weights, time_weights
from .krylov import IterationRecord, SolverConfig, cgnr, gmres_restarted
from .operator import SchemeScalars, StfdeOperator, assemble_operator, assemble_rhs
from .preconditioner import (
    BandedMatrix,
    BandedPreconditioner,
    assemble_preconditioner,
    banded_lu,
    truncate_factor,
)
from .problem import Grid, StfdeProblem, constant_problem, example1, sample_fields
from .timestepper import SolutionHistory, SolveReport, march, stability_probe, sup_error
from .toeplitz import ToeplitzFactor, beta_factor, gamma_factor

__version__ = "0.1.0"
