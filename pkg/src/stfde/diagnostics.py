"""Dense spectra and condition numbers of the unpreconditioned and preconditioned systems."""
from dataclasses import dataclass

import numpy as np

from .grunwald import GrunwaldTable
from .operator import assemble_operator
from .preconditioner import assemble_preconditioner

DIAGNOSTICS_SIZE_LIMIT = 1024

MATRIX_TAGS = ("A", "PinvA", "AtA", "PtPinvAtA")


@dataclass
class SpectrumDiagnostics:
    m: int
    n: int
    ell: int
    k: int
    condition_numbers: dict
    eigenvalues: dict

    def summary(self):
        return {"m": self.m, "n": self.n, "ell": self.ell, "k": self.k,
                **{f"cond_{tag}": self.condition_numbers[tag] for tag in MATRIX_TAGS}}


def spectrum_diagnostics(problem, grid, ell=8, k=1):
    """Materialize ``A = I + A^{(k)}`` and ``P_ell^{(k)}`` and analyse four matrices.

    The matrices are ``A``, ``P^{-1} A``, ``A^T A`` and ``(P^T P)^{-1} A^T A``;
    condition numbers are 2-norm (ratio of extreme singular values).
    """
    if grid.m > DIAGNOSTICS_SIZE_LIMIT:
        raise ValueError(f"diagnostics are dense; m={grid.m} exceeds {DIAGNOSTICS_SIZE_LIMIT}")
    table = GrunwaldTable.build(problem.orders, grid.m, grid.n)
    op = assemble_operator(problem, grid, table, k)
    a = op.to_dense()
    pc = assemble_preconditioner(op, ell)
    p = pc.p.to_dense()
    ata = a.T @ a
    matrices = {
        "A": a,
        "PinvA": np.linalg.solve(p, a),
        "AtA": ata,
        "PtPinvAtA": np.linalg.solve(p.T @ p, ata),
    }
    return SpectrumDiagnostics(
        m=grid.m,
        n=grid.n,
        ell=ell,
        k=k,
        condition_numbers={tag: float(np.linalg.cond(mat)) for tag, mat in matrices.items()},
        eigenvalues={tag: np.linalg.eigvals(mat) for tag, mat in matrices.items()},
    )
