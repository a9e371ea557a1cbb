"""Banded truncation preconditioner and its pivot-free banded LU."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack


class FactorizationError(np.linalg.LinAlgError):
    """Raised when elimination without pivoting meets a vanishing pivot."""


class BandedMatrix:
    """Square band matrix in LAPACK layout: ``bands[upper + i - j, j] = A[i, j]``."""

    def __init__(self, bands, lower, upper):
        bands = np.asarray(bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != lower + upper + 1:
            raise ValueError(
                f"band storage of shape {bands.shape} does not fit lower={lower}, upper={upper}"
            )
        self.bands = bands
        self.lower = lower
        self.upper = upper
        self.size = bands.shape[1]
        # zero the slots that fall outside the matrix
        for o in range(-lower, upper + 1):
            row = upper - o
            if o > 0:
                self.bands[row, :o] = 0.0
            elif o < 0:
                self.bands[row, self.size + o:] = 0.0

    @classmethod
    def zeros(cls, size, lower, upper):
        return cls(np.zeros((lower + upper + 1, size)), lower, upper)

    @classmethod
    def from_dense(cls, a, lower, upper):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        out = cls.zeros(n, lower, upper)
        for o in range(-lower, upper + 1):
            out.set_diagonal(o, np.diagonal(a, o))
        return out

    def diagonal(self, offset):
        """Entries ``A[i, i + offset]``, length ``size - |offset|``."""
        row = self.upper - offset
        if offset >= 0:
            return self.bands[row, offset:]
        return self.bands[row, : self.size + offset]

    def set_diagonal(self, offset, values):
        row = self.upper - offset
        if offset >= 0:
            self.bands[row, offset:] = values
        else:
            self.bands[row, : self.size + offset] = values

    def to_dense(self):
        a = np.zeros((self.size, self.size))
        for o in range(-self.lower, self.upper + 1):
            if abs(o) < self.size:
                a += np.diag(self.diagonal(o), o)
        return a

    def transpose(self):
        out = BandedMatrix.zeros(self.size, self.upper, self.lower)
        for o in range(-self.lower, self.upper + 1):
            if abs(o) < self.size:
                out.set_diagonal(-o, self.diagonal(o))
        return out

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got shape {v.shape}")
        y = np.zeros(self.size)
        for o in range(-self.lower, self.upper + 1):
            if o >= 0 and o < self.size:
                y[: self.size - o] += self.diagonal(o) * v[o:]
            elif o < 0 and -o < self.size:
                y[-o:] += self.diagonal(o) * v[: self.size + o]
        return y

    def row_sums(self):
        return self.matvec(np.ones(self.size))

    def scale_rows(self, d):
        """Return ``diag(d) @ self``."""
        d = np.asarray(d, dtype=float)
        out = BandedMatrix(self.bands.copy(), self.lower, self.upper)
        for o in range(-self.lower, self.upper + 1):
            if abs(o) < self.size:
                if o >= 0:
                    out.set_diagonal(o, self.diagonal(o) * d[: self.size - o])
                else:
                    out.set_diagonal(o, self.diagonal(o) * d[-o:])
        return out

    def widen(self, lower, upper):
        """Copy with at least the given bandwidths."""
        lower, upper = max(lower, self.lower), max(upper, self.upper)
        out = BandedMatrix.zeros(self.size, lower, upper)
        out.bands[upper - self.upper : upper + self.lower + 1] = self.bands
        return out

    def __add__(self, other):
        a = self.widen(other.lower, other.upper)
        b = other.widen(self.lower, self.upper)
        return BandedMatrix(a.bands + b.bands, a.lower, a.upper)

    def __mul__(self, scalar):
        return BandedMatrix(self.bands * scalar, self.lower, self.upper)

    __rmul__ = __mul__


def truncation_bandwidths(ell, size):
    """Band kept by :func:`truncate_factor`: ``ell - 1`` below, ``max(ell - 1, 1)`` above."""
    if ell < 1:
        raise ValueError(f"ell must be at least 1, got {ell}")
    return min(ell - 1, size - 1), min(max(ell - 1, 1), size - 1)


def truncate_factor(factor, ell):
    """Band truncation of a Toeplitz factor with the dropped tail lumped on the diagonal.

    Keeps the main diagonal, ``ell - 1`` subdiagonals and ``max(ell - 1, 1)``
    superdiagonals; for the Grunwald factors this retains ``g_0..g_{ell-1}``
    of the lower-triangular factor and ``g_0..g_ell`` of the shifted one.
    Whatever is dropped from a row is added to that row's diagonal entry, so
    row sums are unchanged. ``ell >= size`` returns the full factor.
    """
    s = factor.size
    lower, upper = truncation_bandwidths(ell, s)
    out = BandedMatrix.zeros(s, lower, upper)
    for o in range(-lower, upper + 1):
        value = factor.first_row[o] if o >= 0 else factor.first_column[-o]
        out.set_diagonal(o, np.full(s - abs(o), value))
    # dropped below the band: column entries at distances lower+1..i in row i
    col_tail = np.concatenate(([0.0], np.cumsum(factor.first_column[lower + 1:])))
    i = np.arange(s)
    dropped = col_tail[np.clip(i - lower, 0, None)]
    # dropped above the band: row entries at distances upper+1..s-1-i in row i
    row_tail = np.concatenate(([0.0], np.cumsum(factor.first_row[upper + 1:])))
    dropped = dropped + row_tail[np.clip(s - 1 - i - upper, 0, None)]
    out.set_diagonal(0, out.diagonal(0) + dropped)
    return out


def banded_lu(p):
    """Doolittle LU without pivoting, confined to the band of ``p``.

    Returns ``(L, U)`` with ``L`` unit lower triangular of bandwidth
    ``p.lower`` and ``U`` upper triangular of bandwidth ``p.upper``. Work is
    O(size * lower * upper).
    """
    n, lo, up = p.size, p.lower, p.upper
    # padded columns absorb updates that run past the last row/column
    work = np.zeros((lo + up + 1, n + up))
    work[:, :n] = p.bands
    scale = np.zeros(n)
    for o in range(-lo, up + 1):
        if abs(o) < n:
            d = np.abs(p.diagonal(o))
            if o >= 0:
                scale[: n - o] = np.maximum(scale[: n - o], d)
            else:
                scale[-o:] = np.maximum(scale[-o:], d)
    di = np.arange(1, lo + 1)[:, None]
    dj = np.arange(1, up + 1)[None, :]
    rows = up + di - dj
    for k in range(n):
        pivot = work[up, k]
        if not abs(pivot) > 1e-14 * scale[k]:
            raise FactorizationError(f"pivot {pivot:.3e} at row {k} is too small to eliminate without pivoting")
        if lo == 0:
            continue
        mult = work[up + 1 :, k] / pivot
        work[up + 1 :, k] = mult
        if up > 0:
            urow = work[up - dj[0], k + dj[0]]
            work[rows, k + dj] -= mult[:, None] * urow[None, :]
    bands = work[:, :n]
    lower_bands = np.zeros((lo + 1, n))
    lower_bands[0] = 1.0
    lower_bands[1:] = bands[up + 1 :]
    upper_bands = bands[: up + 1].copy()
    return BandedMatrix(lower_bands, lo, 0), BandedMatrix(upper_bands, 0, up)


def _solve_triangular(factor, v, uplo, trans, unit):
    if uplo == "U":
        ab, kd = factor.bands, factor.upper
    else:
        # LAPACK lower layout is ab[i - j, j], i.e. the same bands without an upper part
        ab, kd = factor.bands, factor.lower
    x, info = lapack.dtbtrs(ab, np.asarray(v, dtype=float)[:, None], uplo=uplo, trans=trans,
                            diag="U" if unit else "N")
    if info != 0:
        raise FactorizationError(f"triangular band solve failed (info={info})")
    return x[:, 0]


@dataclass(frozen=True)
class BandedPreconditioner:
    ell: int
    p: BandedMatrix
    l_factor: BandedMatrix
    u_factor: BandedMatrix

    @property
    def size(self):
        return self.p.size

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got shape {v.shape}")
        return v

    def apply(self, v):
        """``P v``, equal to ``L (U v)`` up to rounding."""
        return self.p.matvec(self._check(v))

    def apply_inverse(self, v):
        y = _solve_triangular(self.l_factor, self._check(v), "L", "N", unit=True)
        return _solve_triangular(self.u_factor, y, "U", "N", unit=False)

    def apply_transpose_inverse(self, v):
        z = _solve_triangular(self.u_factor, self._check(v), "U", "T", unit=False)
        return _solve_triangular(self.l_factor, z, "L", "T", unit=True)

    def apply_normal_inverse(self, v):
        """``(P^T P)^{-1} v``: solve ``P^T y = v`` then ``P w = y``."""
        return self.apply_inverse(self.apply_transpose_inverse(v))


def apply_inverse(pc, v):
    return pc.apply_inverse(v)


def apply_normal_inverse(pc, v):
    return pc.apply_normal_inverse(v)


def assemble_preconditioner(op, ell):
    """``P = I + w1 (D+ Tb + D- Tb^T) - w2 (E+ Tg + E- Tg^T)`` with truncated factors, factored eagerly."""
    if ell < 1:
        raise ValueError(f"ell must be at least 1, got {ell}")
    tb = truncate_factor(op.g_beta_factor, ell)
    tg = truncate_factor(op.g_gamma_factor, ell)
    w1, w2 = op.scalars.omega1, op.scalars.omega2
    identity = BandedMatrix(np.ones((1, op.size)), 0, 0)
    p = (
        identity
        + w1 * (tb.scale_rows(op.diag_d_plus) + tb.transpose().scale_rows(op.diag_d_minus))
        + (-w2) * (tg.scale_rows(op.diag_e_plus) + tg.transpose().scale_rows(op.diag_e_minus))
    )
    l_factor, u_factor = banded_lu(p)
    pivots = u_factor.diagonal(0)
    if np.any(pivots <= 0):
        k = int(np.argmin(pivots))
        raise FactorizationError(
            f"non-positive pivot {pivots[k]:.3e} at row {k}; "
            "the truncated system is not diagonally dominant (negative coefficient?)"
        )
    return BandedPreconditioner(ell=ell, p=p, l_factor=l_factor, u_factor=u_factor)
