"""Toeplitz factors applied through circulant embedding and the FFT."""
import numpy as np

DENSE_SIZE_LIMIT = 4096


def _embedding_length(size):
    n = 1
    while n < 2 * size:
        n *= 2
    return n


class ToeplitzFactor:
    """Toeplitz matrix stored by its first column and first row.

    The spectrum of the circulant embedding is computed once at construction
    and reused by every product.
    """

    def __init__(self, first_column, first_row):
        col = np.array(first_column, dtype=float)
        row = np.array(first_row, dtype=float)
        if col.ndim != 1 or row.ndim != 1 or len(col) != len(row) or len(col) == 0:
            raise ValueError("first_column and first_row must be non-empty 1-D arrays of equal length")
        if col[0] != row[0]:
            raise ValueError(f"first_column[0]={col[0]} differs from first_row[0]={row[0]}")
        col.setflags(write=False)
        row.setflags(write=False)
        self.first_column = col
        self.first_row = row
        self.size = len(col)
        self.embedding_length = _embedding_length(self.size)
        generator = np.zeros(self.embedding_length)
        generator[: self.size] = col
        if self.size > 1:
            generator[-(self.size - 1):] = row[:0:-1]
        self.embedded_spectrum = np.fft.fft(generator)
        self.embedded_spectrum.setflags(write=False)

    def __repr__(self):
        return f"ToeplitzFactor(size={self.size})"

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got shape {v.shape}")
        return v

    def _circulant_product(self, w):
        padded = np.zeros(self.embedding_length, dtype=complex)
        padded[: self.size] = w
        return np.fft.ifft(self.embedded_spectrum * np.fft.fft(padded))[: self.size]

    def apply_mixed(self, v, w):
        """Return ``(G v, G^T w)`` from one complex circulant product.

        Uses ``G^T = J G J`` with ``J`` the reversal: multiplying
        ``v + i J w`` gives ``G v`` in the real part and ``J G^T w`` in the
        imaginary part.
        """
        v = self._check(v)
        w = self._check(w)
        y = self._circulant_product(v + 1j * w[::-1])
        return y.real.copy(), y.imag[::-1].copy()

    def apply_pair(self, v):
        """Return ``(G v, G^T v)`` using a single FFT round trip."""
        return self.apply_mixed(v, v)

    def apply(self, v):
        """Return ``G v``; bit-identical to the first output of :meth:`apply_pair`."""
        return self.apply_pair(v)[0]

    def apply_transpose(self, v):
        return self.apply_pair(v)[1]

    def entry(self, i, j):
        return self.first_column[i - j] if i >= j else self.first_row[j - i]

    def to_dense(self):
        if self.size > DENSE_SIZE_LIMIT:
            raise ValueError(
                f"refusing to materialize a {self.size}x{self.size} Toeplitz matrix "
                f"(limit {DENSE_SIZE_LIMIT})"
            )
        i, j = np.indices((self.size, self.size))
        d = i - j
        return np.where(d >= 0, self.first_column[np.abs(d)], self.first_row[np.abs(d)])


def beta_factor(g_beta, size):
    """Lower-triangular Grunwald factor of order ``size`` (left derivative)."""
    g = np.asarray(g_beta, dtype=float)
    if len(g) < size:
        raise ValueError(f"need {size} weights, got {len(g)}")
    row = np.zeros(size)
    row[0] = g[0]
    return ToeplitzFactor(g[:size], row)


def gamma_factor(g_gamma, size):
    """Lower-Hessenberg shifted Grunwald factor of order ``size``."""
    g = np.asarray(g_gamma, dtype=float)
    if len(g) < size + 1:
        raise ValueError(f"need {size + 1} weights, got {len(g)}")
    row = np.zeros(size)
    row[0] = g[1]
    if size > 1:
        row[1] = g[0]
    return ToeplitzFactor(g[1 : size + 1], row)
