"""Sylvester Hadamard matrices H_nu of order 2**nu."""
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError

MAX_NU = 14


@dataclass(frozen=True)
class HadamardMatrix:
    nu: int
    matrix: np.ndarray

    @property
    def order(self):
        return 1 << self.nu


def build_hadamard(nu):
    """H_0 = [1], H_{s+1} = [[H_s, H_s], [H_s, -H_s]]."""
    if int(nu) != nu or nu < 0:
        raise ValueError("nu must be a nonnegative integer")
    nu = int(nu)
    if nu > MAX_NU:
        raise CapacityError(f"nu={nu} exceeds the memory guard nu <= {MAX_NU}")
    H = np.ones((1, 1))
    for _ in range(nu):
        H = np.block([[H, H], [H, -H]])
    H.flags.writeable = False
    return HadamardMatrix(nu, H)


def hadamard_certificate(h):
    """Y = 2^-nu H_nu, for which Y^T H_nu = I exactly."""
    Y = h.matrix / float(h.order)
    Y.flags.writeable = False
    return Y


def hadamard_rows(nu, rows):
    """Rows of H_nu by index, entry (r, g) = (-1)^popcount(r & g)."""
    rows = np.asarray(rows, dtype=np.int64)
    n = 1 << nu
    g = np.arange(n, dtype=np.int64)
    bits = rows[:, None] & g[None, :]
    parity = np.zeros(bits.shape, dtype=np.int64)
    for b in range(nu):
        parity ^= (bits >> b) & 1
    return 1.0 - 2.0 * parity


def character_exponent(A):
    """Identify each row of ``A`` as a character of (Z_2)^nu.

    Returns the row indices r into H_nu (so ``A[i] == hadamard_rows(nu, r)[i]``)
    or raises :class:`ValidationError` when some row is not a +-1 character
    in the natural column order.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if not np.all(np.abs(A) == 1.0):
        raise ValidationError("Hadamard shortcut needs a +-1 matrix")
    nu = n.bit_length() - 1
    if n != 1 << nu:
        raise ValidationError(f"column count {n} is not a power of two")
    idx = np.zeros(m, dtype=np.int64)
    for b in range(nu):
        idx |= (A[:, 1 << b] < 0).astype(np.int64) << b
    if not np.array_equal(hadamard_rows(nu, idx), A):
        raise ValidationError("rows are not rows of the Sylvester Hadamard matrix")
    return idx
