"""Certified bounds on the factorization norm

    ||A|| = min { max_ij (P P^T)_ii, (Q Q^T)_jj : A = P Q^T }

and rank lower bounds for uniform-norm approximation.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, spectral_norm, uniform_norm
from .errors import IterationLimitError, PreconditionError
from .gaussian import factor_via_svd

CORRIDOR_SLACK = 1e-10
PSD_RTOL = 1e-8
FACTOR_MAX_DIM = 128


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float
    upper_source: str  # spectral | rows | cols | factor | psd

    @property
    def corridor_ok(self):
        return self.lower <= self.upper + CORRIDOR_SLACK


def is_psd(A, tol=None):
    """Exact symmetry, then smallest eigenvalue >= -tol (default 1e-8 ||A||_inf)."""
    A = np.asarray(A, dtype=np.float64)
    if A.shape[0] != A.shape[1] or not np.array_equal(A, A.T):
        return False
    if tol is None:
        tol = PSD_RTOL * uniform_norm(A)
    return bool(np.linalg.eigvalsh(A)[0] >= -tol)


def norm_bounds(A, tol=1e-10):
    A = as_matrix(A, "A")
    lower = uniform_norm(A)
    if is_psd(A):
        return NormBounds(lower, lower, "psd")
    cands = [
        (float(np.sqrt(np.max(np.einsum("ij,ij->i", A, A)))), "rows"),
        (float(np.sqrt(np.max(np.einsum("ij,ij->j", A, A)))), "cols"),
    ]
    try:
        cands.insert(0, (spectral_norm(A, tol), "spectral"))
    except IterationLimitError:
        pass  # the estimate undershoots sigma_max, so it is no upper bound
    if min(A.shape) <= FACTOR_MAX_DIM:
        try:
            cands.append((factor_via_svd(A).D, "factor"))
        except IterationLimitError:
            pass
    upper, source = min(cands, key=lambda c: c[0])
    return NormBounds(lower, max(upper, lower), source)


def norm_upper_from_factor(f):
    """(max Euclidean row norm over P and Q)^2, an upper bound on ||P Q^T||."""
    return f.row_norm_sq()


def identity_rank_lb(n, k):
    """1/(2 sqrt(k)): no rank-k matrix is closer to I_n in the uniform norm,
    valid when n >= 2k."""
    if k < 1 or n < 1:
        raise ValueError("n and k must be positive")
    if n < 2 * k:
        raise PreconditionError(f"bound needs n >= 2k, got n={n}, k={k}")
    return 1.0 / (2.0 * math.sqrt(k))


def identity_rank_lb_sharp(m_k):
    """Same bound in terms of the number of distinct rows actually used."""
    return 1.0 / (2.0 * math.sqrt(m_k))


def hadamard_rank_lb(n, k):
    """sqrt(1 - k/n) for rank-k approximations of an n x n Hadamard matrix."""
    if n < 1 or n & (n - 1):
        raise PreconditionError(f"n={n} is not a power of two")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k >= n:
        raise PreconditionError(f"bound needs k < n, got k={k}, n={n}")
    return math.sqrt(1.0 - k / n)
