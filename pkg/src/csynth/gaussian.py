"""Gaussian rank-k approximation from a factorization A = P Q^T.

With xi_1..xi_k standard normal in R^d, A_k = (1/k) sum (P xi_i)(Q xi_i)^T
is unbiased, and if every row of P and Q has squared norm at most D then
||A_k - A||_inf <= sqrt(8 ln(4mn)) D / sqrt(k) with probability >= 1/2.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import as_matrix, gaussian_vector, uniform_norm
from .errors import CapacityError, DimensionError, IterationLimitError, ValidationError

MAX_ENTRIES = 1 << 26
JACOBI_TOL = 1e-10
MAX_SWEEPS = 60


@dataclass(frozen=True)
class FactorPair:
    P: np.ndarray  # m x d
    Q: np.ndarray  # n x d
    D: float

    @property
    def d(self):
        return self.P.shape[1]

    def row_norm_sq(self):
        rp = np.einsum("ij,ij->i", self.P, self.P)
        rq = np.einsum("ij,ij->i", self.Q, self.Q)
        return float(max(rp.max(initial=0.0), rq.max(initial=0.0)))

    def matrix(self):
        return self.P @ self.Q.T


def make_factor_pair(P, Q, D=None):
    """Validate a user factorization; ``D`` defaults to the tightest value."""
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise DimensionError(f"inner dimensions differ: {P.shape} vs {Q.shape}")
    f = FactorPair(P, Q, 0.0)
    actual = f.row_norm_sq()
    if D is None:
        return FactorPair(P, Q, actual)
    if D < 0 or math.sqrt(actual) > math.sqrt(D) + 1e-12:
        raise ValidationError(f"row norms exceed the claimed bound: max squared norm {actual!r} > D={D!r}")
    return FactorPair(P, Q, float(D))


@dataclass(frozen=True)
class RankKFactor:
    """scale * sum_i left_i right_i^T; left is k x m, right is k x n."""

    left: np.ndarray
    right: np.ndarray
    k: int
    scale: float

    @property
    def shape(self):
        return self.left.shape[1], self.right.shape[1]

    def matrix(self):
        m, n = self.shape
        if m * n > MAX_ENTRIES:
            raise CapacityError(f"{m}x{n} approximation exceeds the guard of {MAX_ENTRIES} entries")
        return self.scale * (self.left.T @ self.right)


def _jacobi_svd(A, tol, max_sweeps):
    """Thin SVD of a tall A (m >= n) by one-sided Jacobi: (U, s, V)."""
    G = np.array(A, dtype=np.float64, order="F")
    n = G.shape[1]
    V = np.eye(n, order="F")
    sweeps, ok = kernels.jacobi_sweeps(G, V, tol, max_sweeps)
    if not ok:
        raise IterationLimitError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps", None)
    s = np.sqrt(np.einsum("ij,ij->j", G, G))
    U = np.zeros_like(G)
    nz = s > 0
    U[:, nz] = G[:, nz] / s[nz]
    return U, s, V


def factor_via_svd(A, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Balanced factorization P = U S^1/2, Q = V S^1/2 of A = U S V^T.

    Every squared row norm of P or Q is a convex combination of singular
    values, so D <= sigma_max(A).
    """
    A = as_matrix(A, "A")
    m, n = A.shape
    if m >= n:
        U, s, V = _jacobi_svd(A, tol, max_sweeps)
    else:
        V, s, U = _jacobi_svd(A.T, tol, max_sweeps)
    keep = s > 0
    root = np.sqrt(s[keep])
    P = U[:, keep] * root
    Q = V[:, keep] * root
    if not keep.any():
        P = np.zeros((m, 1))
        Q = np.zeros((n, 1))
    f = FactorPair(P, Q, 0.0)
    return FactorPair(P, Q, f.row_norm_sq())


def gaussian_rank_k(f, k, rng):
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)
    Xi = np.stack([gaussian_vector(rng, f.d) for _ in range(k)])
    return RankKFactor(left=Xi @ f.P.T, right=Xi @ f.Q.T, k=k, scale=1.0 / k)


def approx_error(f, A):
    A = np.asarray(A, dtype=np.float64)
    if A.shape != f.shape:
        raise DimensionError(f"approximation is {f.shape}, matrix is {A.shape}")
    return uniform_norm(f.matrix() - A)


def deviation_bound(m, n, k, D):
    """sqrt(8 ln(4mn)) D / sqrt(k)."""
    return math.sqrt(8.0 * math.log(4.0 * m * n)) * D / math.sqrt(k)


def suggested_rank(m, n):
    """ceil(8 ln(4mn)): the rank at which the bound above drops to D."""
    return int(math.ceil(8.0 * math.log(4.0 * m * n)))
