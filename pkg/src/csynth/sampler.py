"""Random row sampling for W = Y^T A.

With theta_i = ||y_i||_inf ||a_i||_inf, L = sum theta_i, pi_i = theta_i / L
and z_i = (L / theta_i) y_i, the matrix W is the pi-average of the rank-one
atoms z_i a_i^T, each of uniform norm exactly L. Averaging k i.i.d. atoms
gives W_k = Y_k^T A_k over at most k distinct rows of A.
"""
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, uniform_norm
from .errors import CapacityError, DegenerateInputError, DimensionError
from .goodness import GoodnessCertificate, certified_s

MAX_N = 4096


def _uniform_magnitude(rows, rtol=1e-12):
    """True when, in every row, all nonzero entries share one magnitude."""
    mags = np.abs(rows)
    top = mags.max(axis=1, keepdims=True)
    nz = mags > 0
    return bool(np.all(~nz | (np.abs(mags - top) <= rtol * top)))


@dataclass(frozen=True)
class RowEnsemble:
    M: int
    n: int
    theta: np.ndarray
    L: float
    pi: np.ndarray
    zrows: np.ndarray  # zero for inactive rows
    arows: np.ndarray
    active: np.ndarray
    W: np.ndarray
    Y: np.ndarray

    @property
    def uniform_atoms(self):
        """Every atom z_i a_i^T has entries in {-L, 0, L}."""
        act = self.active
        return _uniform_magnitude(self.zrows[act]) and _uniform_magnitude(self.arows[act])

    @property
    def uniform_arows(self):
        return _uniform_magnitude(self.arows[self.active])

    def atom(self, i):
        return np.outer(self.zrows[i], self.arows[i])


def build_ensemble(Y, A):
    Y = as_matrix(Y, "Y")
    A = as_matrix(A, "A")
    if Y.shape != A.shape:
        raise DimensionError(f"Y and A shapes differ: {Y.shape} vs {A.shape}")
    M, n = A.shape
    if n > MAX_N:
        raise CapacityError(f"n={n} exceeds the dense W guard n <= {MAX_N}")
    theta = np.max(np.abs(Y), axis=1) * np.max(np.abs(A), axis=1)
    L = float(theta.sum())
    if L == 0.0:
        raise DegenerateInputError("every row has theta_i = 0 (L = 0)")
    active = np.flatnonzero(theta > 0)
    pi = theta / L
    zrows = np.zeros_like(Y)
    zrows[active] = (L / theta[active])[:, None] * Y[active]
    W = Y.T @ A
    for arr in (theta, pi, zrows, active, W):
        arr.flags.writeable = False
    return RowEnsemble(M, n, theta, L, pi, zrows, A, active, W, Y)


@dataclass
class SketchResult:
    selected: np.ndarray  # i_1..i_k
    rows: list  # distinct indices, order of first appearance
    coeff: np.ndarray  # count_i / k, aligned with rows
    Yk: np.ndarray
    Ak: np.ndarray
    Wk: np.ndarray
    err: float

    @property
    def k(self):
        return len(self.selected)

    @property
    def mk(self):
        return len(self.rows)


def draw_indices(e, k, rng):
    """k i.i.d. row indices from pi by inverse CDF over the active rows.

    A draw landing exactly on a CDF boundary goes to the lower index.
    """
    cdf = np.cumsum(e.pi[e.active])
    cdf[-1] = 1.0
    u = rng.uniform(k)
    pos = np.searchsorted(cdf, u, side="left")
    return e.active[pos]


def assemble(e, selected):
    selected = np.asarray(selected, dtype=np.int64)
    k = len(selected)
    rows, first = np.unique(selected, return_index=True)
    order = np.argsort(first, kind="stable")
    rows = rows[order]
    counts = np.bincount(selected, minlength=e.M)[rows]
    coeff = counts / k
    Yk = coeff[:, None] * e.zrows[rows]
    Ak = e.arows[rows]
    Wk = Yk.T @ Ak
    return SketchResult(selected, [int(r) for r in rows], coeff, Yk, Ak, Wk, uniform_norm(Wk - e.W))


def sample_sketch(e, k, rng):
    if k < 1:
        raise ValueError("k must be >= 1")
    return assemble(e, draw_indices(e, k, rng))


def sketch_certificate(s, mu=None):
    """Goodness certificate from a sketch: mu_cert = ||I - W_k||_inf computed
    directly (``mu``, the certified level of the full W, is not used)."""
    n1, n2 = s.Wk.shape
    if n1 != n2:
        raise DimensionError("W_k must be square for a goodness certificate")
    mu_cert = uniform_norm(np.eye(n1) - s.Wk)
    return GoodnessCertificate(s.Yk, mu_cert, certified_s(mu_cert), False, rows=list(s.rows))


def sketch_mean_bound(L, n, k):
    """2 L k^-1/2 sqrt(2 ln(2 n^2)): bound on E||W_k - W||_inf."""
    return 2.0 * L * np.sqrt(2.0 * np.log(2.0 * n * n) / k)


def sketch_event_threshold(L, n, k):
    """4 L k^-1/2 sqrt(2 ln(2 n^2)): reached with probability >= 1/2."""
    return 2.0 * sketch_mean_bound(L, n, k)
