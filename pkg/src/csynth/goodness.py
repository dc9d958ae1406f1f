"""Certification of s-goodness.

A matrix A_m (m x n) is s-good whenever some Y_m gives
||I_n - Y_m^T A_m||_inf < 1/(2s). Every certificate here carries its
witness Y_m and the achieved value recomputed from it, so a suboptimal
solver can only make the certified level conservative, never wrong.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .core import uniform_norm
from .errors import DimensionError, ValidationError
from .hadamard import character_exponent

UNBOUNDED = math.inf


def certified_s(mu):
    """Largest integer s with mu < 1/(2s); 0 when mu >= 1/2; inf when mu == 0."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if mu == 0:
        return UNBOUNDED
    s = max(int(math.floor(1.0 / (2.0 * mu))), 0)
    while s > 0 and not (2.0 * s * mu < 1.0):
        s -= 1
    while 2.0 * (s + 1) * mu < 1.0:
        s += 1
    return s


@dataclass
class GoodnessCertificate:
    witness: np.ndarray  # Y_m, m x n
    mu: float
    s_max: float  # int, or inf when mu == 0
    exact: bool
    rows: Optional[list] = None
    per_i: Optional[np.ndarray] = field(default=None, repr=False)

    def recompute_mu(self, A_m):
        n = np.asarray(A_m).shape[1]
        return uniform_norm(np.eye(n) - self.witness.T @ np.asarray(A_m))


class LinfResult(NamedTuple):
    y: np.ndarray
    value: float
    converged: bool


def _lp_tolerance(tol):
    return float(min(max(0.1 * tol, 1e-10), 1e-7))


IPM_MIN_VARS = 200


def _linf_lp(B, c, tol):
    n, m = B.shape
    ones = np.ones((n, 1))
    A_ub = np.block([[-B, -ones], [B, -ones]])
    b_ub = np.concatenate([-c, c])
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    ftol = _lp_tolerance(tol)
    res = linprog(
        cost,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * m + [(0, None)],
        # interior point with crossover is several times faster on wide problems
        method="highs-ipm" if m >= IPM_MIN_VARS else "highs-ds",
        options={"primal_feasibility_tolerance": ftol, "dual_feasibility_tolerance": ftol},
    )
    if res.x is None:
        return np.zeros(m), False
    return res.x[:m], res.status == 0


def _linf_smooth(B, c, tol, max_stages=80, max_iter=5000):
    """Smoothed surrogate: minimize V_beta(c - B y) by restarted FISTA,
    halving beta per stage until beta ln(2n) < tol."""
    n, m = B.shape
    lg = math.log(2.0 * n)
    y = np.zeros(m)
    best_y, best = y.copy(), uniform_norm(c)
    if best == 0.0:
        return best_y, True
    row2 = float(np.max(np.einsum("ij,ij->i", B, B)))
    if row2 == 0.0:
        return best_y, True
    beta = best / lg
    inner_ok = False
    for stage in range(max_stages):
        lip = row2 / beta
        x_prev = y.copy()
        w = y.copy()
        theta = 1.0
        f_prev = math.inf
        inner_ok = False
        for _ in range(max_iter):
            f, g = kernels.potential_value_grad(c - B @ w, beta)
            grad = -(B.T @ g)
            x = w - grad / lip
            fx = kernels.potential_value(c - B @ x, beta)
            if fx > f_prev:
                # adaptive restart
                theta = 1.0
                w = x_prev.copy()
                f_prev = math.inf
                continue
            theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            w = x + ((theta - 1.0) / theta_next) * (x - x_prev)
            theta = theta_next
            x_prev = x
            f_prev = fx
            val = uniform_norm(c - B @ x)
            if val < best:
                best, best_y = val, x.copy()
            gnorm = float(np.linalg.norm(grad))
            if gnorm * (1.0 + float(np.linalg.norm(x))) <= 0.1 * tol:
                inner_ok = True
                break
        y = x_prev
        if beta * lg < tol:
            return best_y, inner_ok
        beta = min(beta, best / lg) * 0.5
    return best_y, False


def linf_regression(B, c, tol=1e-8, method="lp"):
    """Minimize ||c - B y||_inf over y.

    ``method="lp"`` solves the equivalent linear program with HiGHS;
    ``method="smooth"`` runs the staged smoothed-gradient scheme.
    The returned value is always the exact inf-norm residual at the returned
    y, hence an upper bound on the optimum.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    B = np.asarray(B, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if B.ndim != 2 or c.shape != (B.shape[0],):
        raise DimensionError(f"incompatible shapes {B.shape} and {c.shape}")
    m = B.shape[1]
    if not np.any(c):
        return LinfResult(np.zeros(m), 0.0, True)
    if not np.any(B):
        return LinfResult(np.zeros(m), uniform_norm(c), True)
    if method == "lp":
        y, ok = _linf_lp(B, c, tol)
    elif method == "smooth":
        y, ok = _linf_smooth(B, c, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return LinfResult(y, uniform_norm(c - B @ y), ok)


def opt_certificate(A_m, tol=1e-8, shortcut=False, method="lp"):
    """Certificate for min_Y ||I - Y^T A_m||_inf.

    Without ``shortcut`` the n problems min_y ||e_i - A_m^T y||_inf are
    solved one by one. With ``shortcut`` the rows must be rows of a
    Sylvester Hadamard matrix (checked); only the problem for the group
    identity (column 0) is solved and the other witness columns follow by
    the character shift y_g = y_0 * A_m[:, g].
    """
    A_m = np.asarray(A_m, dtype=np.float64)
    if A_m.ndim != 2 or A_m.size == 0:
        raise DimensionError("A_m must be a nonempty 2-D array")
    m, n = A_m.shape
    if m > n:
        raise DimensionError(f"expected m <= n, got {A_m.shape}")
    B = A_m.T
    if shortcut:
        character_exponent(A_m)
        e0 = np.zeros(n)
        e0[0] = 1.0
        y0, value, ok = linf_regression(B, e0, tol, method)
        witness = y0[:, None] * A_m
        mu = value
        per_i = None
    else:
        witness = np.empty((m, n))
        per_i = np.empty(n)
        ok = True
        e = np.zeros(n)
        for i in range(n):
            e[i] = 1.0
            y, per_i[i], conv = linf_regression(B, e, tol, method)
            e[i] = 0.0
            witness[:, i] = y
            ok = ok and conv
        mu = float(per_i.max())
    return GoodnessCertificate(witness, mu, certified_s(mu), bool(ok), per_i=per_i)


def reoptimize(A_m, tol=1e-8, shortcut=False, method="lp"):
    """Re-derive the best witness for the current submatrix (same contract
    as :func:`opt_certificate`)."""
    return opt_certificate(A_m, tol, shortcut, method)


def mutual_incoherence(B):
    """mu(B) = max_{i != j} |b_i^T b_j| / b_i^T b_i over columns b_i, and the
    largest s with s < (1 + mu) / (2 mu) (inf when mu == 0)."""
    B = np.asarray(B, dtype=np.float64)
    G = B.T @ B
    diag = np.diag(G).copy()
    if np.any(diag == 0.0):
        raise ValidationError("mutual incoherence needs nonzero columns")
    R = np.abs(G) / diag[:, None]
    np.fill_diagonal(R, 0.0)
    mu = float(R.max()) if R.size > 1 else 0.0
    if mu == 0.0:
        return 0.0, UNBOUNDED
    s = max(int(math.floor((1.0 + mu) / (2.0 * mu))), 0)
    while s > 0 and not (2.0 * mu * s < 1.0 + mu):
        s -= 1
    while 2.0 * mu * (s + 1) < 1.0 + mu:
        s += 1
    return mu, s


def first_appearances(order):
    seen = set()
    out = []
    for i in order:
        i = int(i)
        if i not in seen:
            seen.add(i)
            out.append(i)
    return out


def certification_ranks(A, order, s_values, tol=1e-8, shortcut=False):
    """Smallest prefix size m of the distinct rows in ``order`` whose
    submatrix certifies each s in ``s_values`` (None if even the full prefix
    fails).

    Opt(A_m) can only decrease as rows are appended, so each level is found
    by bisection over prefix lengths, reusing the prefixes solved so far.
    """
    A = np.asarray(A, dtype=np.float64)
    rows = first_appearances(order)
    cache = {}

    def mu_at(m):
        if m not in cache:
            cache[m] = opt_certificate(A[rows[:m]], tol, shortcut).mu
        return cache[m]

    out = {}
    total = len(rows)
    for s in sorted(s_values):
        target = 1.0 / (2.0 * s)
        if total == 0 or not mu_at(total) < target:
            out[s] = None
            continue
        # tighten the bracket with prefixes already solved for other levels
        lo = max([m for m, v in cache.items() if not v < target], default=0)
        hi = min(m for m, v in cache.items() if v < target)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if mu_at(mid) < target:
                hi = mid
            else:
                lo = mid
        out[s] = hi
    return out
