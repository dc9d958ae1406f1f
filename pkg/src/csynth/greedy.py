"""Derandomized row selection.

The engine keeps S_k = sum_j (v_j a_{l_j}^T - W) and requires every step to
satisfy

    V_{beta_{k+1}}(S_{k+1}) <= V_{beta_k}(S_k) + delta_k,   delta_k <= 2 L^2 / beta_k,

which yields ||S_k||_inf <= beta_k ln(2 n^2) + sum delta and hence, for the
fixed gain sequence with horizon k,
||Y_k^T A_k - I||_inf <= mu + 2 L sqrt(2 ln(2 n^2) / k).

Policies:

* ``blind``  draw the next row from pi (the random sampler, run through the
             same bookkeeping)
* ``a``      scan rows for <grad V(S_k), z_i a_i^T - W> <= 0 (first hit or best value)
* ``aprime`` test rows drawn from pi until that inequality holds
* ``b``      per row, minimize V(S_k + t z_i a_i^T - W) over t >= 0
* ``c``      per row, minimize V(S_k + u a_i^T - W) over u in R^n
* ``joint``  policy ``b`` with beta also minimized in beta ln(2d) + V_beta(.)

When every atom z_i a_i^T has entries in {-L, 0, L} (e.g. Hadamard input)
the per-row problems of ``a`` (best), ``b`` and ``c`` have closed forms in a
handful of sign-pattern sums, computed for all rows at once by matrix
products. The chosen step is always re-evaluated exactly before the step
condition is checked.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .core import RandomSource, uniform_norm
from .gaussian import RankKFactor
from .goodness import certified_s, first_appearances, reoptimize
from .hadamard import character_exponent
from .potential import BetaSchedule, beta_at, potential, v_beta_value_grad
from .sampler import build_ensemble, draw_indices

CONDITION_SLACK = 1e-9
MAX_SCALAR_ITER = 200
POLICIES = ("blind", "a", "aprime", "b", "c", "joint")


@dataclass(frozen=True)
class GreedyState:
    S: np.ndarray
    k: int
    beta: float
    value: float  # V_beta(S)
    deltasum: float
    budget: float  # sum of 2 L^2 / beta_l over the steps taken
    picks: tuple = ()
    schedule: Optional[BetaSchedule] = None
    last_delta: float = 0.0
    fallback: bool = False  # last step fell back to policy A's scan


@dataclass(frozen=True)
class CoordinateEquation:
    """g(u) = sum_l gamma_l sinh(alpha_l + gamma_l u) for one row j of S_k - W."""

    alpha: np.ndarray
    gamma: np.ndarray

    def residual(self, u):
        return float(np.sum(self.gamma * np.sinh(self.alpha + self.gamma * u)))

    def solve(self, tol=1e-8):
        """Root of g; 0 when every gamma_l vanishes."""
        B = np.asarray(self.alpha, dtype=np.float64)[None, :]
        gamma = np.asarray(self.gamma, dtype=np.float64)
        if not np.any(gamma):
            return 0.0
        return float(kernels.coord_roots(B, gamma, 1.0, tol, MAX_SCALAR_ITER)[0])


def init_state(e, schedule):
    n = e.n
    return GreedyState(
        S=np.zeros((n, n)),
        k=0,
        beta=beta_at(schedule, 0),
        value=0.0,
        deltasum=0.0,
        budget=0.0,
        picks=(),
        schedule=schedule,
    )


def make_schedule(kind, e, horizon=None):
    return BetaSchedule(kind, e.L, e.n * e.n, horizon)


def _next_beta(state):
    return beta_at(state.schedule, state.k + 1)


def _advance(state, e, i, v, beta_next=None):
    """Apply S <- S + v a_i^T - W and record the potential change."""
    if beta_next is None:
        beta_next = _next_beta(state)
    S = state.S + np.outer(v, e.arows[i]) - e.W
    value = potential(S, beta_next)
    delta = value - state.value
    return GreedyState(
        S=S,
        k=state.k + 1,
        beta=beta_next,
        value=value,
        deltasum=state.deltasum + delta,
        budget=state.budget + 2.0 * e.L**2 / state.beta,
        picks=state.picks + ((int(i), np.array(v, dtype=np.float64)),),
        schedule=state.schedule,
        last_delta=delta,
    )


def condition_holds(prev, new, L):
    return new.last_delta <= 2.0 * L**2 / prev.beta + CONDITION_SLACK


# --- policy A ---------------------------------------------------------------

def _scores(state, e):
    """<grad V_beta(S), z_i a_i^T - W> for all active rows."""
    _, G = v_beta_value_grad(state.S, state.beta)
    gw = float(np.sum(G * e.W))
    act = e.active
    return np.einsum("ij,ij->i", e.zrows[act] @ G, e.arows[act]) - gw


def _sign_aggregates(X, beta, e):
    """Sums for the {-L, 0, L}-atom fast path: returns (m, alpha, gamma, z0)
    such that sum cosh((X + t z_i a_i^T)/beta) =
    e^m/2 (alpha_i e^u + gamma_i e^-u + z0_i) with u = t L / beta."""
    x = X / beta
    m = float(np.max(np.abs(x)))
    ep = np.exp(x - m)
    em = np.exp(-x - m)
    cp = ep + em
    cm = ep - em
    act = e.active
    sz = np.sign(e.zrows[act])
    sa = np.sign(e.arows[act])
    az = np.abs(sz)
    aa = np.abs(sa)
    full = np.einsum("ij,ij->i", az @ cp, aa)
    diff = np.einsum("ij,ij->i", sz @ cm, sa)
    alpha = 0.5 * (full + diff)
    gamma = 0.5 * (full - diff)
    z0 = np.maximum(cp.sum() - full, 0.0)
    return m, alpha, gamma, z0


def _log_terms(*pairs):
    """log(sum coef * exp(expo)) over (coef, expo) pairs, coef >= 0."""
    with np.errstate(divide="ignore"):
        logs = [np.log(c) + x for c, x in pairs]
    return np.logaddexp.reduce(np.stack(logs), axis=0)


def _values_at_unit_step(state, e, beta, fast):
    """V_beta(S + z_i a_i^T - W) for every active row."""
    X = state.S - e.W
    d = e.n * e.n
    if fast:
        m, alpha, gamma, z0 = _sign_aggregates(X, beta, e)
        u = e.L / beta
        lg = _log_terms((alpha, u), (gamma, -u), (z0, 0.0))
        return np.maximum(beta * (m + lg - math.log(2.0 * d)), 0.0)
    out = np.empty(len(e.active))
    for r, i in enumerate(e.active):
        out[r] = kernels.line_derivs(X, e.zrows[i], e.arows[i], 1.0, beta)[0]
    return out


def step_policy_a(state, e, variant="first"):
    """One step of policy A (``variant`` is ``"first"`` or ``"best"``)."""
    if variant not in ("first", "best"):
        raise ValueError(f"unknown variant {variant!r}")
    scores = _scores(state, e)
    ok = np.flatnonzero(scores <= 0.0)
    r_first = int(ok[0]) if ok.size else int(np.argmin(scores))
    if variant == "first":
        i = e.active[r_first]
        return _advance(state, e, i, e.zrows[i])
    beta_next = _next_beta(state)
    vals = _values_at_unit_step(state, e, beta_next, e.uniform_atoms)
    i = e.active[int(np.argmin(vals))]
    new = _advance(state, e, i, e.zrows[i], beta_next)
    if not condition_holds(state, new, e.L):
        i = e.active[r_first]
        new = replace(_advance(state, e, i, e.zrows[i], beta_next), fallback=True)
    return new


def step_policy_a_prime(state, e, rng, max_draws=None):
    """Policy A': candidates drawn from pi until the gradient test passes;
    after ``max_draws`` failures (default M) the ordered scan of A takes over."""
    if max_draws is None:
        max_draws = e.M
    _, G = v_beta_value_grad(state.S, state.beta)
    gw = float(np.sum(G * e.W))
    for _ in range(max_draws):
        i = int(draw_indices(e, 1, rng)[0])
        if float(e.zrows[i] @ G @ e.arows[i]) - gw <= 0.0:
            return _advance(state, e, i, e.zrows[i])
    return replace(step_policy_a(state, e, "first"), fallback=True)


# --- policy B ---------------------------------------------------------------

def linesearch_rank1(state, e, i, tol=1e-8):
    """argmin_{t >= 0} V_beta(S + t z_i a_i^T - W): returns (t*, value)."""
    X = state.S - e.W
    t, f = kernels.linesearch(X, e.zrows[i], e.arows[i], state.beta, tol, MAX_SCALAR_ITER)
    return float(t), float(f)


def _policy_b_candidates(state, e, tol, fast):
    """(t*, value) for every active row."""
    X = state.S - e.W
    beta = state.beta
    act = e.active
    ts = np.empty(len(act))
    vals = np.empty(len(act))
    generic = np.ones(len(act), dtype=bool)
    if fast:
        d = e.n * e.n
        m, alpha, gamma, z0 = _sign_aggregates(X, beta, e)
        good = (alpha > 0) & (gamma > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.maximum(0.5 * (np.log(gamma) - np.log(alpha)), 0.0)
            inner = np.where(u > 0, 2.0 * np.sqrt(alpha * gamma), alpha + gamma) + z0
            v = beta * (m + np.log(inner) - math.log(2.0 * d))
        ts[good] = beta * u[good] / e.L
        vals[good] = np.maximum(v[good], 0.0)
        generic = ~good
    for r in np.flatnonzero(generic):
        i = act[r]
        ts[r], vals[r] = kernels.linesearch(X, e.zrows[i], e.arows[i], beta, tol, MAX_SCALAR_ITER)
    return ts, vals


def step_policy_b(state, e, tol=1e-8):
    ts, vals = _policy_b_candidates(state, e, tol, e.uniform_atoms)
    r = int(np.argmin(vals))
    i = e.active[r]
    new = _advance(state, e, i, ts[r] * e.zrows[i])
    if not condition_holds(state, new, e.L):
        new = replace(step_policy_a(state, e, "first"), fallback=True)
    return new


# --- policy C ---------------------------------------------------------------

def _coord_solve(X, a, beta, tol):
    return kernels.coord_roots(np.ascontiguousarray(X), np.asarray(a, dtype=np.float64), beta, tol, MAX_SCALAR_ITER)


def solve_policy_c_row(state, a_i, tol=1e-8, W=None):
    """argmin_u V_beta(S + u a_i^T - W).

    Solves the n independent equations
    sum_l gamma_l sinh(alpha_jl + gamma_l u_j) = 0, alpha = (S - W)/beta,
    gamma_l = (a_i)_l / beta, by safeguarded Newton with bisection fallback.
    ``W`` defaults to zero; pass the ensemble's W to work on S_k - W.
    """
    X = state.S if W is None else state.S - W
    a_i = np.asarray(a_i, dtype=np.float64)
    if not np.any(a_i):
        raise ValueError("a_i must not be identically zero")
    return _coord_solve(X, a_i, state.beta, tol)


def _policy_c_candidates(state, e, tol, fast):
    """(u*, value) for every active row; u* rows stacked."""
    X = state.S - e.W
    beta = state.beta
    act = e.active
    n = e.n
    d = n * n
    us = np.empty((len(act), n))
    vals = np.empty(len(act))
    generic = np.ones(len(act), dtype=bool)
    if fast:
        x = X / beta
        mrow = np.max(np.abs(x), axis=1, keepdims=True)
        ep = np.exp(x - mrow)
        em = np.exp(-x - mrow)
        sa = np.sign(e.arows[act])
        pos = (sa > 0).astype(np.float64)
        neg = (sa < 0).astype(np.float64)
        zer = (sa == 0).astype(np.float64)
        alpha = ep @ pos.T + em @ neg.T  # n x M'
        gamma = em @ pos.T + ep @ neg.T
        z0 = (ep + em) @ zer.T
        rho = np.max(np.abs(e.arows[act]), axis=1)
        good_cols = np.all((alpha > 0) & (gamma > 0), axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 0.5 * (np.log(gamma) - np.log(alpha))
            rowmin = np.log(2.0 * np.sqrt(alpha * gamma) + z0) + mrow
        lse = np.logaddexp.reduce(rowmin, axis=0)
        v = beta * (lse - math.log(2.0 * d))
        us[good_cols] = (beta * w[:, good_cols] / rho[good_cols]).T
        vals[good_cols] = np.maximum(v[good_cols], 0.0)
        generic = ~good_cols
    for r in np.flatnonzero(generic):
        a = e.arows[act[r]]
        u = _coord_solve(X, a, beta, tol)
        us[r] = u
        vals[r] = potential(X + np.outer(u, a), beta)
    return us, vals


def step_policy_c(state, e, tol=1e-8):
    us, vals = _policy_c_candidates(state, e, tol, e.uniform_arows)
    r = int(np.argmin(vals))
    i = e.active[r]
    new = _advance(state, e, i, us[r])
    if not condition_holds(state, new, e.L):
        new = replace(step_policy_a(state, e, "first"), fallback=True)
    return new


# --- joint (t, beta) variant -------------------------------------------------

def _joint_objective(X, beta, lg):
    return beta * lg + potential(X, beta)


def _beta_derivative(X, beta, lg):
    v, g = v_beta_value_grad(X, beta)
    return lg + (v - float(np.sum(X * g))) / beta


def _minimize_beta(X, lo, lg, tol):
    """argmin_{beta >= lo} beta ln(2d) + V_beta(X). The objective never
    decreases in beta, so this returns ``lo`` up to rounding."""
    if _beta_derivative(X, lo, lg) >= 0.0:
        return lo
    hi = 2.0 * lo
    while _beta_derivative(X, hi, lg) < 0.0 and hi < lo * 2.0**60:
        hi *= 2.0
    a, b = lo, hi
    while b - a > tol * b:
        mid = 0.5 * (a + b)
        if _beta_derivative(X, mid, lg) < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def joint_minimize(state, e, i, tol=1e-8, beta_floor=None, max_rounds=50):
    """Alternate exact t- and beta-minimizations of
    beta ln(2d) + V_beta(S + t z_i a_i^T - W) over t >= 0, beta >= beta_floor.

    Returns (t, beta, objective, trace) with the objective after each round.
    """
    if beta_floor is None:
        beta_floor = state.beta
    lg = math.log(2.0 * e.n * e.n)
    X0 = state.S - e.W
    z, a = e.zrows[i], e.arows[i]
    beta = max(state.beta, beta_floor)
    t = 1.0
    obj = _joint_objective(X0 + t * np.outer(z, a), beta, lg)
    trace = [obj]
    for _ in range(max_rounds):
        t, _ = kernels.linesearch(X0, z, a, beta, tol, MAX_SCALAR_ITER)
        X = X0 + t * np.outer(z, a)
        beta = _minimize_beta(X, beta_floor, lg, tol)
        new = _joint_objective(X, beta, lg)
        trace.append(new)
        if obj - new < tol:
            obj = min(obj, new)
            break
        obj = new
    return float(t), float(beta), float(obj), trace


def step_joint_beta(state, e, tol=1e-8):
    """Policy B with beta chosen jointly; beta is kept at or above the
    closed-form gain value for this step so the gain sequence never drops."""
    floor = max(state.beta, 2.0 * e.L * math.sqrt((state.k + 1) / math.log(2.0 * e.n * e.n)))
    best = None
    for i in e.active:
        t, beta, obj, _ = joint_minimize(state, e, i, tol, floor)
        if best is None or obj < best[3]:
            best = (i, t, beta, obj)
    i, t, beta, _ = best
    new = _advance(state, e, i, t * e.zrows[i], beta_next=beta)
    if not condition_holds(state, new, e.L):
        new = replace(step_policy_b(state, e, tol), fallback=True)
    return new


# --- driver -------------------------------------------------------------------

def reconstruct_S(picks, e):
    S = np.zeros((e.n, e.n))
    for i, v in picks:
        S += np.outer(v, e.arows[i]) - e.W
    return S


def witness_from_picks(picks, k):
    """Distinct rows (first appearance) and Y_k rows = (1/k) sum of their v."""
    rows = first_appearances(i for i, _ in picks)
    pos = {r: j for j, r in enumerate(rows)}
    n = len(picks[0][1]) if picks else 0
    Ysum = np.zeros((len(rows), n))
    for i, v in picks:
        Ysum[pos[i]] += v
    return rows, Ysum / k


def _detect_shortcut(A):
    try:
        character_exponent(A)
        return True
    except Exception:
        return False


@dataclass
class SynthesisResult:
    factor: RankKFactor
    history: list
    rows: list
    mu: float
    s_max: float
    certified: bool
    witness: np.ndarray
    certified_rank: Optional[int] = None
    state: Optional[GreedyState] = field(default=None, repr=False)


def step_blind(state, e, rng):
    """Plain sampling: the next atom is drawn from pi, no test applied."""
    i = int(draw_indices(e, 1, rng)[0])
    return _advance(state, e, i, e.zrows[i])


def step(state, e, policy, tol=1e-8, rng=None, variant="first", max_draws=None):
    if policy == "blind":
        return step_blind(state, e, rng)
    if policy == "a":
        return step_policy_a(state, e, variant)
    if policy == "aprime":
        return step_policy_a_prime(state, e, rng, max_draws)
    if policy == "b":
        return step_policy_b(state, e, tol)
    if policy == "c":
        return step_policy_c(state, e, tol)
    if policy == "joint":
        return step_joint_beta(state, e, tol)
    raise ValueError(f"unknown policy {policy!r}")


def run_derandomized(
    Y,
    A,
    policy="a",
    schedule="fixed",
    k_max=100,
    target_s=None,
    tol=1e-8,
    rng=None,
    refine_every=0,
    shortcut=None,
    variant="first",
    max_draws=None,
    callback=None,
    max_rows=None,
):
    """Iterate a selection policy for up to ``k_max`` steps.

    After each step the incumbent Y_k^T A_k = S_k/k + W is scored by
    ||I - Y_k^T A_k||_inf; with ``refine_every = r > 0`` the witness is also
    re-optimized over the current rows every r steps (skipped when no new
    row arrived). Stops once ``target_s`` is certified or ``max_rows``
    distinct rows have been picked. Each history entry
    holds k, mu (incumbent), mu_refined, beta, delta, pick and m.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    A = np.asarray(A, dtype=np.float64)
    e = build_ensemble(Y, A)
    n = e.n
    if isinstance(schedule, str):
        schedule = make_schedule(schedule, e, horizon=k_max if schedule == "fixed" else None)
    if policy in ("blind", "aprime") and rng is None:
        rng = RandomSource(0)
    if refine_every and shortcut is None:
        shortcut = _detect_shortcut(A)
    eye = np.eye(n)
    state = init_state(e, schedule)
    history = []
    best = (math.inf, None, None, 0)  # mu, rows, witness, k
    refined_rows = None
    mu_ref = None
    certified_rank = None
    for _ in range(k_max):
        state = step(state, e, policy, tol, rng, variant, max_draws)
        k = state.k
        U = state.S / k + e.W
        mu_inc = uniform_norm(eye - U)
        rows, Yk = witness_from_picks(state.picks, k)
        if mu_inc < best[0]:
            best = (mu_inc, rows, Yk, k)
        if refine_every and k % refine_every == 0 and rows != refined_rows:
            cert = reoptimize(A[rows], tol, shortcut)
            refined_rows = list(rows)
            mu_ref = cert.mu
            if mu_ref < best[0]:
                best = (mu_ref, list(rows), cert.witness, k)
        entry = {
            "k": k,
            "mu": mu_inc,
            "mu_refined": mu_ref if refined_rows == rows else None,
            "beta": state.beta,
            "delta": state.last_delta,
            "pick": state.picks[-1][0],
            "m": len(rows),
        }
        history.append(entry)
        if callback is not None:
            callback(state, entry)
        if target_s is not None and certified_s(best[0]) >= target_s:
            certified_rank = len(best[1])
            break
        if max_rows is not None and len(rows) >= max_rows:
            break
    mu, rows, witness, kb = best
    rows_all, Yk = witness_from_picks(state.picks, state.k)
    factor = RankKFactor(left=Yk * state.k, right=A[rows_all], k=len(rows_all), scale=1.0 / state.k)
    certified = target_s is not None and certified_s(mu) >= target_s
    return SynthesisResult(
        factor=factor,
        history=history,
        rows=list(rows),
        mu=mu,
        s_max=certified_s(mu),
        certified=certified,
        witness=witness,
        certified_rank=certified_rank,
        state=state,
    )


