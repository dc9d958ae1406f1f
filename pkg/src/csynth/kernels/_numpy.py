"""Vectorized numpy kernels (reference backend).

Every function here has a loop-level twin in ``_numba`` with identical
semantics; tests run both and compare.
"""
import numpy as np

# Below this value of max|z|/beta the cosh sums are formed directly (log1p
# form, accurate for large beta); above it they are shifted by the max.
DIRECT_LIMIT = 300.0
BRACKET_CAP = 2.0**60


def _direct_terms(ax):
    """(cosh(ax) - 1, sinh(ax)) for ax >= 0 from a single expm1."""
    q = np.expm1(ax)
    r = 0.5 / (1.0 + q)
    return q * q * r, q * (q + 2.0) * r


def _weights(x):
    """Return (m, wc, ws) with wc ~ 2cosh(x)e^-m and ws ~ 2sinh(x)e^-m."""
    ax = np.abs(x)
    m = ax.max()
    if m <= DIRECT_LIMIT:
        cm1, sh = _direct_terms(ax)
        return 0.0, 2.0 * (1.0 + cm1), 2.0 * np.copysign(sh, x)
    ep = np.exp(ax - m)
    em = np.exp(-ax - m)
    return m, ep + em, np.sign(x) * (ep - em)


def _value_from(x, beta):
    d = x.size
    ax = np.abs(x)
    m = ax.max()
    if m <= DIRECT_LIMIT:
        # sum(cosh x - 1) formed without cancellation
        s = np.sum(_direct_terms(ax)[0])
        v = beta * np.log1p(s / d)
    else:
        c = np.sum(np.exp(ax - m) + np.exp(-ax - m))
        v = beta * m + beta * np.log(c / (2.0 * d))
    return max(v, 0.0)


def potential_value(z, beta):
    return _value_from(np.ravel(z) / beta, beta)


def potential_value_grad(z, beta):
    zf = np.ravel(z)
    x = zf / beta
    v = _value_from(x, beta)
    _, wc, ws = _weights(x)
    g = ws / wc.sum()
    return v, g.reshape(np.shape(z))


def line_derivs(B, z, a, t, beta):
    """Value, first and second derivative of t -> V_beta(B + t z a^T)."""
    C = np.outer(z, a)
    x = (B + t * C) / beta
    v = _value_from(x.ravel(), beta)
    _, wc, ws = _weights(x)
    tot = wc.sum()
    df = np.sum(ws * C) / tot
    d2f = (np.sum(wc * C * C) / tot - df * df) / beta
    return v, df, max(d2f, 0.0)


def linesearch(B, z, a, beta, tol, max_iter):
    """Minimize t -> V_beta(B + t z a^T) over t >= 0.

    Derivative bisection on a doubling bracket, with Newton steps taken
    whenever they land strictly inside the bracket.
    """
    f, g, h = line_derivs(B, z, a, 0.0, beta)
    if g >= 0.0:
        return 0.0, f
    lo, hi = 0.0, 1.0
    while True:
        f, g, h = line_derivs(B, z, a, hi, beta)
        if g >= 0.0 or hi >= BRACKET_CAP:
            break
        lo = hi
        hi *= 2.0
    x = hi
    for _ in range(max_iter):
        if g == 0.0 or hi - lo <= tol * max(1.0, hi):
            break
        xn = x - g / h if h > 0.0 else np.inf
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        step = xn - x
        x = xn
        f, g, h = line_derivs(B, z, a, x, beta)
        if g < 0.0:
            lo = x
        else:
            hi = x
        if abs(step) <= 0.25 * tol * max(1.0, x):
            break
    return x, f


def _row_state(alpha, gamma, u):
    """Scale-free residual pieces for every row at the current u."""
    x = alpha + u[:, None] * gamma[None, :]
    ax = np.abs(x)
    m = ax.max(axis=1, keepdims=True)
    ep = np.exp(ax - m)
    em = np.exp(-ax - m)
    wc = ep + em
    ws = np.sign(x) * (ep - em)
    num = ws @ gamma
    den = wc @ (gamma * gamma)
    res = num / wc.sum(axis=1)
    return num, den, res


def coord_roots(B, a, beta, tol, max_iter):
    """Solve sum_l gamma_l sinh(alpha_jl + gamma_l u_j) = 0 for every row j.

    alpha = B / beta, gamma = a / beta. Stops a row once
    |sum_l a_l sinh(.)| / sum_l cosh(.) <= tol.
    """
    n = B.shape[0]
    u = np.zeros(n)
    gmax = np.max(np.abs(a))
    if gmax == 0.0:
        return u
    alpha = B / beta
    gamma = a / beta
    scale = 1.0 / np.max(np.abs(gamma))
    _, _, r0 = _row_state(alpha, gamma, u)
    # root sign is opposite to the residual sign at 0 (residual increases in u)
    direction = np.where(np.abs(r0) * beta <= tol, 0.0, -np.sign(r0))
    lo = np.where(direction > 0, 0.0, -scale)
    hi = np.where(direction > 0, scale, 0.0)
    active = direction != 0
    for _ in range(200):
        need = active.copy()
        _, _, rl = _row_state(alpha, gamma, lo)
        _, _, rh = _row_state(alpha, gamma, hi)
        grow_hi = need & (direction > 0) & (rh < 0.0)
        grow_lo = need & (direction < 0) & (rl > 0.0)
        if not (grow_hi.any() or grow_lo.any()):
            break
        lo = np.where(grow_hi, hi, lo)
        hi = np.where(grow_hi, np.minimum(hi * 2.0, BRACKET_CAP), hi)
        hi = np.where(grow_lo, lo, hi)
        lo = np.where(grow_lo, np.maximum(lo * 2.0, -BRACKET_CAP), lo)
    u = np.where(active, 0.5 * (lo + hi), 0.0)
    for _ in range(max_iter):
        num, den, res = _row_state(alpha, gamma, u)
        done = ~active | (np.abs(res) * beta <= tol)
        if done.all():
            break
        lo = np.where(~done & (res < 0.0), u, lo)
        hi = np.where(~done & (res > 0.0), u, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            un = u - num / den
        inside = (un > lo) & (un < hi)
        un = np.where(inside, un, 0.5 * (lo + hi))
        stalled = (hi - lo) <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(u))
        u = np.where(done | stalled, u, un)
        active = active & ~stalled
    return u


def jacobi_sweeps(G, V, tol, max_sweeps):
    """One-sided Jacobi: rotate columns of G (and V) until pairwise orthogonal."""
    n = G.shape[1]
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                gp = G[:, p]
                gq = G[:, q]
                alpha = gp @ gp
                beta = gq @ gq
                gamma = gp @ gq
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                G[:, p], G[:, q] = c * gp - s * gq, s * gp + c * gq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        if not rotated:
            return sweep, True
    return max_sweeps, False
