"""numba-compiled kernels; same contracts as ``_numpy``."""
import math

import numpy as np
from numba import njit

from ._numpy import BRACKET_CAP, DIRECT_LIMIT


@njit(cache=True, inline="always")
def _direct_terms(ax):
    """(cosh(ax) - 1, sinh(ax)) for ax >= 0 from a single expm1."""
    q = math.expm1(ax)
    r = 0.5 / (1.0 + q)
    return q * q * r, q * (q + 2.0) * r


@njit(cache=True)
def _max_abs(z, beta):
    m = 0.0
    for i in range(z.size):
        ax = abs(z[i]) / beta
        if ax > m:
            m = ax
    return m


@njit(cache=True)
def _value_flat(z, beta):
    d = z.size
    m = _max_abs(z, beta)
    if m <= DIRECT_LIMIT:
        s = 0.0
        for i in range(d):
            cm1, _ = _direct_terms(abs(z[i]) / beta)
            s += cm1
        v = beta * math.log1p(s / d)
    else:
        c = 0.0
        for i in range(d):
            ax = abs(z[i]) / beta
            c += math.exp(ax - m) + math.exp(-ax - m)
        v = beta * m + beta * math.log(c / (2.0 * d))
    return max(v, 0.0)


@njit(cache=True)
def _value_grad_flat(z, beta, g):
    d = z.size
    m = _max_abs(z, beta)
    if m <= DIRECT_LIMIT:
        s = 0.0
        for i in range(d):
            x = z[i] / beta
            cm1, sh = _direct_terms(abs(x))
            s += cm1
            g[i] = sh if x >= 0.0 else -sh
        tot = d + s
        v = beta * math.log1p(s / d)
    else:
        tot = 0.0
        for i in range(d):
            x = z[i] / beta
            ax = abs(x)
            ep = math.exp(ax - m)
            em = math.exp(-ax - m)
            tot += ep + em
            g[i] = ep - em if x >= 0.0 else em - ep
        v = beta * m + beta * math.log(tot / (2.0 * d))
    inv = 1.0 / tot
    for i in range(d):
        g[i] *= inv
    return max(v, 0.0)


def potential_value(z, beta):
    return _value_flat(np.ascontiguousarray(z, dtype=np.float64).ravel(), float(beta))


def potential_value_grad(z, beta):
    arr = np.ascontiguousarray(z, dtype=np.float64)
    g = np.empty(arr.size)
    v = _value_grad_flat(arr.ravel(), float(beta), g)
    return v, g.reshape(arr.shape)


@njit(cache=True)
def _line_derivs(B, z, a, t, beta):
    n1, n2 = B.shape
    d = n1 * n2
    m = 0.0
    for j in range(n1):
        for l in range(n2):
            ax = abs(B[j, l] + t * z[j] * a[l]) / beta
            if ax > m:
                m = ax
    tot = 0.0
    s1 = 0.0
    s2 = 0.0
    sv = 0.0
    direct = m <= DIRECT_LIMIT
    for j in range(n1):
        for l in range(n2):
            c = z[j] * a[l]
            x = (B[j, l] + t * c) / beta
            if direct:
                cm1, sh = _direct_terms(abs(x))
                wc = 1.0 + cm1
                ws = sh if x >= 0.0 else -sh
                sv += cm1
            else:
                ax = abs(x)
                ep = math.exp(ax - m)
                em = math.exp(-ax - m)
                wc = ep + em
                ws = ep - em if x >= 0.0 else em - ep
                sv += wc
            tot += wc
            s1 += ws * c
            s2 += wc * c * c
    if direct:
        v = beta * math.log1p(sv / d)
    else:
        v = beta * m + beta * math.log(sv / (2.0 * d))
    v = max(v, 0.0)
    df = s1 / tot
    d2f = (s2 / tot - df * df) / beta
    return v, df, max(d2f, 0.0)


def line_derivs(B, z, a, t, beta):
    return _line_derivs(B, z, a, float(t), float(beta))


@njit(cache=True)
def _linesearch(B, z, a, beta, tol, max_iter):
    f, g, h = _line_derivs(B, z, a, 0.0, beta)
    if g >= 0.0:
        return 0.0, f
    lo = 0.0
    hi = 1.0
    while True:
        f, g, h = _line_derivs(B, z, a, hi, beta)
        if g >= 0.0 or hi >= BRACKET_CAP:
            break
        lo = hi
        hi *= 2.0
    x = hi
    for _ in range(max_iter):
        if g == 0.0 or hi - lo <= tol * max(1.0, hi):
            break
        if h > 0.0:
            xn = x - g / h
        else:
            xn = np.inf
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        step = xn - x
        x = xn
        f, g, h = _line_derivs(B, z, a, x, beta)
        if g < 0.0:
            lo = x
        else:
            hi = x
        if abs(step) <= 0.25 * tol * max(1.0, x):
            break
    return x, f


def linesearch(B, z, a, beta, tol, max_iter):
    return _linesearch(B, z, a, float(beta), float(tol), int(max_iter))


@njit(cache=True)
def _row_residual(B, j, gamma, beta, u):
    n = gamma.size
    m = 0.0
    for l in range(n):
        ax = abs(B[j, l] / beta + gamma[l] * u)
        if ax > m:
            m = ax
    num = 0.0
    den = 0.0
    tot = 0.0
    for l in range(n):
        x = B[j, l] / beta + gamma[l] * u
        ax = abs(x)
        ep = math.exp(ax - m)
        em = math.exp(-ax - m)
        wc = ep + em
        ws = ep - em if x >= 0.0 else em - ep
        num += gamma[l] * ws
        den += gamma[l] * gamma[l] * wc
        tot += wc
    return num, den, num / tot


@njit(cache=True)
def _coord_roots(B, a, beta, tol, max_iter, u):
    n = B.shape[0]
    gamma = a / beta
    gmax = 0.0
    for l in range(gamma.size):
        if abs(gamma[l]) > gmax:
            gmax = abs(gamma[l])
    if gmax == 0.0:
        return
    scale = 1.0 / gmax
    eps4 = 4.0 * np.finfo(np.float64).eps
    for j in range(n):
        num, den, r0 = _row_residual(B, j, gamma, beta, 0.0)
        if r0 == 0.0 or abs(r0) * beta <= tol:
            u[j] = 0.0
            continue
        if r0 < 0.0:
            lo = 0.0
            hi = scale
            for _ in range(200):
                _, _, rh = _row_residual(B, j, gamma, beta, hi)
                if rh >= 0.0 or hi >= BRACKET_CAP:
                    break
                lo = hi
                hi *= 2.0
        else:
            lo = -scale
            hi = 0.0
            for _ in range(200):
                _, _, rl = _row_residual(B, j, gamma, beta, lo)
                if rl <= 0.0 or lo <= -BRACKET_CAP:
                    break
                hi = lo
                lo *= 2.0
        x = 0.5 * (lo + hi)
        for _ in range(max_iter):
            num, den, res = _row_residual(B, j, gamma, beta, x)
            if abs(res) * beta <= tol:
                break
            if res < 0.0:
                lo = x
            else:
                hi = x
            if hi - lo <= eps4 * max(1.0, abs(x)):
                break
            xn = x - num / den if den > 0.0 else 0.5 * (lo + hi)
            if not (lo < xn < hi):
                xn = 0.5 * (lo + hi)
            x = xn
        u[j] = x


def coord_roots(B, a, beta, tol, max_iter):
    u = np.zeros(B.shape[0])
    _coord_roots(np.ascontiguousarray(B), np.ascontiguousarray(a, dtype=np.float64),
                 float(beta), float(tol), int(max_iter), u)
    return u


@njit(cache=True)
def _jacobi(G, V, tol, max_sweeps):
    m, n = G.shape
    nv = V.shape[0]
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for i in range(m):
                    alpha += G[i, p] * G[i, p]
                    beta += G[i, q] * G[i, q]
                    gamma += G[i, p] * G[i, q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for i in range(m):
                    gp = G[i, p]
                    gq = G[i, q]
                    G[i, p] = c * gp - s * gq
                    G[i, q] = s * gp + c * gq
                for i in range(nv):
                    vp = V[i, p]
                    vq = V[i, q]
                    V[i, p] = c * vp - s * vq
                    V[i, q] = s * vp + c * vq
        if not rotated:
            return sweep, True
    return max_sweeps, False


def jacobi_sweeps(G, V, tol, max_sweeps):
    return _jacobi(G, V, float(tol), int(max_sweeps))
