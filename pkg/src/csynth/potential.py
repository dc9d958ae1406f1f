"""Smoothed uniform norm V_beta and gain sequences for beta.

    V_beta(z) = beta * ln(sum_i cosh(z_i / beta)) - beta * ln(d)

satisfies ||z||_inf - beta ln(2d) <= V_beta(z) <= ||z||_inf, is convex,
and has a gradient with l1 norm at most 1 that is (1/beta)-Lipschitz from
the inf-norm to the l1-norm. Matrix arguments are flattened row-major, so an
n x n matrix has d = n**2.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DimensionError, PreconditionError


@dataclass(frozen=True)
class PotentialParams:
    beta: float
    d: int

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")


def _check(z, p):
    z = np.asarray(z, dtype=np.float64)
    if z.size != p.d:
        raise DimensionError(f"argument has {z.size} entries, expected d={p.d}")
    return z


def v_beta(z, p):
    return kernels.potential_value(_check(z, p), p.beta)


def v_beta_grad(z, p):
    """Gradient, component i = sinh(z_i/beta) / sum_j cosh(z_j/beta)."""
    return kernels.potential_value_grad(_check(z, p), p.beta)[1]


def v_beta_value_grad(z, beta):
    """(V_beta(z), grad) in one pass, no dimension bookkeeping."""
    return kernels.potential_value_grad(np.asarray(z, dtype=np.float64), beta)


def potential(z, beta):
    return kernels.potential_value(np.asarray(z, dtype=np.float64), beta)


SCHEDULE_KINDS = ("fixed", "recursive", "closed", "joint")


@dataclass(frozen=True)
class BetaSchedule:
    """Gain sequence beta_0, beta_1, ...

    ``fixed``:     L sqrt(2k / ln(2d)) for every step (needs ``horizon`` k)
    ``recursive``: beta_0 = 2L^2/ln(2d), beta_l = beta_{l-1} + 2L^2/(ln(2d) beta_{l-1})
    ``closed``:    2L sqrt((l+1) / ln(2d))
    ``joint``:     beta is re-optimized per step; the closed form seeds it
    """

    kind: str
    L: float
    d: int
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.kind == "fixed" and (self.horizon is None or self.horizon < 1):
            raise PreconditionError("fixed schedule needs a positive horizon")

    @property
    def log2d(self):
        return math.log(2.0 * self.d)


def beta_at(s, ell):
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    lg = s.log2d
    if s.kind == "fixed":
        return s.L * math.sqrt(2.0 * s.horizon / lg)
    if s.kind == "recursive":
        b = 2.0 * s.L**2 / lg
        for _ in range(ell):
            b = b + 2.0 * s.L**2 / (lg * b)
        return b
    # closed, and the seed value for joint
    return 2.0 * s.L * math.sqrt((ell + 1) / lg)


def beta_sequence(s, count):
    """First ``count`` values; linear time for the recursive kind."""
    if s.kind != "recursive":
        return [beta_at(s, ell) for ell in range(count)]
    lg = s.log2d
    out = []
    b = 2.0 * s.L**2 / lg
    for _ in range(count):
        out.append(b)
        b = b + 2.0 * s.L**2 / (lg * b)
    return out
