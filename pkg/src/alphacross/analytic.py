"""Closed-form turnover and netting of N combined alpha streams.

Everything here assumes the uniform setting unless stated otherwise: equal
weights, per-stream turnover ``tau`` and a single pairwise crossing (or
correlation) parameter ``rho``. Infeasible inputs raise
:class:`InfeasibleParameters` instead of producing NaNs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

WEIGHT_TOL = 1e-12


class InfeasibleParameters(ValueError):
    """Parameters outside the region where a formula has portfolio meaning."""


def min_uniform_correlation(n: int) -> float:
    """Smallest common pairwise correlation n variables can share: -1/(n-1)."""
    if n < 2:
        raise InfeasibleParameters(f"need n >= 2, got {n}")
    return -1.0 / (n - 1)


def _check_uniform(rho: float, n: int, name: str = "rho") -> None:
    if n < 1:
        raise InfeasibleParameters(f"n must be >= 1, got {n}")
    if not -1.0 < rho <= 1.0:
        raise InfeasibleParameters(f"{name} must lie in (-1, 1], got {rho}")
    if rho < 0 and n >= 2 and rho < min_uniform_correlation(n):
        raise InfeasibleParameters(
            f"{name}={rho} is below the equicorrelation floor {min_uniform_correlation(n)} for n={n}"
        )


@dataclass(frozen=True)
class UniformModel:
    tau: float
    rho: float
    n: int

    def __post_init__(self):
        if self.tau < 0:
            raise InfeasibleParameters(f"tau must be >= 0, got {self.tau}")
        _check_uniform(self.rho, self.n)


@dataclass(frozen=True)
class NettingModel:
    psi: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InfeasibleParameters(f"n must be >= 1, got {self.n}")
        if not -1.0 <= self.psi <= 1.0:
            raise InfeasibleParameters(f"psi must lie in [-1, 1], got {self.psi}")
        if self.psi < 0 and self.n >= 2 and self.psi < min_uniform_correlation(self.n):
            raise InfeasibleParameters(f"psi={self.psi} infeasible for n={self.n}")


@dataclass(frozen=True)
class PortfolioWeights:
    weights: tuple[float, ...]

    def __init__(self, weights: Sequence[float]):
        w = tuple(float(x) for x in weights)
        if not w:
            raise ValueError("no weights")
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {math.fsum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "PortfolioWeights":
        return cls([1.0 / n] * n)

    def __len__(self):
        return len(self.weights)


def _as_weights(w) -> PortfolioWeights:
    return w if isinstance(w, PortfolioWeights) else PortfolioWeights(w)


def combine_alphas(w, alphas: Sequence[float]) -> float:
    """Weighted combination sum_i w_i alpha_i."""
    w = _as_weights(w)
    if len(alphas) != len(w):
        raise ValueError(f"{len(w)} weights but {len(alphas)} alphas")
    return math.fsum(wi * ai for wi, ai in zip(w.weights, alphas))


def _check_rho_closed(rho: float) -> None:
    if not -1.0 <= rho <= 1.0:
        raise InfeasibleParameters(f"rho must lie in [-1, 1], got {rho}")


def pair_turnover(w1: float, t1: float, w2: float, t2: float, rho: float) -> float:
    """Turnover of two crossed streams with weights w1, w2 and turnovers t1, t2."""
    if abs(w1 + w2 - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights must sum to 1, got {w1 + w2}")
    if t1 < 0 or t2 < 0:
        raise InfeasibleParameters("turnovers must be non-negative")
    _check_rho_closed(rho)
    a, b = w1 * t1, w2 * t2
    return 0.5 * (1.0 + rho) * (a + b) + 0.5 * (1.0 - rho) * abs(a - b)


def equal_pair_turnover(tau: float, rho: float) -> float:
    if tau < 0:
        raise InfeasibleParameters("tau must be non-negative")
    _check_rho_closed(rho)
    return tau * (1.0 + rho) / 2


def correlation_of_halves(gamma: float) -> float:
    """Correlation between the averages of two disjoint pairs drawn from four
    equicorrelated variables with pairwise correlation ``gamma``."""
    if gamma <= -1.0:
        raise InfeasibleParameters("gamma = -1 makes the halves degenerate")
    if gamma < -1.0 / 3.0 or gamma > 1.0:
        raise InfeasibleParameters(f"gamma must lie in [-1/3, 1], got {gamma}")
    return 2.0 * gamma / (1.0 + gamma)


def rho_after_doublings(rho0: float, k: int) -> float:
    """Correlation between two disjoint groups of 2**k streams."""
    if k < 0:
        raise InfeasibleParameters(f"k must be >= 0, got {k}")
    if not -1.0 < rho0 <= 1.0:
        raise InfeasibleParameters(f"rho0 must lie in (-1, 1], got {rho0}")
    m = 2.0**k
    denom = 1.0 + (m - 1.0) * rho0
    if denom <= 0:
        raise InfeasibleParameters(f"rho0={rho0} infeasible for k={k}")
    return m * rho0 / denom


def telescoped_turnover(tau: float, rho0: float, k: int) -> float:
    """Turnover of 2**k streams built by k successive pairwise crossings.

    Multiplies the per-step factors (1 + rho[l]) / 2 one level at a time; the
    closed form :func:`turnover_closed` must agree with it at n = 2**k.
    """
    t = tau
    for level in range(k):
        t *= 0.5 * (1.0 + rho_after_doublings(rho0, level))
    return t


def turnover_closed(tau: float, rho: float, n: int) -> float:
    """Turnover of n equally weighted streams: tau * (rho + (1 - rho) / n).

    Used for any integer n >= 1, not just powers of two.
    """
    m = UniformModel(tau, rho, n)
    # same value as tau * (rho + (1 - rho) / n); this ordering is bitwise
    # identical to equal_pair_turnover at n = 2
    return m.tau * (1.0 + (m.n - 1) * m.rho) / m.n


def turnover_limit(tau: float, rho: float) -> float:
    """Large-n floor tau * rho of the combined turnover."""
    if tau < 0:
        raise InfeasibleParameters("tau must be non-negative")
    if not 0.0 <= rho <= 1.0:
        raise InfeasibleParameters(f"the limit needs rho in [0, 1], got {rho}")
    return tau * rho


def weighted_average_turnover(w, turnovers: Sequence[float]) -> float:
    w = _as_weights(w)
    if len(turnovers) != len(w):
        raise ValueError(f"{len(w)} weights but {len(turnovers)} turnovers")
    if any(t < 0 for t in turnovers):
        raise InfeasibleParameters("turnovers must be non-negative")
    return math.fsum(wi * ti for wi, ti in zip(w.weights, turnovers))


def limit_interval(tau: float, rho_lower: float, rho_upper: float) -> tuple[float, float]:
    """Bracket [tau * rho_lower, tau * rho_upper] on the turnover limit.

    Only meaningful for a positive lower quantile.
    """
    if tau < 0:
        raise InfeasibleParameters("tau must be non-negative")
    if rho_lower <= 0:
        raise InfeasibleParameters(f"rho_lower must be > 0, got {rho_lower}")
    if rho_lower > rho_upper:
        raise InfeasibleParameters(f"rho_lower={rho_lower} exceeds rho_upper={rho_upper}")
    if rho_upper > 1:
        raise InfeasibleParameters(f"rho_upper must be <= 1, got {rho_upper}")
    return tau * rho_lower, tau * rho_upper


FULLY_NETTED = 0.0
_ZETA_EPS = 1e-15


def netting_factor(m: NettingModel) -> float:
    """Fraction of the summed investment level that survives netting in a
    single aggregation unit: psi + (1 - psi) / n.

    Returns the :data:`FULLY_NETTED` sentinel when nothing survives.
    """
    zeta = m.psi + (1.0 - m.psi) / m.n
    if zeta <= _ZETA_EPS:
        return FULLY_NETTED
    return zeta


def turnover_enhancement(m: NettingModel) -> float:
    """Factor 1/zeta by which single-unit turnover exceeds the separate-unit one."""
    zeta = netting_factor(m)
    if zeta == FULLY_NETTED:
        raise InfeasibleParameters("fully netted: investment level vanishes")
    return 1.0 / zeta
