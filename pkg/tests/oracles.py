"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy import integrate, stats


def abs_sum_equicorrelated_mc(m, c0, draws, seed):
    """Brute-force E|X_1 + ... + X_m| for unit normals with common correlation
    c0, sampled through a Cholesky factor (not the one-factor construction)."""
    cov = np.full((m, m), c0)
    np.fill_diagonal(cov, 1.0)
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(m))
    z = np.random.default_rng(seed).standard_normal((draws, m))
    s = (z @ chol.T).sum(axis=1)
    a = np.abs(s)
    return a.mean(), a.std(ddof=1) / math.sqrt(draws)


def abs_sum_equicorrelated_exact(m, c0):
    """Half-normal mean of the sum: sqrt(2/pi) * sqrt(m (1 + (m-1) c0))."""
    return math.sqrt(2 / math.pi) * math.sqrt(m * (1 + (m - 1) * c0))


def crossing_rho_independent():
    """rho = 1 - 2 xi for two independent Gaussian books of equal expected
    gross, by quadrature: xi = P(opposite signs) E[min(|X|,|Y|)] / E|X|."""
    e_min, _ = integrate.quad(lambda t: (2 * stats.norm.sf(t)) ** 2, 0, np.inf)
    xi = 0.5 * e_min / math.sqrt(2 / math.pi)
    return 1 - 2 * xi


def sorted_quantile(values, q):
    """Linear-interpolation quantile from a sorted copy: position q (n - 1)."""
    v = sorted(values)
    pos = q * (len(v) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])
