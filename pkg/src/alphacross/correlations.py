"""Pairwise return correlations and their truncated-quantile bounds.

Pipeline: load a returns panel, optionally strip factor exposure (keeping the
intercept), estimate pairwise-complete Pearson correlations, then read
``rho_lower``/``rho_upper`` off the off-diagonal distribution.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

DEFAULT_MIN_OVERLAP = 24
DEFAULT_BINS = 101
PSD_TOL = 1e-10


class NoValidPairs(ValueError):
    """Raised when no off-diagonal correlation survives the overlap filter."""


@dataclass
class ReturnsPanel:
    """Per-period returns, one column per fund; NaN marks a missing value."""

    frame: pd.DataFrame

    def __post_init__(self):
        if self.frame.columns.has_duplicates:
            raise ValueError("duplicate fund ids")

    @property
    def period_labels(self) -> list[str]:
        return list(self.frame.index)

    @property
    def ids(self) -> list[str]:
        return list(self.frame.columns)

    @property
    def series(self) -> dict[str, list[float]]:
        return {c: self.frame[c].tolist() for c in self.frame.columns}


@dataclass
class CorrelationMatrix:
    ids: list[str]
    values: np.ndarray
    min_overlap_used: int
    # pairs dropped for thin overlap or zero variance, as (i, j) with i < j
    missing: list[tuple[int, int]] = field(default_factory=list)

    def offdiag(self) -> np.ndarray:
        """Valid upper-triangle entries."""
        iu = np.triu_indices(len(self.ids), 1)
        vals = self.values[iu]
        return vals[~np.isnan(vals)]

    @property
    def complete(self) -> bool:
        return not np.isnan(self.values).any()


@dataclass
class QuantileBounds:
    rho_lower: float
    rho_upper: float
    q_low: float
    q_high: float
    histogram: list[tuple[float, float]]

    def to_json_dict(self) -> dict:
        return {"rho_lower": self.rho_lower, "rho_upper": self.rho_upper, "q_low": self.q_low, "q_high": self.q_high}

    def histogram_csv(self) -> str:
        rows = ["bin_center,density"] + [f"{c!r},{d!r}" for c, d in self.histogram]
        return "\n".join(rows) + "\n"


def load_returns(path, min_funds: int = 2) -> ReturnsPanel:
    """Read a CSV whose first column is the period label and whose other
    columns are one series each. Blank cells are missing values."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"returns file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    ids = header[1:]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"{path}: duplicate column ids {dupes}")
    if len(ids) < min_funds:
        raise ValueError(f"{path}: need at least {min_funds} series, found {len(ids)}")

    labels, data = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: ragged row ({len(row)} fields, header has {len(header)})")
        labels.append(row[0].strip())
        vals = []
        for cell in row[1:]:
            cell = cell.strip()
            try:
                vals.append(float(cell) if cell else np.nan)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {cell!r}") from None
        data.append(vals)
    if len(set(labels)) != len(labels):
        raise ValueError(f"{path}: duplicate period labels")
    frame = pd.DataFrame(data, index=pd.Index(labels, name="period"), columns=ids, dtype=float)
    return ReturnsPanel(frame)


def factor_residuals(panel: ReturnsPanel, factors: ReturnsPanel, rf_id: str | None = None) -> ReturnsPanel:
    """Regress each fund on the factor columns plus an intercept and return
    residual + intercept, over periods where the fund and every factor are
    present. ``rf_id`` names a factor column subtracted from fund returns
    first and left out of the regression."""
    missing_periods = [p for p in panel.frame.index if p not in factors.frame.index]
    if missing_periods:
        raise ValueError(f"factor panel lacks periods {missing_periods[:5]}")
    fac = factors.frame.loc[panel.frame.index]
    y_all = panel.frame.copy()
    if rf_id is not None:
        if rf_id not in fac.columns:
            raise ValueError(f"risk-free column {rf_id!r} not among factors")
        y_all = y_all.sub(fac[rf_id], axis=0)
        fac = fac.drop(columns=rf_id)
    if fac.shape[1] == 0:
        raise ValueError("no factor columns to regress on")

    x_all = fac.to_numpy()
    k = x_all.shape[1]
    out = pd.DataFrame(np.nan, index=panel.frame.index, columns=panel.frame.columns)
    factors_ok = ~np.isnan(x_all).any(axis=1)
    for fund in panel.frame.columns:
        y = y_all[fund].to_numpy()
        rows = factors_ok & ~np.isnan(y)
        n_obs = int(rows.sum())
        if n_obs < k + 2:
            raise ValueError(f"{fund}: {n_obs} observations for {k} factors")
        design = np.column_stack([np.ones(n_obs), x_all[rows]])
        if np.linalg.matrix_rank(design) < k + 1:
            raise ValueError(f"{fund}: rank-deficient factor matrix")
        coef, *_ = np.linalg.lstsq(design, y[rows], rcond=None)
        resid = y[rows] - design @ coef
        out.loc[rows, fund] = resid + coef[0]
    return ReturnsPanel(out)


def ols_betas(panel: ReturnsPanel, factors: ReturnsPanel) -> pd.DataFrame:
    """Intercept and slopes of each fund on the factors (complete rows only)."""
    fac = factors.frame.loc[panel.frame.index]
    res = {}
    for fund in panel.frame.columns:
        y = panel.frame[fund].to_numpy()
        rows = ~np.isnan(y) & ~fac.isna().any(axis=1).to_numpy()
        design = np.column_stack([np.ones(rows.sum()), fac.to_numpy()[rows]])
        coef, *_ = np.linalg.lstsq(design, y[rows], rcond=None)
        res[fund] = coef
    return pd.DataFrame(res, index=["intercept", *fac.columns]).T


def estimate_correlations(panel: ReturnsPanel, min_overlap: int = DEFAULT_MIN_OVERLAP) -> CorrelationMatrix:
    """Pairwise-complete Pearson correlations.

    Pairs with fewer than ``min_overlap`` shared periods, or with zero
    variance on their overlap, are set to NaN and listed in ``missing``.
    """
    if min_overlap < 3:
        raise ValueError(f"min_overlap must be >= 3, got {min_overlap}")
    x = panel.frame.to_numpy(dtype=float)
    n = x.shape[1]
    if n < 2:
        raise ValueError("need at least 2 series")
    present = (~np.isnan(x)).astype(float)
    # centering first limits cancellation in the one-pass sums below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        x = x - np.nanmean(x, axis=0)
    x0 = np.where(np.isnan(x), 0.0, x)

    # sums over each pair's common periods
    cnt = present.T @ present
    sx = x0.T @ present  # sx[i, j] = sum of x_i over periods where both present
    sxx = (x0 * x0).T @ present
    sxy = x0.T @ x0
    with np.errstate(invalid="ignore", divide="ignore"):
        cov = sxy - sx * sx.T / cnt
        var_i = sxx - sx * sx / cnt
        var_j = var_i.T
        corr = cov / np.sqrt(var_i * var_j)

    scale = np.maximum(np.abs(sxx), np.abs(sxx.T))
    degenerate = (var_i <= 1e-14 * scale) | (var_j <= 1e-14 * scale)
    thin = cnt < min_overlap
    corr = np.clip(corr, -1.0, 1.0)
    corr[thin | degenerate] = np.nan
    np.fill_diagonal(corr, 1.0)
    corr = 0.5 * (corr + corr.T)

    missing = []
    flat_pairs = []
    for i, j in zip(*np.triu_indices(n, 1)):
        if np.isnan(corr[i, j]):
            missing.append((int(i), int(j)))
            if degenerate[i, j] and not thin[i, j]:
                flat_pairs.append((panel.ids[i], panel.ids[j]))
    if flat_pairs:
        warnings.warn(f"zero variance on overlap for {len(flat_pairs)} pair(s), e.g. {flat_pairs[0]}", stacklevel=2)
    return CorrelationMatrix(list(panel.ids), corr, min_overlap, missing)


def uniform_correlation_matrix(n: int, rho: float, ids: Sequence[str] | None = None) -> CorrelationMatrix:
    values = np.full((n, n), float(rho))
    np.fill_diagonal(values, 1.0)
    ids = list(ids) if ids is not None else [f"X{i}" for i in range(n)]
    return CorrelationMatrix(ids, values, 0)


def offdiag_quantile_bounds(
    c: CorrelationMatrix, q_low: float, q_high: float, bins: int = DEFAULT_BINS
) -> QuantileBounds:
    """Linear-interpolation quantiles of the valid off-diagonal correlations
    plus a density histogram of the same entries on [-1, 1]."""
    if not 0.0 <= q_low < q_high <= 1.0:
        raise ValueError(f"need 0 <= q_low < q_high <= 1, got {q_low}, {q_high}")
    if bins < 1:
        raise ValueError("bins must be positive")
    vals = c.offdiag()
    if vals.size == 0:
        raise NoValidPairs("no valid off-diagonal correlations")
    lo, hi = np.quantile(vals, [q_low, q_high], method="linear")
    density, edges = np.histogram(vals, bins=bins, range=(-1.0, 1.0), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    hist = [(float(x), float(d)) for x, d in zip(centers, density)]
    return QuantileBounds(float(lo), float(hi), q_low, q_high, hist)


def check_psd(c: CorrelationMatrix) -> tuple[bool, float]:
    """(is_psd, smallest eigenvalue) of a complete correlation matrix."""
    if not c.complete:
        raise ValueError("correlation matrix has missing entries")
    min_eig = float(np.linalg.eigvalsh(c.values)[0])
    return min_eig >= -PSD_TOL, min_eig
