"""Monte Carlo check of the turnover plateau.

Streams are one-factor equicorrelated Gaussian trade vectors over a stock
universe. Each path draws from its own generator seeded by (seed, path), so
results do not depend on how paths are chunked or spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from alphacross.analytic import correlation_of_halves
from alphacross.blotter import Blotter, cross_pair

NORMALIZATIONS = ("exact", "expected")
CHUNK_PATHS = 128
# E|Z| for a standard normal Z
HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class EnsembleConfig:
    """Generation parameters.

    ``normalization="exact"`` rescales every stream to gross tau*I/N exactly;
    ``"expected"`` applies the constant scale that gives that gross on average.
    Exact scaling biases multi-stream turnover by O(1/n_stocks) relative to
    the Gaussian expectation, so use ``"expected"`` when comparing to it.
    """

    n_streams: int
    n_stocks: int = 64
    base_correlation: float = 0.25
    tau: float = 0.1
    total_investment: float = 1e9
    paths: int = 1000
    seed: int = 0
    normalization: str = "exact"

    def __post_init__(self):
        if self.n_streams < 1:
            raise ValueError(f"n_streams must be >= 1, got {self.n_streams}")
        if self.n_stocks < 1:
            raise ValueError(f"n_stocks must be >= 1, got {self.n_stocks}")
        if not 0.0 <= self.base_correlation <= 1.0:
            raise ValueError(f"base_correlation must lie in [0, 1], got {self.base_correlation}")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.total_investment <= 0:
            raise ValueError("total_investment must be positive")
        if self.paths < 1:
            raise ValueError(f"paths must be >= 1, got {self.paths}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    @property
    def stream_gross(self) -> float:
        return self.tau * self.total_investment / self.n_streams

    @property
    def stream_investment(self) -> float:
        return self.total_investment / self.n_streams


@dataclass
class AlphaEnsemble:
    """Trade vectors for a block of paths.

    ``trades`` has shape (paths, n_streams, n_stocks) in dollars; ``raw`` holds
    the unscaled Gaussian draws when the ensemble was generated (None for
    hand-built fixtures). ``first_path`` is the global index of row 0.
    """

    config: EnsembleConfig
    trades: np.ndarray
    raw: np.ndarray | None = None
    first_path: int = 0

    @classmethod
    def from_trades(cls, trades, total_investment: float = 1.0, tau: float | None = None) -> "AlphaEnsemble":
        """Wrap explicit trade vectors, shape (paths, n_streams, n_stocks)."""
        trades = np.asarray(trades, dtype=float)
        if trades.ndim == 2:
            trades = trades[None]
        p, n, s = trades.shape
        if tau is None:
            tau = float(np.abs(trades[0, 0]).sum() * n / total_investment)
        cfg = EnsembleConfig(n, s, 0.0, tau, total_investment, p, 0)
        return cls(cfg, trades)


@dataclass
class TurnoverCurve:
    n: list[int] = field(default_factory=list)
    turnover_mean: list[float] = field(default_factory=list)
    turnover_stderr: list[float] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n, self.n[1:])):
            raise ValueError("n values must be strictly increasing")
        if any(se < 0 for se in self.turnover_stderr):
            raise ValueError("negative standard error")

    @property
    def points(self) -> list[tuple[int, float, float]]:
        return list(zip(self.n, self.turnover_mean, self.turnover_stderr))

    def to_csv(self) -> str:
        lines = ["n,turnover_mean,turnover_stderr"]
        lines += [f"{n},{m!r},{s!r}" for n, m, s in self.points]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FitResult:
    a0: float
    a1: float
    residual_norm: float

    def to_json_dict(self) -> dict:
        return {"a0": self.a0, "a1": self.a1, "residual_norm": self.residual_norm}


def path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(path,)))


def generate_ensemble(config: EnsembleConfig, start: int = 0, stop: int | None = None) -> AlphaEnsemble:
    """Draw paths ``start:stop`` (default: all) of the ensemble."""
    stop = config.paths if stop is None else stop
    if not 0 <= start < stop <= config.paths:
        raise ValueError(f"bad path range {start}:{stop} for {config.paths} paths")
    n, s = config.n_streams, config.n_stocks
    c0 = config.base_correlation
    raw = np.empty((stop - start, n, s))
    for row, p in enumerate(range(start, stop)):
        rng = path_rng(config.seed, p)
        common = rng.standard_normal(s)
        idio = rng.standard_normal((n, s))
        raw[row] = math.sqrt(c0) * common + math.sqrt(1.0 - c0) * idio

    if config.normalization == "exact":
        gross = np.abs(raw).sum(axis=2, keepdims=True)
        trades = raw * (config.stream_gross / gross)
    else:
        trades = raw * (config.stream_gross / (s * HALF_NORMAL_MEAN))
    return AlphaEnsemble(config, trades, raw, start)


def _levels(n: int) -> int:
    if not is_power_of_two(n):
        raise ValueError(f"tournament needs a power of two streams, got {n}")
    return n.bit_length() - 1


def _group_sums(trades: np.ndarray) -> Iterator[np.ndarray]:
    """Yield level-k group sums, shape (paths, n / 2**k, stocks), for k = 0, 1, ..."""
    level = trades
    yield level
    while level.shape[1] > 1:
        level = level[:, 0::2] + level[:, 1::2]
        yield level


def _path_turnovers(e: AlphaEnsemble) -> np.ndarray:
    """Per-path mean group turnover at each level, shape (paths, levels + 1)."""
    n_levels = _levels(e.config.n_streams)
    out = np.empty((e.trades.shape[0], n_levels + 1))
    for k, sums in enumerate(_group_sums(e.trades)):
        group_investment = e.config.stream_investment * 2**k
        out[:, k] = (np.abs(sums).sum(axis=2) / group_investment).mean(axis=1)
    return out


def _path_netting(e: AlphaEnsemble) -> np.ndarray:
    """Per-path mean netting ratio gross(sum) / sum(gross) at each level."""
    n_levels = _levels(e.config.n_streams)
    stream_gross = np.abs(e.trades).sum(axis=2)
    out = np.empty((e.trades.shape[0], n_levels + 1))
    denom = stream_gross
    for k, sums in enumerate(_group_sums(e.trades)):
        if k > 0:
            denom = denom[:, 0::2] + denom[:, 1::2]
        gross = np.abs(sums).sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(denom > 0, gross / np.where(denom > 0, denom, 1.0), 1.0)
        out[:, k] = ratio.mean(axis=1)
    return out


def summarize(per_path: np.ndarray) -> TurnoverCurve:
    """Mean and standard error across paths, column by column.

    Uses exactly rounded sums so the result does not depend on path order.
    """
    p, cols = per_path.shape
    means, errs = [], []
    for c in range(cols):
        col = per_path[:, c].tolist()
        mean = math.fsum(col) / p
        if p > 1:
            var = math.fsum((x - mean) ** 2 for x in col) / (p - 1)
            errs.append(math.sqrt(var / p))
        else:
            errs.append(0.0)
        means.append(mean)
    return TurnoverCurve([2**k for k in range(cols)], means, errs)


def tournament_turnover(e: AlphaEnsemble) -> TurnoverCurve:
    """Cross adjacent groups level by level and measure turnover at
    N = 1, 2, 4, ..., n_streams."""
    return summarize(_path_turnovers(e))


def measure_netting(e: AlphaEnsemble) -> TurnoverCurve:
    """Treat the vectors as desired positions and measure the surviving
    fraction of investment when groups share one aggregation unit."""
    return summarize(_path_netting(e))


def direct_netting_turnover(e: AlphaEnsemble) -> np.ndarray:
    """Per-path turnover of all streams netted in one step."""
    net = e.trades.sum(axis=1)
    return np.abs(net).sum(axis=1) / e.config.total_investment


def _to_blotter(vec: np.ndarray, stream_id: str, investment: float) -> Blotter:
    cents = np.rint(vec * 100).astype(np.int64)
    trades = {f"S{j}": int(c) for j, c in enumerate(cents) if c != 0}
    return Blotter(stream_id, max(1, int(round(investment * 100))), trades)


def empirical_crossing_params(e: AlphaEnsemble, level: int) -> list[float]:
    """rho = 1 - 2 xi for every adjacent pair of level-``level`` groups,
    measured with the cent-exact blotter crossing engine."""
    n_levels = _levels(e.config.n_streams)
    if not 0 <= level < n_levels:
        raise ValueError(f"level must lie in [0, {n_levels}), got {level}")
    sums = e.trades
    for _ in range(level):
        sums = sums[:, 0::2] + sums[:, 1::2]
    investment = e.config.stream_investment * 2**level
    rhos = []
    for p in range(sums.shape[0]):
        for g in range(0, sums.shape[1], 2):
            b1 = _to_blotter(sums[p, g], f"g{g}", investment)
            b2 = _to_blotter(sums[p, g + 1], f"g{g + 1}", investment)
            rhos.append(cross_pair(b1, b2).rho)
    return rhos


def fit_inverse_n(curve: TurnoverCurve) -> FitResult:
    """Least-squares fit of turnover_mean ~ a0 + a1 / N."""
    n = np.asarray(curve.n, dtype=float)
    y = np.asarray(curve.turnover_mean, dtype=float)
    if len(n) < 2:
        raise ValueError("need at least 2 points to fit a0 + a1/N")
    if np.unique(n).size < 2:
        raise ValueError("singular design: all N equal")
    design = np.column_stack([np.ones_like(n), 1.0 / n])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return FitResult(float(coef[0]), float(coef[1]), float(np.linalg.norm(resid)))


# -- chunked driver --------------------------------------------------------


def _chunk_stats(args) -> tuple[np.ndarray, np.ndarray]:
    config, start, stop = args
    e = generate_ensemble(config, start, stop)
    return _path_turnovers(e), _path_netting(e)


def _chunks(config: EnsembleConfig, chunk: int) -> list[tuple[EnsembleConfig, int, int]]:
    return [(config, a, min(a + chunk, config.paths)) for a in range(0, config.paths, chunk)]


def run_tournament(config: EnsembleConfig, workers: int = 1) -> tuple[TurnoverCurve, TurnoverCurve]:
    """Turnover and netting curves over all paths without holding the whole
    ensemble in memory.

    Chunk boundaries depend only on the config, so output is bit-identical
    for any ``workers``.
    """
    _levels(config.n_streams)
    jobs = _chunks(config, CHUNK_PATHS)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_stats, jobs))
    else:
        parts = [_chunk_stats(j) for j in jobs]
    turnover = np.concatenate([t for t, _ in parts])
    netting = np.concatenate([z for _, z in parts])
    return summarize(turnover), summarize(netting)


# -- correlation of combined halves -----------------------------------------


@dataclass(frozen=True)
class HalvesCheck:
    """Level-k group correlation against the doubling map of level k-1."""

    level: int
    rho_prev: float
    rho_level: float
    predicted: float
    diff_mean: float
    diff_stderr: float

    @property
    def z(self) -> float:
        return self.diff_mean / self.diff_stderr if self.diff_stderr > 0 else math.inf


def _pooled_adjacent_corr(sums: np.ndarray) -> float:
    """Pearson correlation pooled over paths, stocks and adjacent group pairs."""
    u = sums[:, 0::2].ravel()
    v = sums[:, 1::2].ravel()
    return float(np.corrcoef(u, v)[0, 1])


def halves_correlation_check(config: EnsembleConfig, max_level: int, batches: int = 50) -> list[HalvesCheck]:
    """Compare pooled correlations of adjacent level-k groups with the
    doubling map applied to level k-1, for k = 1..max_level.

    Standard errors come from batch means over disjoint blocks of paths.
    """
    n_levels = _levels(config.n_streams)
    if not 1 <= max_level < n_levels:
        raise ValueError(f"max_level must lie in [1, {n_levels - 1}]")
    if config.paths < 2 * batches:
        raise ValueError("need at least two paths per batch")
    edges = np.linspace(0, config.paths, batches + 1).astype(int)
    per_batch = np.empty((batches, max_level + 1))
    for b in range(batches):
        e = generate_ensemble(config, int(edges[b]), int(edges[b + 1]))
        for k, sums in enumerate(_group_sums(e.trades)):
            if k > max_level:
                break
            per_batch[b, k] = _pooled_adjacent_corr(sums)

    out = []
    for k in range(1, max_level + 1):
        pred = np.array([correlation_of_halves(g) for g in per_batch[:, k - 1]])
        diff = per_batch[:, k] - pred
        out.append(
            HalvesCheck(
                level=k,
                rho_prev=float(per_batch[:, k - 1].mean()),
                rho_level=float(per_batch[:, k].mean()),
                predicted=float(pred.mean()),
                diff_mean=float(diff.mean()),
                diff_stderr=float(diff.std(ddof=1) / math.sqrt(batches)),
            )
        )
    return out


def gaussian_turnover_oracle(tau: float, c0: float, n: int) -> float:
    """Expected turnover of n crossed Gaussian streams: tau * sqrt((1 + (n-1) c0) / n)."""
    return tau * math.sqrt((1.0 + (n - 1) * c0) / n)


def pairwise_raw_correlations(e: AlphaEnsemble) -> np.ndarray:
    """Mean off-diagonal sample correlation of the raw draws, one per path."""
    x = e.raw if e.raw is not None else e.trades
    n = x.shape[1]
    out = np.empty(x.shape[0])
    iu = np.triu_indices(n, 1)
    for p in range(x.shape[0]):
        out[p] = np.corrcoef(x[p])[iu].mean()
    return out


def curve_from_points(points: Sequence[tuple[int, float, float]]) -> TurnoverCurve:
    n, m, s = zip(*points) if points else ((), (), ())
    return TurnoverCurve(list(n), list(m), list(s))
