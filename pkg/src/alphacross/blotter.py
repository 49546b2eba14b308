"""Dollar-level trade blotters and the internal crossing engine.

All dollar amounts are held as integer cents so that crossing (which is
nothing but addition and ``min``) is exact. Ratios are floats.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Mapping, Sequence

CENTS_PER_DOLLAR = 100


def to_cents(dollars) -> int:
    """Convert a dollar amount (str, int, float or Decimal) to integer cents.

    Raises ValueError for amounts with more than two decimal places.
    """
    try:
        value = Decimal(str(dollars).strip())
    except InvalidOperation:
        raise ValueError(f"not a dollar amount: {dollars!r}") from None
    if not value.is_finite():
        raise ValueError(f"not a finite dollar amount: {dollars!r}")
    cents = value * CENTS_PER_DOLLAR
    if cents != cents.to_integral_value():
        raise ValueError(f"more than two decimal places: {dollars!r}")
    return int(cents)


def to_dollars(cents: int) -> int | float:
    """Cents to a JSON-friendly dollar number (int when whole)."""
    whole, rem = divmod(cents, CENTS_PER_DOLLAR)
    if rem == 0:
        return whole
    return cents / CENTS_PER_DOLLAR


@dataclass(frozen=True)
class Blotter:
    """Desired signed trades of one stream, keyed by symbol.

    ``trades`` maps symbol to signed cents (positive buys, negative sells);
    ``investment`` is the stream's investment level in cents.
    """

    stream_id: str
    investment: int
    trades: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.investment <= 0:
            raise ValueError(f"investment must be positive, got {self.investment}")
        object.__setattr__(self, "trades", dict(self.trades))

    @classmethod
    def from_dollars(cls, stream_id: str, investment, trades: Mapping[str, object] | None = None) -> "Blotter":
        return cls(
            stream_id,
            to_cents(investment),
            {sym: to_cents(amt) for sym, amt in (trades or {}).items()},
        )

    @property
    def gross(self) -> int:
        """Total traded amount in cents, D_i."""
        return sum(abs(v) for v in self.trades.values())

    @property
    def turnover(self) -> float:
        return self.gross / self.investment

    def buys(self) -> dict[str, int]:
        return {s: v for s, v in self.trades.items() if v > 0}

    def sells(self) -> dict[str, int]:
        """Sell amounts as positive cents."""
        return {s: -v for s, v in self.trades.items() if v < 0}

    def to_dollar_dict(self) -> dict[str, int | float]:
        return {s: to_dollars(v) for s, v in sorted(self.trades.items())}


@dataclass(frozen=True)
class CrossOutcome:
    net: Blotter
    delta: int
    delta_max: int
    xi: float
    rho: float
    combined_turnover: float
    degenerate: bool

    def to_json_dict(self) -> dict:
        return {
            "delta": to_dollars(self.delta),
            "delta_max": to_dollars(self.delta_max),
            "xi": self.xi,
            "rho": self.rho,
            "turnover": self.combined_turnover,
            "net": self.net.to_dollar_dict(),
            "degenerate": self.degenerate,
        }


def load_blotters(path, investment_per_stream) -> list[Blotter]:
    """Read a ``stream,symbol,dollars`` CSV into one blotter per stream.

    Repeated (stream, symbol) rows are summed. Streams come back in order of
    first appearance.
    """
    investment = to_cents(investment_per_stream)
    if investment <= 0:
        raise ValueError("investment_per_stream must be positive")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"blotter file not found: {path}")

    per_stream: dict[str, dict[str, int]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and [c.strip().lower() for c in row] == ["stream", "symbol", "dollars"]:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            stream, symbol, dollars = (c.strip() for c in row)
            if not stream or not symbol:
                raise ValueError(f"{path}:{lineno}: empty stream or symbol")
            try:
                cents = to_cents(dollars)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            book = per_stream.setdefault(stream, defaultdict(int))
            book[symbol] += cents

    if not per_stream:
        raise ValueError(f"{path}: no streams")
    return [Blotter(sid, investment, dict(book)) for sid, book in per_stream.items()]


def gross_and_turnover(b: Blotter) -> tuple[int | float, float]:
    """Return (gross dollars, turnover) of a blotter."""
    return to_dollars(b.gross), b.turnover


def _net_trades(blotters: Iterable[Blotter]) -> dict[str, int]:
    net: dict[str, int] = defaultdict(int)
    for b in blotters:
        for sym, amt in b.trades.items():
            net[sym] += amt
    return dict(net)


def crossed_amount(t1: Mapping[str, int], t2: Mapping[str, int]) -> int:
    """Dollars (cents) traded in opposite directions by two books."""
    delta = 0
    for sym in t1.keys() & t2.keys():
        a, b = t1[sym], t2[sym]
        # min(buy_1, sell_2) + min(sell_1, buy_2); one of the two is always 0
        delta += min(max(a, 0), max(-b, 0)) + min(max(-a, 0), max(b, 0))
    return delta


def cross_pair(b1: Blotter, b2: Blotter) -> CrossOutcome:
    """Cross two blotters held in separate aggregation units.

    Opposing flows in the same symbol are matched internally; same-direction
    flows add. When either book is empty nothing can cross and the outcome is
    flagged ``degenerate`` with xi = 0, rho = 1.
    """
    delta = crossed_amount(b1.trades, b2.trades)
    delta_max = min(b1.gross, b2.gross)
    net = Blotter(f"{b1.stream_id}+{b2.stream_id}", b1.investment + b2.investment, _net_trades((b1, b2)))
    if delta_max == 0:
        xi, degenerate = 0.0, True
    else:
        xi, degenerate = delta / delta_max, False
    return CrossOutcome(
        net=net,
        delta=delta,
        delta_max=delta_max,
        xi=xi,
        rho=1.0 - 2.0 * xi,
        combined_turnover=net.gross / net.investment,
        degenerate=degenerate,
    )


def cross_many(blotters: Sequence[Blotter]) -> Blotter:
    """Net any number of blotters at once (signed sum per symbol)."""
    if not blotters:
        raise ValueError("cross_many needs at least one blotter")
    if len(blotters) == 1:
        return blotters[0]
    return Blotter(
        "+".join(b.stream_id for b in blotters),
        sum(b.investment for b in blotters),
        _net_trades(blotters),
    )


def estimate_savings(crossed_per_stream, spread_bps, days, streams) -> float:
    """Spread cost avoided by crossing, in dollars.

    The full quoted spread is saved on each crossed dollar since both sides
    skip the market.
    """
    args = dict(crossed_per_stream=crossed_per_stream, spread_bps=spread_bps, days=days, streams=streams)
    for name, value in args.items():
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
    # Decimal keeps e.g. 12 bps * $1M at exactly $1,200
    total = Decimal(str(days)) * Decimal(str(streams)) * Decimal(str(crossed_per_stream)) * Decimal(str(spread_bps))
    total = total / Decimal(10_000)
    return int(total) if total == total.to_integral_value() else float(total)
