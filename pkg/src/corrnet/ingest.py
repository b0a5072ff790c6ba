"""Loading of ragged per-symbol price calendars and alignment to a common grid.

Input CSV contract: UTF-8, comma separated, header ``date,SYM1,SYM2,...``,
first column ISO-8601 dates, cells are decimal prices, an empty cell means
the market did not trade that day.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, IngestError

DEFAULT_MISSING_FRAC = 0.30


@dataclass(frozen=True)
class RawSeries:
    """Price observations for one symbol on its own trading calendar."""

    symbol: str
    dates: tuple[dt.date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        prices.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != len(prices):
            raise ValueError(f"{self.symbol}: {len(self.dates)} dates vs {len(prices)} prices")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError(f"{self.symbol}: dates must be strictly increasing")
        if prices.size and not (np.isfinite(prices).all() and (prices > 0).all()):
            raise ValueError(f"{self.symbol}: prices must be positive and finite")


@dataclass(frozen=True)
class MarketPanel:
    """Gap-free price panel on a shared calendar, with per-cell fill provenance.

    ``filled[t, j]`` is True when ``prices[t, j]`` was forward-filled rather
    than observed. The first row is always fully observed.
    """

    dates: tuple[dt.date, ...]
    symbols: tuple[str, ...]
    prices: np.ndarray
    filled: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        filled = np.asarray(self.filled, dtype=bool)
        for a in (prices, filled):
            a.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "filled", filled)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "symbols", tuple(self.symbols))
        shape = (len(self.dates), len(self.symbols))
        if prices.shape != shape or filled.shape != shape:
            raise ValueError(f"panel shape mismatch: {prices.shape} vs {shape}")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("panel dates must be strictly increasing")
        if prices.size:
            if not (np.isfinite(prices).all() and (prices > 0).all()):
                raise ValueError("panel prices must be positive and finite")
            if filled[0].any():
                raise ValueError("first panel row must be fully observed")


def load_panel(paths: Sequence[str | Path] | str | Path) -> list[RawSeries]:
    """Parse one or more panel CSV files into per-symbol raw series.

    Empty cells are recorded as absent observations. Malformed dates,
    non-positive prices and duplicate dates are rejected with their
    row/column location.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    series: list[RawSeries] = []
    seen: set[str] = set()
    for path in paths:
        series.extend(_load_file(Path(path), seen))
    return series


def _load_file(path: Path, seen_symbols: set[str]) -> list[RawSeries]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if not header or header[0].strip().lower() != "date":
            raise IngestError(f"{path}: header must start with 'date'", row=1, column="date")
        symbols = [cell.strip() for cell in header[1:]]
        if len(symbols) < 1:
            raise IngestError(f"{path}: no symbol columns", row=1)
        for sym in symbols:
            if not sym:
                raise IngestError(f"{path}: blank symbol name in header", row=1)
            if sym in seen_symbols:
                raise IngestError(f"{path}: duplicate symbol {sym!r}", row=1, column=sym)
            seen_symbols.add(sym)

        obs: dict[str, dict[dt.date, float]] = {sym: {} for sym in symbols}
        for row in reader:
            lineno = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise IngestError(
                    f"{path}: expected {len(header)} cells, got {len(row)}", row=lineno
                )
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise IngestError(
                    f"{path}: malformed date {row[0]!r}", row=lineno, column="date"
                ) from None
            for sym, cell in zip(symbols, row[1:]):
                cell = cell.strip()
                if not cell:
                    continue
                try:
                    price = float(cell)
                except ValueError:
                    raise IngestError(
                        f"{path}: malformed price {cell!r}", row=lineno, column=sym
                    ) from None
                if not math.isfinite(price) or price <= 0:
                    raise IngestError(
                        f"{path}: non-positive price {cell!r}", row=lineno, column=sym
                    )
                if day in obs[sym]:
                    raise IngestError(
                        f"{path}: duplicate date {day} for symbol", row=lineno, column=sym
                    )
                obs[sym][day] = price

    out = []
    for sym in symbols:
        days = sorted(obs[sym])
        out.append(RawSeries(sym, tuple(days), np.array([obs[sym][d] for d in days])))
    return out


def align_calendars(
    series: Sequence[RawSeries], missing_frac: float = DEFAULT_MISSING_FRAC
) -> MarketPanel:
    """Align raw series to a common grid using the missing-day rule.

    A date is deleted when the fraction of symbols without an observation is
    strictly above ``missing_frac`` (a tie at the cutoff keeps the date).
    Remaining gaps are forward-filled from the previous kept date; values on
    deleted dates are discarded entirely. The panel starts at the earliest
    kept date on which every symbol has an actual observation, so no column
    ever begins with a filled value.
    """
    if len(series) < 2:
        raise ValueError("alignment needs at least 2 series")
    if not 0.0 < missing_frac < 1.0:
        raise ValueError("missing_frac must be in (0, 1)")

    for s in series:
        if len(s.dates) == 0:
            raise AlignmentError(f"symbol {s.symbol!r} has no observations")
    first_sym = max(series, key=lambda s: s.dates[0])
    last_sym = min(series, key=lambda s: s.dates[-1])
    if first_sym.dates[0] > last_sym.dates[-1]:
        raise AlignmentError(
            "no common date range: "
            f"{first_sym.symbol!r} starts {first_sym.dates[0]}, "
            f"{last_sym.symbol!r} ends {last_sym.dates[-1]}"
        )

    symbols = [s.symbol for s in series]
    maps = [dict(zip(s.dates, s.prices)) for s in series]
    n = len(series)
    union = sorted(set().union(*(s.dates for s in series)))

    kept: list[dt.date] = []
    missing_at: dict[dt.date, list[int]] = {}
    for day in union:
        missing = [j for j, m in enumerate(maps) if day not in m]
        if len(missing) / n > missing_frac:
            continue
        kept.append(day)
        missing_at[day] = missing

    start = next((i for i, day in enumerate(kept) if not missing_at[day]), None)
    if start is None:
        best = min(kept, key=lambda d: len(missing_at[d]), default=None)
        offenders = [symbols[j] for j in missing_at[best]] if best is not None else symbols
        raise AlignmentError(
            "no kept date is observed by every symbol; "
            f"closest candidate {best} is missing {', '.join(offenders)}"
        )
    dates = kept[start:]

    prices = np.empty((len(dates), n))
    filled = np.zeros((len(dates), n), dtype=bool)
    for t, day in enumerate(dates):
        for j, m in enumerate(maps):
            if day in m:
                prices[t, j] = m[day]
            else:
                prices[t, j] = prices[t - 1, j]
                filled[t, j] = True
    return MarketPanel(tuple(dates), tuple(symbols), prices, filled)


def fills_path_for(path: str | Path) -> Path:
    """Sibling path carrying the 0/1 forward-fill flags of a panel CSV."""
    path = Path(path)
    return path.with_name(path.stem + ".fills.csv")


def write_panel_csv(panel: MarketPanel, path: str | Path) -> None:
    """Write a panel as CSV plus the sibling ``.fills.csv`` flag matrix."""
    path = Path(path)
    header = "date," + ",".join(panel.symbols)
    lines = [header]
    for day, row in zip(panel.dates, panel.prices):
        lines.append(str(day) + "," + ",".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [header]
    for day, row in zip(panel.dates, panel.filled):
        lines.append(str(day) + "," + ",".join("1" if v else "0" for v in row))
    fills_path_for(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
