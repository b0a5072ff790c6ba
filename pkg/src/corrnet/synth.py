"""Synthetic market panels with planted structure, used as pipeline ground truth.

All generators are Gaussian factor models, so target correlations have a
closed form: a symbol loading a common factor with weight a has pairwise
correlation a^2 with its peers. Prices are exponentiated cumulative returns
from base 100; a spec with n_days produces n_days log-returns (n_days + 1
panel dates).
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorrnetError
from .ingest import MarketPanel

DAILY_VOL = 0.01  # return scale; correlations are unaffected


@dataclass(frozen=True)
class SynthSpec:
    kind: str  # "blocks" | "single_factor" | "timezone"
    n_days: int
    seed: int
    blocks: tuple[tuple[int, float], ...] | None = None
    inter_corr: float = 0.0
    n_symbols: int | None = None
    factor_loading: float | None = None
    lag_coupling: float | None = None

    def __post_init__(self):
        if self.kind not in ("blocks", "single_factor", "timezone"):
            raise ValueError(f"unknown synth kind {self.kind!r}")
        if self.n_days < 2:
            raise ValueError("n_days must be >= 2")
        if self.blocks is not None:
            object.__setattr__(
                self, "blocks", tuple((int(s), float(c)) for s, c in self.blocks)
            )
            for size, intra in self.blocks:
                if size < 2:
                    raise ValueError("block sizes must be >= 2")
                if not 0.0 <= intra < 1.0:
                    raise ValueError("intra-block correlation must be in [0, 1)")
        if not 0.0 <= self.inter_corr < 1.0:
            raise ValueError("inter-block correlation must be in [0, 1)")
        for name in ("factor_loading", "lag_coupling"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")


def _weekday_calendar(n: int, start: dt.date = dt.date(2000, 1, 3)) -> tuple[dt.date, ...]:
    days = []
    day = start
    while len(days) < n:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return tuple(days)


def _symbol_names(n: int) -> tuple[str, ...]:
    width = max(2, len(str(n)))
    return tuple(f"S{i + 1:0{width}d}" for i in range(n))


def _blocks_returns(rng: np.random.Generator, spec: SynthSpec) -> tuple[np.ndarray, list[int]]:
    if not spec.blocks:
        raise ValueError("blocks kind needs a blocks sequence")
    for _, intra in spec.blocks:
        if spec.inter_corr > intra:
            raise CorrnetError(
                "infeasible correlation targets: inter-block correlation "
                f"{spec.inter_corr} exceeds intra-block correlation {intra}"
            )
    length = spec.n_days
    beta = np.sqrt(spec.inter_corr)
    global_factor = rng.standard_normal(length)
    columns = []
    labels = []
    for b, (size, intra) in enumerate(spec.blocks):
        gamma = np.sqrt(intra - spec.inter_corr)
        delta = np.sqrt(1.0 - intra)
        block_factor = rng.standard_normal(length)
        for _ in range(size):
            noise = rng.standard_normal(length)
            columns.append(beta * global_factor + gamma * block_factor + delta * noise)
            labels.append(b)
    return np.column_stack(columns) * DAILY_VOL, labels


def _single_factor_returns(rng: np.random.Generator, spec: SynthSpec) -> tuple[np.ndarray, list[int]]:
    if spec.n_symbols is None or spec.factor_loading is None:
        raise ValueError("single_factor kind needs n_symbols and factor_loading")
    length = spec.n_days
    loading = spec.factor_loading
    resid = np.sqrt(1.0 - loading**2)
    global_factor = rng.standard_normal(length)
    noise = rng.standard_normal((length, spec.n_symbols))
    values = loading * global_factor[:, None] + resid * noise
    return values * DAILY_VOL, [0] * spec.n_symbols


def _timezone_returns(rng: np.random.Generator, spec: SynthSpec) -> tuple[np.ndarray, list[int]]:
    if spec.n_symbols is None or spec.factor_loading is None or spec.lag_coupling is None:
        raise ValueError("timezone kind needs n_symbols, factor_loading and lag_coupling")
    if spec.n_symbols < 4:
        raise ValueError("timezone kind needs at least 4 symbols")
    length = spec.n_days
    loading = spec.factor_loading
    resid = np.sqrt(1.0 - loading**2)
    mu = spec.lag_coupling
    # Late-session group sees the global factor partly with a one-day lag.
    norm = np.hypot(1.0 - mu, mu)
    global_factor = rng.standard_normal(length + 1)
    same_day = global_factor[1:]
    lagged = ((1.0 - mu) * global_factor[1:] + mu * global_factor[:-1]) / norm
    n_early = spec.n_symbols - spec.n_symbols // 2
    noise = rng.standard_normal((length, spec.n_symbols))
    columns = []
    labels = []
    for j in range(spec.n_symbols):
        factor = same_day if j < n_early else lagged
        columns.append(loading * factor + resid * noise[:, j])
        labels.append(0 if j < n_early else 1)
    return np.column_stack(columns) * DAILY_VOL, labels


def generate(spec: SynthSpec) -> tuple[MarketPanel, dict[str, int]]:
    """Build a synthetic panel and the planted group label per symbol."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "blocks":
        values, labels = _blocks_returns(rng, spec)
    elif spec.kind == "single_factor":
        values, labels = _single_factor_returns(rng, spec)
    else:
        values, labels = _timezone_returns(rng, spec)

    cum = np.vstack([np.zeros((1, values.shape[1])), np.cumsum(values, axis=0)])
    prices = 100.0 * np.exp(cum)
    dates = _weekday_calendar(spec.n_days + 1)
    symbols = _symbol_names(values.shape[1])
    panel = MarketPanel(dates, symbols, prices, np.zeros(prices.shape, dtype=bool))
    return panel, dict(zip(symbols, labels))


def load_synth_spec(path: str | Path) -> SynthSpec:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {
        "kind", "n_days", "seed", "blocks", "inter_corr",
        "n_symbols", "factor_loading", "lag_coupling",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown synth spec keys: {sorted(unknown)}")
    if "blocks" in raw and raw["blocks"] is not None:
        raw["blocks"] = tuple((int(s), float(c)) for s, c in raw["blocks"])
    return SynthSpec(**raw)


def write_labels_json(labels: dict[str, int], kind: str, path: str | Path) -> None:
    payload = json.dumps({"kind": kind, "groups": labels}, sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")
