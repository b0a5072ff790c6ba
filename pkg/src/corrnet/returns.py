"""Log-returns, rank/linear correlation matrices and the distance transform."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateSeriesError
from .ingest import MarketPanel


@dataclass(frozen=True)
class ReturnsPanel:
    """Daily log-returns; row t is the return into ``dates[t]``."""

    dates: tuple[dt.date, ...]
    symbols: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if values.shape != (len(self.dates), len(self.symbols)):
            raise ValueError("returns shape mismatch")
        if values.size and not np.isfinite(values).all():
            raise ValueError("returns must be finite")


@dataclass(frozen=True)
class PairMatrix:
    """Symmetric symbol-by-symbol matrix, either correlations or distances."""

    symbols: tuple[str, ...]
    values: np.ndarray
    kind: str  # "correlation" | "distance"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        n = len(self.symbols)
        if values.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {values.shape}")
        if not np.array_equal(values, values.T):
            raise ValueError("matrix must be exactly symmetric")
        diag = np.diagonal(values)
        if self.kind == "correlation":
            if not np.all(diag == 1.0):
                raise ValueError("correlation matrix needs a unit diagonal")
            if values.size and (values.min() < -1.0 or values.max() > 1.0):
                raise ValueError("correlations must lie in [-1, 1]")
        elif self.kind == "distance":
            if not np.all(diag == 0.0):
                raise ValueError("distance matrix needs a zero diagonal")
            if values.size and (values.min() < 0.0 or values.max() > 2.0):
                raise ValueError("distances must lie in [0, 2]")
        else:
            raise ValueError(f"unknown PairMatrix kind {self.kind!r}")


def log_returns(panel: MarketPanel) -> ReturnsPanel:
    """ln(P_t) - ln(P_{t-1}) per symbol; forward-filled repeats give exact zeros."""
    if len(panel.dates) < 2:
        raise ValueError("need at least 2 dates to compute returns")
    values = np.diff(np.log(panel.prices), axis=0)
    return ReturnsPanel(panel.dates[1:], panel.symbols, values)


def _check_variance(values: np.ndarray, symbols: tuple[str, ...]) -> None:
    spans = np.ptp(values, axis=0)
    bad = [symbols[j] for j in np.flatnonzero(spans == 0.0)]
    if bad:
        raise DegenerateSeriesError(f"zero-variance series: {', '.join(bad)}")


def _corr_core(data: np.ndarray) -> np.ndarray:
    c = np.corrcoef(data, rowvar=False)
    np.clip(c, -1.0, 1.0, out=c)
    c = (c + c.T) / 2.0  # restore exact symmetry after BLAS round-off
    np.fill_diagonal(c, 1.0)
    return c


def spearman_matrix(returns: ReturnsPanel) -> PairMatrix:
    """Spearman rank correlation matrix (average ranks for ties)."""
    if len(returns.dates) < 3:
        raise ValueError("need at least 3 observations for a correlation matrix")
    _check_variance(returns.values, returns.symbols)
    ranks = rankdata(returns.values, axis=0, method="average")
    return PairMatrix(returns.symbols, _corr_core(ranks), kind="correlation")


def pearson_matrix(returns: ReturnsPanel) -> PairMatrix:
    """Plain Pearson correlation matrix, the linear baseline."""
    if len(returns.dates) < 3:
        raise ValueError("need at least 3 observations for a correlation matrix")
    _check_variance(returns.values, returns.symbols)
    return PairMatrix(returns.symbols, _corr_core(returns.values), kind="correlation")


def distance_matrix(corr: PairMatrix) -> PairMatrix:
    """Elementwise distance d = 1 - c with an exactly zero diagonal."""
    if corr.kind != "correlation":
        raise ValueError("distance_matrix expects a correlation matrix")
    d = 1.0 - corr.values
    np.fill_diagonal(d, 0.0)
    return PairMatrix(corr.symbols, d, kind="distance")


def write_pair_matrix_csv(matrix: PairMatrix, path: str | Path) -> None:
    """Dense CSV export: header row of symbols, 17 significant digits."""
    lines = [",".join(matrix.symbols)]
    for row in matrix.values:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
