import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from corrnet import MarketPanel, PairMatrix, ReturnsPanel

DATA_DIR = Path(__file__).parent / "data"


def make_dates(n, start=dt.date(2019, 1, 1)):
    return tuple(start + dt.timedelta(days=i) for i in range(n))


def make_panel(prices, symbols=None):
    prices = np.asarray(prices, dtype=float)
    if symbols is None:
        symbols = tuple(f"S{j + 1:02d}" for j in range(prices.shape[1]))
    return MarketPanel(
        make_dates(prices.shape[0]), tuple(symbols), prices, np.zeros(prices.shape, dtype=bool)
    )


def make_returns(values, symbols=None):
    values = np.asarray(values, dtype=float)
    if symbols is None:
        symbols = tuple(f"S{j + 1:02d}" for j in range(values.shape[1]))
    return ReturnsPanel(make_dates(values.shape[0]), tuple(symbols), values)


def random_distance_matrix(rng, n, lo=0.05, hi=1.95):
    """Random symmetric matrix in [0, 2] with a zero diagonal (not metric)."""
    upper = rng.uniform(lo, hi, size=(n, n))
    d = np.triu(upper, k=1)
    d = d + d.T
    symbols = tuple(f"S{j + 1:02d}" for j in range(n))
    return PairMatrix(symbols, d, kind="distance")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
