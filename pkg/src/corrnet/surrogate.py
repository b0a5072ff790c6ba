"""Randomized surrogate panels and the noise thresholds derived from them.

Each simulation cyclically rotates every return column by an independent
random offset, which destroys cross-series correlation while keeping every
marginal distribution (and each series' own autocorrelation) intact. All
randomness flows through a SplitMix64 stream so the same (base_seed, k)
pair produces the same surrogate in any implementation; the exact mixing
constants are documented in the README.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .returns import ReturnsPanel, _check_variance, _corr_core

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

HIST_BINS = 200  # 0.01-wide bins over the distance range [0, 2]

_POOL_QUANTILES = (0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99)


def _mix64(x: int) -> int:
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def mix_seed(base_seed: int, k: int) -> int:
    """Derive the seed of simulation k from the run's base seed.

    seed_k = splitmix64_finalizer((base_seed + (k+1) * 0x9E3779B97F4A7C15) mod 2^64)
    """
    return _mix64((base_seed + (k + 1) * _GOLDEN) & _MASK64)


class SplitMix64:
    """Minimal 64-bit generator; the full update rule is spelled out in the README."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)


def _column_offsets(seed: int, n_rows: int, n_cols: int) -> list[int]:
    gen = SplitMix64(seed)
    return [1 + gen.next_u64() % (n_rows - 1) for _ in range(n_cols)]


def _column_permutations(seed: int, n_rows: int, n_cols: int) -> list[list[int]]:
    gen = SplitMix64(seed)
    perms = []
    for _ in range(n_cols):
        idx = list(range(n_rows))
        for i in range(n_rows - 1, 0, -1):
            j = gen.next_u64() % (i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        perms.append(idx)
    return perms


def shift_surrogate(returns: ReturnsPanel, seed: int) -> ReturnsPanel:
    """Rotate each column cyclically by an offset drawn uniformly from 1..L-1."""
    length = len(returns.dates)
    if length < 2:
        raise ValueError("need at least 2 observations to shift")
    out = np.empty_like(returns.values)
    for j, off in enumerate(_column_offsets(seed, length, out.shape[1])):
        out[:, j] = np.roll(returns.values[:, j], off)
    return ReturnsPanel(returns.dates, returns.symbols, out)


def permute_surrogate(returns: ReturnsPanel, seed: int) -> ReturnsPanel:
    """Fully shuffle each column independently (sensitivity-analysis variant)."""
    length = len(returns.dates)
    if length < 2:
        raise ValueError("need at least 2 observations to permute")
    out = np.empty_like(returns.values)
    for j, perm in enumerate(_column_permutations(seed, length, out.shape[1])):
        out[:, j] = returns.values[perm, j]
    return ReturnsPanel(returns.dates, returns.symbols, out)


@dataclass(frozen=True)
class DistancePoolSummary:
    count: int
    min: float
    max: float
    percentiles: dict[str, float]
    histogram: tuple[int, ...]  # HIST_BINS counts over [0, 2]


@dataclass(frozen=True)
class SurrogateEnvelope:
    """Pooled surrogate distance distribution plus the eigenvalue band."""

    n_sims: int
    n_symbols: int
    base_seed: int
    quantile: float
    noise_threshold: float
    eig_min: float
    eig_max: float
    distance_pool: DistancePoolSummary
    mode: str
    method: str


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument wins, then CORRNET_THREADS, then 1."""
    if threads is None:
        threads = int(os.environ.get("CORRNET_THREADS", "1"))
    return max(1, threads)


def build_envelope(
    returns: ReturnsPanel,
    n_sims: int = 1000,
    base_seed: int = 0,
    percentile: float = 0.01,
    mode: str = "rotate",
    method: str = "spearman",
    threads: int | None = None,
) -> SurrogateEnvelope:
    """Run surrogate simulations and summarize the resulting noise envelope.

    The noise threshold is the ``percentile`` quantile of all pooled
    off-diagonal surrogate distances: distances below it essentially never
    arise from decorrelated data. Results are independent of the thread
    count; simulation k depends only on mix_seed(base_seed, k).
    """
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    if not 0.0 < percentile < 1.0:
        raise ValueError("percentile must be in (0, 1)")
    if mode not in ("rotate", "permute"):
        raise ValueError(f"unknown surrogate mode {mode!r}")
    if method not in ("spearman", "pearson"):
        raise ValueError(f"unknown correlation method {method!r}")
    length, n = returns.values.shape
    if length < 2:
        raise ValueError("need at least 2 observations")

    _check_variance(returns.values, returns.symbols)
    # Ranks commute with per-column permutations, so rank once up front.
    base = rankdata(returns.values, axis=0) if method == "spearman" else returns.values
    iu, ju = np.triu_indices(n, k=1)

    def one(k: int) -> tuple[np.ndarray, float, float]:
        seed_k = mix_seed(base_seed, k)
        arr = np.empty_like(base)
        if mode == "rotate":
            for j, off in enumerate(_column_offsets(seed_k, length, n)):
                arr[:, j] = np.roll(base[:, j], off)
        else:
            for j, perm in enumerate(_column_permutations(seed_k, length, n)):
                arr[:, j] = base[perm, j]
        corr = _corr_core(arr)
        eigs = np.linalg.eigvalsh(corr)
        return 1.0 - corr[iu, ju], float(eigs[0]), float(eigs[-1])

    workers = resolve_threads(threads)
    if workers == 1 or n_sims == 1:
        results = [one(k) for k in range(n_sims)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(n_sims)))

    pooled = np.concatenate([r[0] for r in results])
    eig_min = min(r[1] for r in results)
    eig_max = max(r[2] for r in results)
    noise_threshold = float(np.quantile(pooled, percentile))
    percentiles = {
        f"p{round(q * 100):02d}": float(np.quantile(pooled, q)) for q in _POOL_QUANTILES
    }
    counts, _ = np.histogram(pooled, bins=HIST_BINS, range=(0.0, 2.0))
    summary = DistancePoolSummary(
        count=int(pooled.size),
        min=float(pooled.min()),
        max=float(pooled.max()),
        percentiles=percentiles,
        histogram=tuple(int(c) for c in counts),
    )
    return SurrogateEnvelope(
        n_sims=n_sims,
        n_symbols=n,
        base_seed=base_seed,
        quantile=percentile,
        noise_threshold=noise_threshold,
        eig_min=eig_min,
        eig_max=eig_max,
        distance_pool=summary,
        mode=mode,
        method=method,
    )


def envelope_to_json_dict(env: SurrogateEnvelope) -> dict:
    return {
        "n_sims": env.n_sims,
        "n_symbols": env.n_symbols,
        "base_seed": env.base_seed,
        "quantile": env.quantile,
        "noise_threshold": env.noise_threshold,
        "eig_min": env.eig_min,
        "eig_max": env.eig_max,
        "mode": env.mode,
        "method": env.method,
        "distance_pool": {
            "count": env.distance_pool.count,
            "min": env.distance_pool.min,
            "max": env.distance_pool.max,
            "percentiles": dict(env.distance_pool.percentiles),
        },
        "histogram": {
            "lo": 0.0,
            "hi": 2.0,
            "bin_width": 2.0 / HIST_BINS,
            "counts": list(env.distance_pool.histogram),
        },
    }


def write_envelope_json(env: SurrogateEnvelope, path: str | Path) -> None:
    payload = json.dumps(envelope_to_json_dict(env), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")
