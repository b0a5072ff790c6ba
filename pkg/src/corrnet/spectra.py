"""Eigen-analysis of correlation matrices and random-matrix noise bands."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeriesError
from .returns import PairMatrix, ReturnsPanel
from .surrogate import SurrogateEnvelope

NEAR_ZERO = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues with orthonormal eigenvectors (column k <-> lambda_k)."""

    symbols: tuple[str, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=float)
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        n = len(self.symbols)
        if w.shape != (n,) or v.shape != (n, n):
            raise ValueError("spectrum shape mismatch")
        if np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be sorted descending")


@dataclass(frozen=True)
class MpLaw:
    """Eigenvalue bounds of the random-data limit law for aspect ratio Q = L/N."""

    q: float
    sigma: float
    lambda_minus: float
    lambda_plus: float


def eigen_decompose(corr: PairMatrix) -> Spectrum:
    """Full symmetric eigendecomposition with a reproducible sign convention.

    Each eigenvector is flipped so its largest-magnitude entry (lowest index
    on ties) is positive.
    """
    if corr.kind != "correlation":
        raise ValueError("eigen_decompose expects a correlation matrix")
    if not np.isfinite(corr.values).all():
        raise ValueError("correlation matrix contains non-finite entries")
    w, v = np.linalg.eigh(corr.values)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        lead = int(np.argmax(np.abs(col)))  # argmax takes the lowest index on ties
        if col[lead] < 0:
            v[:, k] = -col
    return Spectrum(corr.symbols, w, v)


def mp_bounds(q: float, sigma: float = 1.0) -> MpLaw:
    """Support bounds sigma^2 (1 + 1/Q +- 2 sqrt(1/Q)); requires Q > 1."""
    if q <= 1:
        raise ValueError("Q must be greater than one")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s2 = sigma * sigma
    lam_minus = s2 * (1.0 + 1.0 / q - 2.0 * math.sqrt(1.0 / q))
    lam_plus = s2 * (1.0 + 1.0 / q + 2.0 * math.sqrt(1.0 / q))
    return MpLaw(float(q), float(sigma), lam_minus, lam_plus)


def mp_density(lam, law: MpLaw):
    """Limit density of random-data eigenvalues; exactly zero off the support."""
    lam_arr = np.asarray(lam, dtype=float)
    inside = (lam_arr >= law.lambda_minus) & (lam_arr <= law.lambda_plus)
    safe = np.where(inside, lam_arr, 1.0)
    rho = (
        law.q
        / (2.0 * np.pi * law.sigma**2)
        * np.sqrt(np.maximum((law.lambda_plus - safe) * (safe - law.lambda_minus), 0.0))
        / safe
    )
    out = np.where(inside, rho, 0.0)
    return float(out) if np.isscalar(lam) else out


@dataclass(frozen=True)
class BandClassification:
    rank: int  # 1-based, by descending eigenvalue
    value: float
    inside_analytic: bool | None
    inside_empirical: bool


@dataclass(frozen=True)
class NoiseBandReport:
    analytic_low: float | None
    analytic_high: float | None
    empirical_low: float
    empirical_high: float
    entries: tuple[BandClassification, ...]
    lambda1: BandClassification
    lambda2: BandClassification | None


def noise_band_report(
    spectrum: Spectrum, law: MpLaw | None, env: SurrogateEnvelope
) -> NoiseBandReport:
    """Classify each eigenvalue against the analytic and the surrogate bands."""
    n = len(spectrum.eigenvalues)
    if env.n_symbols != n:
        raise ValueError(f"envelope was built for {env.n_symbols} symbols, spectrum has {n}")
    entries = []
    for i, value in enumerate(spectrum.eigenvalues):
        value = float(value)
        inside_analytic = (
            None if law is None else bool(law.lambda_minus <= value <= law.lambda_plus)
        )
        inside_empirical = bool(env.eig_min <= value <= env.eig_max)
        entries.append(BandClassification(i + 1, value, inside_analytic, inside_empirical))
    return NoiseBandReport(
        analytic_low=None if law is None else law.lambda_minus,
        analytic_high=None if law is None else law.lambda_plus,
        empirical_low=env.eig_min,
        empirical_high=env.eig_max,
        entries=tuple(entries),
        lambda1=entries[0],
        lambda2=entries[1] if n >= 2 else None,
    )


def mode_portfolio_returns(returns: ReturnsPanel, spectrum: Spectrum, k: int) -> np.ndarray:
    """Daily returns of the portfolio weighted by the k-th eigenvector (k is 1-based)."""
    n = len(spectrum.symbols)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}")
    if returns.symbols != spectrum.symbols:
        raise ValueError("returns and spectrum must cover the same symbols")
    return returns.values @ spectrum.eigenvectors[:, k - 1]


def benchmark_correlation(portfolio, benchmark) -> float:
    """Pearson correlation between a portfolio return series and a benchmark."""
    p = np.asarray(portfolio, dtype=float)
    b = np.asarray(benchmark, dtype=float)
    if p.shape != b.shape or p.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    if p.size < 3:
        raise ValueError("need at least 3 observations")
    if np.ptp(p) == 0.0 or np.ptp(b) == 0.0:
        raise DegenerateSeriesError("zero-variance input series")
    return float(np.corrcoef(p, b)[0, 1])


@dataclass(frozen=True)
class ModePartition:
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    near_zero: tuple[str, ...]
    magnitudes: dict[str, float]


def second_mode_partition(spectrum: Spectrum) -> ModePartition:
    """Split symbols by the sign of their second-eigenvector entry."""
    if len(spectrum.symbols) < 2:
        raise ValueError("need at least 2 symbols")
    e2 = spectrum.eigenvectors[:, 1]
    positive, negative, near_zero = [], [], []
    magnitudes = {}
    for sym, value in zip(spectrum.symbols, e2):
        magnitudes[sym] = float(abs(value))
        if abs(value) < NEAR_ZERO:
            near_zero.append(sym)
        elif value > 0:
            positive.append(sym)
        else:
            negative.append(sym)
    return ModePartition(tuple(positive), tuple(negative), tuple(near_zero), magnitudes)


def write_spectrum_csv(spectrum: Spectrum, path: str | Path) -> None:
    """One eigenvalue per row, then the eigenvector matrix (row i = symbol i)."""
    lines = [f"{v:.17g}" for v in spectrum.eigenvalues]
    for row in spectrum.eigenvectors:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def noise_band_to_json_dict(report: NoiseBandReport) -> dict:
    def entry(e: BandClassification | None) -> dict | None:
        if e is None:
            return None
        return {
            "rank": e.rank,
            "value": e.value,
            "inside_analytic": e.inside_analytic,
            "inside_empirical": e.inside_empirical,
        }

    return {
        "analytic_band": {"low": report.analytic_low, "high": report.analytic_high},
        "empirical_band": {"low": report.empirical_low, "high": report.empirical_high},
        "eigenvalues": [entry(e) for e in report.entries],
        "lambda1": entry(report.lambda1),
        "lambda2": entry(report.lambda2),
    }


def write_noise_band_json(report: NoiseBandReport, path: str | Path) -> None:
    payload = json.dumps(noise_band_to_json_dict(report), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def write_second_mode_tsv(spectrum: Spectrum, path: str | Path) -> None:
    """Bar-chart data for the second eigenvector: symbol, sign, magnitude."""
    part = second_mode_partition(spectrum)
    sign_of = {s: "+" for s in part.positive}
    sign_of.update({s: "-" for s in part.negative})
    sign_of.update({s: "0" for s in part.near_zero})
    lines = ["symbol\tsign\tmagnitude"]
    for sym in spectrum.symbols:
        lines.append(f"{sym}\t{sign_of[sym]}\t{part.magnitudes[sym]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
