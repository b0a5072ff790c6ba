"""Classical metric scaling of a distance matrix into low-dimensional coordinates."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .returns import PairMatrix

logger = logging.getLogger(__name__)

_AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class Embedding:
    symbols: tuple[str, ...]
    coords: np.ndarray  # (N, dims), centered
    eigenvalue_shares: np.ndarray  # retained spectral mass over total positive mass
    stress: float
    negative_mass: float  # magnitude of clamped negative spectrum (non-Euclidean share)
    degenerate: bool


def embedding_stress(distances: np.ndarray, coords: np.ndarray) -> float:
    """Normalized residual between input distances and embedded distances."""
    diff = coords[:, None, :] - coords[None, :, :]
    embedded = np.sqrt((diff**2).sum(axis=2))
    iu, ju = np.triu_indices(len(coords), k=1)
    num = ((distances[iu, ju] - embedded[iu, ju]) ** 2).sum()
    den = (distances[iu, ju] ** 2).sum()
    return float(np.sqrt(num / den)) if den > 0 else 0.0


def mds_embed(dist: PairMatrix, dims: int = 3) -> Embedding:
    """Torgerson scaling: double-center the squared distances and project.

    Negative eigenvalues of the centered matrix (distances need not be
    Euclidean) are clamped to zero and their total magnitude reported.
    """
    if dist.kind != "distance":
        raise ValueError("mds_embed expects a distance matrix")
    if dims < 1:
        raise ValueError("dims must be >= 1")
    n = len(dist.symbols)
    d = dist.values
    center = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * center @ (d**2) @ center
    b = (b + b.T) / 2.0
    w, v = np.linalg.eigh(b)
    w = w[::-1]
    v = v[:, ::-1]

    k = min(dims, n)
    lam = np.clip(w[:k], 0.0, None)
    coords = v[:, :k] * np.sqrt(lam)
    if dims > k:
        coords = np.hstack([coords, np.zeros((n, dims - k))])
        lam = np.concatenate([lam, np.zeros(dims - k)])
    coords = coords - coords.mean(axis=0)

    total_positive = float(w[w > 0].sum())
    shares = lam / total_positive if total_positive > 0 else np.zeros(dims)
    negative_mass = float(-w[w < 0].sum())
    degenerate = n < dims + 1
    if degenerate:
        logger.warning("only %d symbols for a %d-dimensional embedding; padding with zeros", n, dims)
    return Embedding(
        symbols=dist.symbols,
        coords=coords,
        eigenvalue_shares=shares,
        stress=embedding_stress(d, coords),
        negative_mass=negative_mass,
        degenerate=degenerate,
    )


def coords_as_dict(embedding: Embedding) -> dict[str, tuple[float, ...]]:
    return {
        sym: tuple(float(c) for c in row)
        for sym, row in zip(embedding.symbols, embedding.coords)
    }


def write_coords_csv(embedding: Embedding, path: str | Path) -> None:
    dims = embedding.coords.shape[1]
    names = [_AXIS_NAMES[i] if i < 3 else f"axis{i + 1}" for i in range(dims)]
    lines = ["symbol," + ",".join(names)]
    for sym, row in zip(embedding.symbols, embedding.coords):
        lines.append(sym + "," + ",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
