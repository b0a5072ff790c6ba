"""Threshold asset graphs, connected components and cluster evolution sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .returns import PairMatrix

# Sweep grid at 0.1 granularity over the full distance range.
DEFAULT_GRID: tuple[float, ...] = tuple(round(0.1 * k, 10) for k in range(1, 21))


@dataclass(frozen=True)
class ThresholdGraph:
    """Graph keeping the index pairs with distance at or below the threshold.

    Symbols without any edge are excluded from ``nodes``. Component labels
    are canonical: the member with the lowest symbol index names the
    component.
    """

    threshold: float
    symbols: tuple[str, ...]
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    component_of: dict[str, str]


@dataclass(frozen=True)
class MergeEvent:
    threshold: float
    merged: tuple[str, ...]  # labels of the previously distinct clusters


@dataclass(frozen=True)
class SweepResult:
    """Cluster evolution across an increasing threshold grid."""

    thresholds: tuple[float, ...]
    memberships: tuple[dict[str, str], ...]
    merge_events: tuple[MergeEvent, ...]
    first_connection: dict[str, float | None]
    full_connection: float | None


def build_graph(dist: PairMatrix, threshold: float) -> ThresholdGraph:
    """Keep edges with d <= threshold (inclusive) and drop isolated symbols."""
    if dist.kind != "distance":
        raise ValueError("build_graph expects a distance matrix")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    symbols = dist.symbols
    n = len(symbols)
    iu, ju = np.triu_indices(n, k=1)
    weights = dist.values[iu, ju]
    keep = weights <= threshold
    pairs = list(zip(iu[keep].tolist(), ju[keep].tolist(), weights[keep].tolist()))

    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    touched: set[int] = set()
    for i, j, _ in pairs:
        touched.add(i)
        touched.add(j)
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    members: dict[int, list[int]] = {}
    for i in sorted(touched):
        members.setdefault(find(i), []).append(i)

    component_of = {
        symbols[i]: symbols[min(group)] for group in members.values() for i in group
    }
    nodes = tuple(symbols[i] for i in sorted(touched))
    edges = tuple((symbols[i], symbols[j], w) for i, j, w in pairs)
    return ThresholdGraph(float(threshold), symbols, nodes, edges, component_of)


def components(graph: ThresholdGraph) -> list[list[str]]:
    """Connected components as symbol lists, ordered by their canonical label."""
    index = {s: i for i, s in enumerate(graph.symbols)}
    groups: dict[str, list[str]] = {}
    for node, label in graph.component_of.items():
        groups.setdefault(label, []).append(node)
    out = []
    for label in sorted(groups, key=index.__getitem__):
        out.append(sorted(groups[label], key=index.__getitem__))
    return out


def sweep(dist: PairMatrix, grid: tuple[float, ...] | list[float] = DEFAULT_GRID) -> SweepResult:
    """Track components across increasing thresholds.

    Every symbol starts as its own cluster; a merge event records each
    threshold at which two or more previously distinct clusters join.
    """
    grid = tuple(float(t) for t in grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 2.0:
        raise ValueError("grid must lie within [0, 2]")
    if dist.kind != "distance":
        raise ValueError("sweep expects a distance matrix")

    symbols = dist.symbols
    index = {s: i for i, s in enumerate(symbols)}
    cluster_of = {s: s for s in symbols}  # singleton start
    memberships: list[dict[str, str]] = []
    events: list[MergeEvent] = []
    first_connection: dict[str, float | None] = {s: None for s in symbols}
    full_connection: float | None = None

    for t in grid:
        graph = build_graph(dist, t)
        memberships.append(dict(graph.component_of))
        for comp in components(graph):
            priors = sorted({cluster_of[m] for m in comp}, key=index.__getitem__)
            if len(priors) > 1:
                events.append(MergeEvent(t, tuple(priors)))
            for m in comp:
                cluster_of[m] = graph.component_of[m]
        for node in graph.nodes:
            if first_connection[node] is None:
                first_connection[node] = t
        if (
            full_connection is None
            and len(graph.nodes) == len(symbols)
            and len(set(graph.component_of.values())) == 1
        ):
            full_connection = t

    return SweepResult(grid, tuple(memberships), tuple(events), first_connection, full_connection)


def dendrogram_equivalence(dist: PairMatrix) -> np.ndarray:
    """Single-linkage merge heights; cutting at T reproduces threshold components."""
    if dist.kind != "distance":
        raise ValueError("expects a distance matrix")
    condensed = squareform(dist.values, checks=False)
    z = linkage(condensed, method="single")
    return z[:, 2].copy()


def single_linkage_cut(dist: PairMatrix, threshold: float) -> list[list[str]]:
    """Flat single-linkage clusters at cut height ``threshold`` (all symbols)."""
    if dist.kind != "distance":
        raise ValueError("expects a distance matrix")
    condensed = squareform(dist.values, checks=False)
    z = linkage(condensed, method="single")
    flat = fcluster(z, t=threshold, criterion="distance")
    groups: dict[int, list[str]] = {}
    for sym, lab in zip(dist.symbols, flat):
        groups.setdefault(int(lab), []).append(sym)
    index = {s: i for i, s in enumerate(dist.symbols)}
    out = [sorted(g, key=index.__getitem__) for g in groups.values()]
    out.sort(key=lambda g: index[g[0]])
    return out


def graph_to_json_dict(
    graph: ThresholdGraph, coords: dict[str, tuple[float, float, float]] | None = None
) -> dict:
    nodes = []
    for sym in graph.nodes:
        node: dict = {"id": sym, "component": graph.component_of[sym]}
        if coords is not None and sym in coords:
            node["coords"] = [float(c) for c in coords[sym]]
        nodes.append(node)
    edges = [{"a": a, "b": b, "d": d} for a, b, d in graph.edges]
    return {"threshold": graph.threshold, "nodes": nodes, "edges": edges}


def write_graph_json(
    graph: ThresholdGraph,
    path: str | Path,
    coords: dict[str, tuple[float, float, float]] | None = None,
) -> None:
    payload = json.dumps(graph_to_json_dict(graph, coords), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def write_graph_dot(graph: ThresholdGraph, path: str | Path) -> None:
    """DOT export with the distance as the edge length attribute."""
    lines = ["graph asset_graph {"]
    for sym in graph.nodes:
        lines.append(f'  "{sym}" [component="{graph.component_of[sym]}"];')
    for a, b, d in graph.edges:
        lines.append(f'  "{a}" -- "{b}" [len={d:.17g}];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sweep_to_json_dict(result: SweepResult) -> dict:
    return {
        "thresholds": list(result.thresholds),
        "memberships": [dict(m) for m in result.memberships],
        "component_counts": [len(set(m.values())) for m in result.memberships],
        "merge_events": [
            {"threshold": e.threshold, "merged": list(e.merged)} for e in result.merge_events
        ],
        "first_connection": dict(result.first_connection),
        "full_connection": result.full_connection,
    }


def write_sweep_json(result: SweepResult, path: str | Path) -> None:
    payload = json.dumps(sweep_to_json_dict(result), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")
