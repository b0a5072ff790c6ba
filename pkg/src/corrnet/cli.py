"""Batch command-line front end for the full analysis pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import graph as graph_mod
from .embed import coords_as_dict, mds_embed, write_coords_csv
from .errors import CorrnetError
from .ingest import MarketPanel, align_calendars, load_panel, write_panel_csv
from .returns import (
    ReturnsPanel,
    distance_matrix,
    log_returns,
    pearson_matrix,
    spearman_matrix,
    write_pair_matrix_csv,
)
from .spectra import (
    benchmark_correlation,
    eigen_decompose,
    mode_portfolio_returns,
    mp_bounds,
    noise_band_report,
    second_mode_partition,
    write_noise_band_json,
    write_second_mode_tsv,
    write_spectrum_csv,
)
from .surrogate import build_envelope, write_envelope_json
from .synth import generate, load_synth_spec, write_labels_json

COMMANDS = ("ingest", "corr", "graph", "sweep", "surrogate", "spectra", "embed", "synth", "report")


@dataclass
class RunConfig:
    inputs: tuple[Path, ...] = ()
    out_dir: Path = Path(".")
    corr_kind: str = "spearman"
    grid: tuple[float, ...] = graph_mod.DEFAULT_GRID
    n_sims: int = 1000
    base_seed: int = 0
    quantile: float = 0.01
    benchmark: Path | None = None
    synth_spec: Path | None = None
    threads: int | None = None


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse 'start:stop:step' into an inclusive, strictly increasing grid."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid bounds in {text!r}")
    values = []
    k = 0
    while True:
        v = round(start + k * step, 10)
        if v > stop + 1e-12:
            break
        values.append(min(v, stop))
        k += 1
    return tuple(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrnet",
        description="Correlation networks, spectra and noise thresholds for index panels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--input", nargs="+", type=Path, default=[], help="panel CSV file(s)")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--corr", choices=("spearman", "pearson"), default="spearman")
        p.add_argument("--grid", type=str, default="0.1:2.0:0.1", help="threshold grid start:stop:step")
        p.add_argument("--sims", type=int, default=1000, help="number of surrogate simulations")
        p.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
        p.add_argument("--quantile", type=float, default=0.01, help="noise-threshold quantile")
        p.add_argument("--benchmark", type=Path, default=None, help="benchmark price CSV")
        p.add_argument("--synth", type=Path, default=None, help="synthetic market spec JSON")
        p.add_argument("--threads", type=int, default=None, help="overrides CORRNET_THREADS")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        inputs=tuple(args.input),
        out_dir=args.out,
        corr_kind=args.corr,
        grid=parse_grid(args.grid),
        n_sims=args.sims,
        base_seed=args.seed,
        quantile=args.quantile,
        benchmark=args.benchmark,
        synth_spec=args.synth,
        threads=args.threads,
    )


def _say(path: Path) -> None:
    print(f"wrote {path}")


def _load_source(cfg: RunConfig) -> tuple[MarketPanel, dict[str, int] | None]:
    if cfg.synth_spec is not None:
        panel, labels = generate(load_synth_spec(cfg.synth_spec))
        return panel, labels
    if not cfg.inputs:
        raise CorrnetError("either --input or --synth is required")
    panel = align_calendars(load_panel(list(cfg.inputs)))
    return panel, None


def _correlation(returns: ReturnsPanel, kind: str):
    return spearman_matrix(returns) if kind == "spearman" else pearson_matrix(returns)


def _benchmark_returns(path: Path) -> tuple[list, np.ndarray]:
    series = load_panel([path])
    if len(series) != 1:
        raise CorrnetError(f"benchmark file must contain exactly one symbol, got {len(series)}")
    s = series[0]
    if len(s.dates) < 2:
        raise CorrnetError("benchmark series too short")
    values = np.diff(np.log(s.prices))
    return list(s.dates[1:]), values


def _benchmark_corr(cfg: RunConfig, returns: ReturnsPanel, portfolio: np.ndarray) -> float:
    bench_dates, bench_values = _benchmark_returns(cfg.benchmark)
    bench_map = dict(zip(bench_dates, bench_values))
    common = [i for i, d in enumerate(returns.dates) if d in bench_map]
    if len(common) < 3:
        raise CorrnetError("fewer than 3 overlapping dates with the benchmark")
    aligned_bench = np.array([bench_map[returns.dates[i]] for i in common])
    return benchmark_correlation(portfolio[common], aligned_bench)


def cmd_ingest(cfg: RunConfig) -> None:
    panel, labels = _load_source(cfg)
    out = cfg.out_dir / "panel.csv"
    write_panel_csv(panel, out)
    _say(out)
    if labels is not None:
        write_labels_json(labels, "synthetic", cfg.out_dir / "labels.json")
        _say(cfg.out_dir / "labels.json")


def cmd_synth(cfg: RunConfig) -> None:
    if cfg.synth_spec is None:
        raise CorrnetError("synth requires --synth spec.json")
    panel, labels = generate(load_synth_spec(cfg.synth_spec))
    write_panel_csv(panel, cfg.out_dir / "panel.csv")
    _say(cfg.out_dir / "panel.csv")
    write_labels_json(labels, "synthetic", cfg.out_dir / "labels.json")
    _say(cfg.out_dir / "labels.json")


def cmd_corr(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    corr = _correlation(log_returns(panel), cfg.corr_kind)
    write_pair_matrix_csv(corr, cfg.out_dir / "correlation.csv")
    _say(cfg.out_dir / "correlation.csv")
    write_pair_matrix_csv(distance_matrix(corr), cfg.out_dir / "distance.csv")
    _say(cfg.out_dir / "distance.csv")


def cmd_graph(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    dist = distance_matrix(_correlation(log_returns(panel), cfg.corr_kind))
    gdir = cfg.out_dir / "graphs"
    gdir.mkdir(parents=True, exist_ok=True)
    for t in cfg.grid:
        g = graph_mod.build_graph(dist, t)
        graph_mod.write_graph_json(g, gdir / f"graph_T{t:g}.json")
        graph_mod.write_graph_dot(g, gdir / f"graph_T{t:g}.dot")
    _say(gdir)


def cmd_sweep(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    dist = distance_matrix(_correlation(log_returns(panel), cfg.corr_kind))
    result = graph_mod.sweep(dist, cfg.grid)
    graph_mod.write_sweep_json(result, cfg.out_dir / "sweep.json")
    _say(cfg.out_dir / "sweep.json")


def cmd_surrogate(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    env = build_envelope(
        log_returns(panel),
        n_sims=cfg.n_sims,
        base_seed=cfg.base_seed,
        percentile=cfg.quantile,
        method=cfg.corr_kind,
        threads=cfg.threads,
    )
    write_envelope_json(env, cfg.out_dir / "envelope.json")
    _say(cfg.out_dir / "envelope.json")


def _mp_law_for(returns: ReturnsPanel):
    length, n = returns.values.shape
    return mp_bounds(length / n) if length > n else None


def cmd_spectra(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    returns = log_returns(panel)
    corr = _correlation(returns, cfg.corr_kind)
    spectrum = eigen_decompose(corr)
    env = build_envelope(
        returns,
        n_sims=cfg.n_sims,
        base_seed=cfg.base_seed,
        percentile=cfg.quantile,
        method=cfg.corr_kind,
        threads=cfg.threads,
    )
    report = noise_band_report(spectrum, _mp_law_for(returns), env)
    write_spectrum_csv(spectrum, cfg.out_dir / "spectrum.csv")
    _say(cfg.out_dir / "spectrum.csv")
    write_noise_band_json(report, cfg.out_dir / "noise_band.json")
    _say(cfg.out_dir / "noise_band.json")
    write_second_mode_tsv(spectrum, cfg.out_dir / "second_mode.tsv")
    _say(cfg.out_dir / "second_mode.tsv")


def cmd_embed(cfg: RunConfig) -> None:
    panel, _ = _load_source(cfg)
    dist = distance_matrix(_correlation(log_returns(panel), cfg.corr_kind))
    write_coords_csv(mds_embed(dist), cfg.out_dir / "coords.csv")
    _say(cfg.out_dir / "coords.csv")


def cmd_report(cfg: RunConfig) -> None:
    panel, labels = _load_source(cfg)
    out = cfg.out_dir

    write_panel_csv(panel, out / "panel.csv")
    if labels is not None:
        write_labels_json(labels, "synthetic", out / "labels.json")

    returns = log_returns(panel)
    corr = _correlation(returns, cfg.corr_kind)
    dist = distance_matrix(corr)
    write_pair_matrix_csv(corr, out / "correlation.csv")
    write_pair_matrix_csv(dist, out / "distance.csv")

    env = build_envelope(
        returns,
        n_sims=cfg.n_sims,
        base_seed=cfg.base_seed,
        percentile=cfg.quantile,
        method=cfg.corr_kind,
        threads=cfg.threads,
    )
    write_envelope_json(env, out / "envelope.json")

    sweep_result = graph_mod.sweep(dist, cfg.grid)
    graph_mod.write_sweep_json(sweep_result, out / "sweep.json")

    spectrum = eigen_decompose(corr)
    law = _mp_law_for(returns)
    band = noise_band_report(spectrum, law, env)
    write_spectrum_csv(spectrum, out / "spectrum.csv")
    write_noise_band_json(band, out / "noise_band.json")
    write_second_mode_tsv(spectrum, out / "second_mode.tsv")

    embedding = mds_embed(dist)
    write_coords_csv(embedding, out / "coords.csv")

    coords = coords_as_dict(embedding)
    gdir = out / "graphs"
    gdir.mkdir(parents=True, exist_ok=True)
    for t in cfg.grid:
        g = graph_mod.build_graph(dist, t)
        graph_mod.write_graph_json(g, gdir / f"graph_T{t:g}.json", coords)
        graph_mod.write_graph_dot(g, gdir / f"graph_T{t:g}.dot")

    partition = second_mode_partition(spectrum)
    bench_corr = None
    if cfg.benchmark is not None:
        portfolio = mode_portfolio_returns(returns, spectrum, 1)
        bench_corr = _benchmark_corr(cfg, returns, portfolio)

    length, n = returns.values.shape
    summary = {
        "schema": 1,
        "corr": cfg.corr_kind,
        "n_symbols": n,
        "n_dates": len(panel.dates),
        "n_returns": length,
        "base_seed": cfg.base_seed,
        "n_sims": cfg.n_sims,
        "quantile": cfg.quantile,
        "noise_threshold": env.noise_threshold,
        "eig_band": {"min": env.eig_min, "max": env.eig_max},
        "mp": None
        if law is None
        else {
            "q": law.q,
            "sigma": law.sigma,
            "lambda_minus": law.lambda_minus,
            "lambda_plus": law.lambda_plus,
        },
        "lambda1": {
            "value": band.lambda1.value,
            "inside_analytic": band.lambda1.inside_analytic,
            "inside_empirical": band.lambda1.inside_empirical,
        },
        "lambda2": None
        if band.lambda2 is None
        else {
            "value": band.lambda2.value,
            "inside_analytic": band.lambda2.inside_analytic,
            "inside_empirical": band.lambda2.inside_empirical,
        },
        "component_counts": {
            f"{t:g}": len(set(m.values()))
            for t, m in zip(sweep_result.thresholds, sweep_result.memberships)
        },
        "full_connection": sweep_result.full_connection,
        "second_mode": {
            "positive": list(partition.positive),
            "negative": list(partition.negative),
            "near_zero": list(partition.near_zero),
        },
        "benchmark_correlation": bench_corr,
        "embedding": {
            "stress": embedding.stress,
            "eigenvalue_shares": [float(s) for s in embedding.eigenvalue_shares],
            "negative_mass": embedding.negative_mass,
        },
    }
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    for name in (
        "panel.csv", "correlation.csv", "distance.csv", "envelope.json", "sweep.json",
        "spectrum.csv", "noise_band.json", "second_mode.tsv", "coords.csv", "summary.json",
    ):
        _say(out / name)


_DISPATCH = {
    "ingest": cmd_ingest,
    "corr": cmd_corr,
    "graph": cmd_graph,
    "sweep": cmd_sweep,
    "surrogate": cmd_surrogate,
    "spectra": cmd_spectra,
    "embed": cmd_embed,
    "synth": cmd_synth,
    "report": cmd_report,
}


def run(command: str, config: RunConfig) -> int:
    """Execute one pipeline command; returns a process exit status."""
    if command not in _DISPATCH:
        raise ValueError(f"unknown command {command!r}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        _DISPATCH[command](config)
    except Exception as exc:  # contract: machine-readable error on any failure
        payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(json.dumps({"error": {"type": "ValueError", "message": str(exc)}}), file=sys.stderr)
        return 2
    return run(args.command, config)


if __name__ == "__main__":
    raise SystemExit(main())
