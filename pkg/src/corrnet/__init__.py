"""Correlation networks, spectra and noise thresholds for panels of market indices."""

from .errors import AlignmentError, CorrnetError, DegenerateSeriesError, IngestError
from .ingest import MarketPanel, RawSeries, align_calendars, load_panel, write_panel_csv
from .returns import (
    PairMatrix,
    ReturnsPanel,
    distance_matrix,
    log_returns,
    pearson_matrix,
    spearman_matrix,
    write_pair_matrix_csv,
)
from .graph import (
    DEFAULT_GRID,
    MergeEvent,
    SweepResult,
    ThresholdGraph,
    build_graph,
    components,
    dendrogram_equivalence,
    single_linkage_cut,
    sweep,
)
from .surrogate import (
    SplitMix64,
    SurrogateEnvelope,
    build_envelope,
    mix_seed,
    permute_surrogate,
    shift_surrogate,
)
from .spectra import (
    ModePartition,
    MpLaw,
    NoiseBandReport,
    Spectrum,
    benchmark_correlation,
    eigen_decompose,
    mode_portfolio_returns,
    mp_bounds,
    mp_density,
    noise_band_report,
    second_mode_partition,
)
from .embed import Embedding, embedding_stress, mds_embed
from .synth import SynthSpec, generate

__version__ = "0.1.0"
