"""Correlation-based networks of multivariate return series."""

__version__ = "0.1.0"

from .corr import CorrelationMatrix, CorrelationSurface, correlation_surface, mean_offdiag, pearson_matrix
from .errors import ConfigError, CorrnetError, DataError, DegenerateEntropyError
from .filtgraph import FilteredGraph, GraphKind, degree_profile, is_planar, mst, pmfg
from .mapeq import Partition, Weighting, detect_communities, map_equation, one_module_codelength
from .netinfo import LinkMIResult, link_mi_from_counts, link_mutual_information, rolling_mi
from .panel import FillPolicy, Month, PricePanel, ReturnPanel, ReturnWindow, load_prices, log_returns, window
from .pipeline import PipelineConfig, run_pipeline
from .spectral import EigenSeries, SpectralSummary, eigen_decompose, eigen_series, rmt_upper_bound
from .stats import WelchResult, mst_vs_pmfg, welch_ttest
from .synth import FactorSpec, gen_blocks, gen_equicorrelated, gen_regime_shift, to_prices

__all__ = [
    "CorrelationMatrix", "CorrelationSurface", "correlation_surface", "mean_offdiag", "pearson_matrix",
    "ConfigError", "CorrnetError", "DataError", "DegenerateEntropyError",
    "FilteredGraph", "GraphKind", "degree_profile", "is_planar", "mst", "pmfg",
    "Partition", "Weighting", "detect_communities", "map_equation", "one_module_codelength",
    "LinkMIResult", "link_mi_from_counts", "link_mutual_information", "rolling_mi",
    "FillPolicy", "Month", "PricePanel", "ReturnPanel", "ReturnWindow", "load_prices", "log_returns", "window",
    "PipelineConfig", "run_pipeline",
    "EigenSeries", "SpectralSummary", "eigen_decompose", "eigen_series", "rmt_upper_bound",
    "WelchResult", "mst_vs_pmfg", "welch_ttest",
    "FactorSpec", "gen_blocks", "gen_equicorrelated", "gen_regime_shift", "to_prices",
]
