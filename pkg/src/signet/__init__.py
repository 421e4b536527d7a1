"""Sign-separated (anti vs. positive) stock correlation networks over sliding windows."""

from .correlation import CorrMatrix, CorrSummary, correlation_matrix, summarize
from .errors import SignetError
from .graphmetrics import (assortativity, avg_clustering, avg_path_length, components, network_metrics,
                           node_metrics)
from .keystocks import bin_metric_by_return, build_collection, ranking_overlap, top_k, window_return
from .marketdata import IndexSeries, PricePanel, ReturnPanel, compute_returns, ingest_index, ingest_prices
from .netbuild import SignedNetwork, build_anti, build_fully_connected, build_positive
from .pipeline import RunConfig, robustness_sweep, run, run_panel
from .synthmarket import FactorModelSpec, generate_panel, plant_crash
from .tailstats import empirical_pdf, fit_gpd, fit_power_law
from .windows import WindowParams, WindowSpec, eligible_stocks, enumerate_windows

__version__ = "0.1.0"
