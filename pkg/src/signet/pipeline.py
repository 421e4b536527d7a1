"""Window-by-window orchestration. Each window is analysed independently;
the per-window reports are then aggregated into the output tables."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import correlation, graphmetrics, keystocks, netbuild, tailstats
from .errors import ConfigError, SignetError
from .marketdata import IndexSeries, PricePanel, ReturnPanel, compute_returns, ingest_index, ingest_prices
from .windows import WindowParams, WindowSpec, window_specs

logger = logging.getLogger(__name__)

THREADS_ENV = "SIGNET_THREADS"
METRICS = ("assortativity", "avg_clustering", "avg_path_len")


@dataclass
class RunConfig:
    prices: Path | None = None
    index: Path | None = None
    window_length: int = 26
    step: int = 15
    theta: float = 0.0
    k: int = keystocks.DEFAULT_K
    tail_fraction: float = tailstats.DEFAULT_TAIL_FRACTION
    n_bins: int = tailstats.DEFAULT_BINS
    fit_range: tuple[float, float] | None = None
    return_bins: tuple[float, ...] | None = None
    n_return_bins: int = keystocks.DEFAULT_RETURN_BINS
    out_dir: Path = Path("signet-out")
    jobs: int = 1
    baseline: bool = False
    dump_corr: bool = False
    dump_pdf: bool = False
    dump_edges: bool = False

    def __post_init__(self):
        self.params  # validates L, dt, theta
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0 < self.tail_fraction <= 1:
            raise ConfigError(f"tail_fraction must lie in (0, 1], got {self.tail_fraction}")
        if self.n_bins < 2:
            raise ConfigError(f"n_bins must be >= 2, got {self.n_bins}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.fit_range is not None and not (0 < self.fit_range[0] < self.fit_range[1]):
            raise ConfigError(f"fit_range must be 0 < low < high, got {self.fit_range}")
        if self.return_bins is not None and (
            len(self.return_bins) < 2 or any(b <= a for a, b in zip(self.return_bins, self.return_bins[1:]))
        ):
            raise ConfigError("return_bins must be strictly increasing with at least two edges")

    @property
    def params(self) -> WindowParams:
        return WindowParams(self.window_length, self.step, self.theta)

    def analysis_fields(self) -> dict[str, Any]:
        """Parameters that change results (not paths, not parallelism)."""
        skip = {"prices", "index", "out_dir", "jobs"}
        out = {}
        for f in dataclasses.fields(self):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class AnalysisSettings:
    theta: float
    k: int
    tail_fraction: float
    n_bins: int
    fit_range: tuple[float, float] | None
    baseline: bool
    dump_dir: str | None
    dump_corr: bool
    dump_pdf: bool
    dump_edges: bool

    @classmethod
    def from_config(cls, config: RunConfig) -> "AnalysisSettings":
        dumping = config.dump_corr or config.dump_pdf or config.dump_edges
        return cls(config.theta, config.k, config.tail_fraction, config.n_bins, config.fit_range,
                   config.baseline, str(config.out_dir) if dumping else None,
                   config.dump_corr, config.dump_pdf, config.dump_edges)


@dataclass(frozen=True)
class WindowJob:
    m: int
    start_day: int
    end_day: int
    start_date: str
    end_date: str
    symbols: tuple[str, ...]
    returns: np.ndarray
    index_return: float | None
    index_note: str | None


@dataclass
class KindReport:
    kind: str
    n_nodes: int = 0
    edge_count: int = 0
    empty: bool = True
    removed: list[str] = field(default_factory=list)
    assortativity: float | None = None
    avg_clustering: float | None = None
    avg_path_len: float | None = None
    lcc_size: int = 0
    n_components: int = 0
    undefined: dict[str, str] = field(default_factory=dict)
    gpd: dict[str, Any] | None = None
    power_law: dict[str, Any] | None = None
    ranking: list[list[Any]] = field(default_factory=list)
    tie_at_cutoff: bool = False


@dataclass
class WindowReport:
    m: int
    start_date: str
    end_date: str
    n_eligible: int
    status: str = "ok"
    error: str | None = None
    excluded_constant: list[str] = field(default_factory=list)
    corr: dict[str, Any] | None = None
    kinds: dict[str, KindReport] = field(default_factory=dict)
    top_k_overlap: int | None = None
    index_return: float | None = None
    index_note: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class RunSummary:
    out_dir: str
    config_hash: str
    windows: int
    ok: int
    failed: list[dict[str, Any]]
    collections: dict[str, dict[str, int]]
    aggregates: dict[str, dict[str, float | None]]

    @property
    def exit_status(self) -> int:
        return 1 if self.failed else 0


def _kind_report(net: netbuild.SignedNetwork, settings: AnalysisSettings, m: int) -> KindReport:
    rep = KindReport(net.kind, n_nodes=net.n, edge_count=net.edge_count, empty=net.is_empty,
                     removed=list(net.removed))
    if net.is_empty:
        rep.undefined = {name: "empty network" for name in METRICS}
        rep.undefined.update(gpd="empty network", power_law="empty network")
        return rep
    nm = graphmetrics.network_metrics(net)
    rep.assortativity, rep.avg_clustering, rep.avg_path_len = nm.assortativity, nm.avg_clustering, nm.avg_path_len
    rep.lcc_size, rep.n_components = nm.lcc_size, nm.n_components
    rep.undefined = dict(nm.undefined)

    s = net.strengths
    try:
        g = tailstats.fit_gpd(s, settings.tail_fraction)
        rep.gpd = {"xi": g.xi, "sigma": g.sigma, "threshold": g.threshold, "n_exceed": g.n_exceed,
                   "ci_low": g.ci_low, "ci_high": g.ci_high, "heavy_tail": g.heavy_tail,
                   "tail_fraction": settings.tail_fraction}
    except SignetError as exc:
        rep.undefined["gpd"] = str(exc)
    try:
        pdf = tailstats.empirical_pdf(s, settings.n_bins)
        pl = tailstats.fit_power_law(pdf, settings.fit_range)
        rep.power_law = {"exponent": pl.exponent, "log_amplitude": pl.log_amplitude,
                         "fit_low": pl.fit_range[0], "fit_high": pl.fit_range[1],
                         "residual": pl.residual, "n_points": pl.n_points}
        if settings.dump_pdf:
            d = Path(settings.dump_dir) / "pdf"
            d.mkdir(parents=True, exist_ok=True)
            tailstats.write_pdf(pdf, d / f"w{m:04d}_{net.kind}.csv")
    except (SignetError, ValueError) as exc:
        rep.undefined["power_law"] = str(exc)

    ranking = keystocks.top_k(net, settings.k, m)
    rep.ranking = [[sym, st] for sym, st in ranking.entries]
    rep.tie_at_cutoff = ranking.tie_at_cutoff
    return rep


def analyze_window(job: WindowJob, settings: AnalysisSettings) -> WindowReport:
    """Full per-window analysis. Any engine error becomes a failed report."""
    report = WindowReport(job.m, job.start_date, job.end_date, len(job.symbols),
                          index_return=job.index_return, index_note=job.index_note)
    try:
        corr = correlation.correlation_matrix(job.returns, job.symbols)
        report.excluded_constant = list(corr.excluded)
        report.corr = asdict(correlation.summarize(corr))
        if settings.dump_corr:
            d = Path(settings.dump_dir) / "corr"
            d.mkdir(parents=True, exist_ok=True)
            correlation.write_corr_binary(corr, d / f"w{job.m:04d}.bin")
            with open(d / f"w{job.m:04d}_summary.csv", "w", encoding="utf-8") as fh:
                fh.write(",".join(report.corr) + "\n")
                fh.write(",".join(_fmt(v) for v in report.corr.values()) + "\n")
        kinds = list(netbuild.KINDS) + (["fully_connected"] if settings.baseline else [])
        for kind in kinds:
            net = netbuild.build_network(corr, kind, settings.theta)
            report.kinds[kind] = _kind_report(net, settings, job.m)
            if settings.dump_edges:
                d = Path(settings.dump_dir) / "edges"
                d.mkdir(parents=True, exist_ok=True)
                netbuild.write_edge_list(net, d / f"w{job.m:04d}_{kind}_edges.csv")
                netbuild.write_node_table(net, d / f"w{job.m:04d}_{kind}_nodes.csv")
        a, p = report.kinds["anti"], report.kinds["positive"]
        report.top_k_overlap = len({r[0] for r in a.ranking} & {r[0] for r in p.ranking})
    except Exception as exc:  # a bad window must never abort the run
        logger.warning("window %d failed: %s", job.m, exc)
        report.status = "failed"
        report.error = f"{type(exc).__name__}: {exc}"
        report.kinds = {}
        report.corr = None
    return report


def _run_job(args):
    return analyze_window(*args)


def effective_jobs(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, requested)


def make_jobs(panel: PricePanel, returns: ReturnPanel, params: WindowParams,
              index: IndexSeries | None = None) -> list[WindowJob]:
    jobs = []
    for spec in window_specs(panel, params):
        block = correlation.window_returns(returns, spec)
        if index is not None:
            wr = keystocks.window_return(index, spec, panel.calendar)
            r_idx = wr.value
            note = wr.reason or ("boundary substituted: %s..%s" % (wr.open_date, wr.close_date) if wr.substituted else None)
        else:
            r_idx, note = None, "no index series"
        jobs.append(WindowJob(
            spec.m, spec.start_day, spec.end_day,
            panel.calendar.day(spec.start_day).isoformat(), panel.calendar.day(spec.end_day).isoformat(),
            tuple(panel.symbols[i] for i in spec.eligible), block, r_idx, note,
        ))
    return jobs


def analyze_panel(panel: PricePanel, config: RunConfig, index: IndexSeries | None = None,
                  returns: ReturnPanel | None = None) -> list[WindowReport]:
    """All window reports, in window order."""
    if returns is None:
        returns = compute_returns(panel)
    jobs = make_jobs(panel, returns, config.params, index)
    settings = AnalysisSettings.from_config(config)
    n_workers = effective_jobs(config.jobs)
    logger.info("%d windows, %d worker(s)", len(jobs), n_workers)
    if n_workers == 1 or len(jobs) < 2:
        return [analyze_window(j, settings) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_run_job, [(j, settings) for j in jobs], chunksize=max(1, len(jobs) // (4 * n_workers))))


# ---------------------------------------------------------------- aggregation

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# signet config_hash={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _report_kinds(reports: Sequence[dict]) -> list[str]:
    seen = []
    for r in reports:
        for k in r.get("kinds", {}):
            if k not in seen:
                seen.append(k)
    order = {"anti": 0, "positive": 1, "fully_connected": 2}
    return sorted(seen, key=lambda k: order.get(k, 9))


def rankings_from_reports(reports: Sequence[dict], kind: str) -> list[keystocks.StrengthRanking]:
    out = []
    for r in reports:
        kr = r.get("kinds", {}).get(kind)
        if r["status"] == "ok" and kr is not None:
            out.append(keystocks.StrengthRanking(r["m"], kind, tuple((s, v) for s, v in kr["ranking"]),
                                                 kr.get("tie_at_cutoff", False)))
    return out


def return_bin_edges(reports: Sequence[dict], config: RunConfig) -> np.ndarray | None:
    if config.return_bins is not None:
        return np.asarray(config.return_bins, dtype=np.float64)
    rets = [r["index_return"] for r in reports if r["status"] == "ok" and r["index_return"] is not None]
    if not rets:
        return None
    return keystocks.equal_width_edges(rets, config.n_return_bins)


def _mean_defined(values) -> float | None:
    v = [x for x in values if x is not None]
    return float(np.mean(v)) if v else None


def write_aggregates(reports: Sequence[dict], config: RunConfig, out_dir: Path, config_hash: str) -> tuple[dict, dict]:
    """Write every cross-window table; returns collection sizes and metric means."""
    kinds = _report_kinds(reports)
    ok = [r for r in reports if r["status"] == "ok"]

    _write_table(out_dir / "rankings.csv", ["window", "kind", "rank", "symbol", "strength"],
                 ((r["m"], kind, rank, sym, st)
                  for r in ok for kind in kinds if kind in r["kinds"]
                  for rank, (sym, st) in enumerate(r["kinds"][kind]["ranking"], start=1)),
                 config_hash)

    collections: dict[str, dict[str, int]] = {}
    coll_rows = []
    for kind in kinds:
        coll = keystocks.build_collection(rankings_from_reports(reports, kind), config.k)
        collections[kind] = {"size": coll.size, "distinct": coll.distinct_count,
                             "max_appearances": coll.max_appearances, "above_10": coll.count_above(10)}
        coll_rows.extend((kind, sym, n) for sym, n in coll.appearances.items())
    _write_table(out_dir / "collections.csv", ["kind", "symbol", "appearances"], coll_rows, config_hash)

    edges = return_bin_edges(reports, config)
    binned_rows = []
    if edges is not None:
        for kind in kinds:
            for metric in METRICS:
                pts = [(r["index_return"], r["kinds"][kind][metric]) for r in ok if kind in r["kinds"]]
                try:
                    bins, _ = keystocks.bin_metric_by_return(pts, edges)
                except ConfigError as exc:
                    raise ConfigError(f"binning {kind}/{metric}: {exc}") from None
                binned_rows.extend((kind, metric, b.low, b.high, b.mean, b.sd, b.count) for b in bins)
    _write_table(out_dir / "binned_metrics.csv", ["kind", "metric", "bin_low", "bin_high", "mean", "sd", "count"],
                 binned_rows, config_hash)

    tail_rows = []
    for r in ok:
        for kind in kinds:
            kr = r["kinds"].get(kind)
            if kr is None:
                continue
            g = kr["gpd"] or {}
            tail_rows.append((r["m"], r["start_date"], kind, g.get("xi"), g.get("sigma"), g.get("threshold"),
                              g.get("n_exceed"), g.get("ci_low"), g.get("ci_high"),
                              kr["undefined"].get("gpd")))
    _write_table(out_dir / "tail_params.csv",
                 ["window", "start_date", "kind", "xi", "sigma", "threshold", "n_exceed", "ci_low", "ci_high", "note"],
                 tail_rows, config_hash)

    flat_header = ["window", "start_date", "end_date", "status", "n_eligible", "n_excluded", "p_neg",
                   "rho_min", "rho_max", "kurtosis", "skewness", "index_return", "top_k_overlap"]
    per_kind = ["nodes", "edges", "assortativity", "avg_clustering", "avg_path_len", "lcc_size",
                "n_components", "xi", "xi_low", "xi_high", "pl_exponent"]
    flat_header += [f"{kind}_{c}" for kind in kinds for c in per_kind]
    flat_rows = []
    for r in reports:
        c = r["corr"] or {}
        row = [r["m"], r["start_date"], r["end_date"], r["status"], r["n_eligible"], len(r["excluded_constant"]),
               c.get("p_neg"), c.get("rho_min"), c.get("rho_max"), c.get("kurtosis"), c.get("skewness"),
               r["index_return"], r["top_k_overlap"]]
        for kind in kinds:
            kr = r["kinds"].get(kind)
            if kr is None:
                row += [None] * len(per_kind)
                continue
            g, pl = kr["gpd"] or {}, kr["power_law"] or {}
            row += [kr["n_nodes"], kr["edge_count"], kr["assortativity"], kr["avg_clustering"], kr["avg_path_len"],
                    kr["lcc_size"], kr["n_components"], g.get("xi"), g.get("ci_low"), g.get("ci_high"),
                    pl.get("exponent")]
        flat_rows.append(row)
    _write_table(out_dir / "reports.csv", flat_header, flat_rows, config_hash)

    _write_table(out_dir / "failures.csv", ["window", "error"],
                 ((r["m"], r["error"]) for r in reports if r["status"] != "ok"), config_hash)

    aggregates = {}
    for kind in kinds:
        rows = [r["kinds"][kind] for r in ok if kind in r["kinds"]]
        aggregates[kind] = {
            "mean_assortativity": _mean_defined(x["assortativity"] for x in rows),
            "mean_avg_clustering": _mean_defined(x["avg_clustering"] for x in rows),
            "mean_avg_path_len": _mean_defined(x["avg_path_len"] for x in rows),
            "mean_xi": _mean_defined((x["gpd"] or {}).get("xi") for x in rows),
        }
    return collections, aggregates


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: RunConfig, input_digests: dict[str, str] | None = None) -> str:
    payload = {"config": config.analysis_fields(), "inputs": input_digests or {}}
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def read_reports(path) -> tuple[str | None, list[dict]]:
    """Parse a reports JSON-lines file; returns ``(config_hash, reports)``."""
    chash, reports = None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "config_hash=" in line:
                    chash = line.split("config_hash=", 1)[1].split()[0]
                continue
            reports.append(json.loads(line))
    return chash, reports


def finalize(reports: Sequence[dict], config: RunConfig, out_dir: Path, chash: str) -> RunSummary:
    collections, aggregates = write_aggregates(reports, config, out_dir, chash)
    failed = [{"window": r["m"], "error": r["error"]} for r in reports if r["status"] != "ok"]
    summary = RunSummary(str(out_dir), chash, len(reports), len(reports) - len(failed), failed, collections, aggregates)
    payload = {"config_hash": chash, "config": config.analysis_fields(), "windows": summary.windows,
               "ok": summary.ok, "failed": failed, "collections": collections, "aggregates": aggregates}
    (out_dir / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def write_reports(reports: Sequence[WindowReport], out_dir: Path, chash: str) -> list[dict]:
    dicts = [r.to_dict() for r in reports]
    with open(out_dir / "reports.jsonl", "w", encoding="utf-8") as fh:
        fh.write(f"# signet config_hash={chash}\n")
        for d in dicts:
            fh.write(json.dumps(d, allow_nan=False) + "\n")
    return dicts


def run_panel(panel: PricePanel, config: RunConfig, index: IndexSeries | None = None,
              returns: ReturnPanel | None = None, input_digests: dict[str, str] | None = None) -> RunSummary:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config, input_digests)
    reports = analyze_panel(panel, config, index, returns)
    return finalize(write_reports(reports, out_dir, chash), config, out_dir, chash)


def run(config: RunConfig) -> RunSummary:
    """Ingest the configured inputs and process every window. Ingestion errors propagate."""
    if config.prices is None:
        raise ConfigError("no price file configured")
    panel = ingest_prices(config.prices)
    digests = {"prices": file_digest(config.prices)}
    index = None
    if config.index is not None:
        index = ingest_index(config.index)
        digests["index"] = file_digest(config.index)
    return run_panel(panel, config, index, input_digests=digests)


def summarize_reports(reports_path, config: RunConfig, out_dir: Path | None = None) -> RunSummary:
    """Re-derive every aggregate table from an existing ``reports.jsonl``."""
    chash, reports = read_reports(reports_path)
    out = Path(out_dir) if out_dir is not None else Path(reports_path).parent
    out.mkdir(parents=True, exist_ok=True)
    return finalize(reports, config, out, chash or config_hash(config))


def combo_name(theta: float, L: int, dt: int) -> str:
    return f"theta{theta:g}_L{L}_dt{dt}"


def robustness_sweep(config: RunConfig, theta_values: Sequence[float], L_values: Sequence[int],
                     dt_values: Sequence[int], panel: PricePanel | None = None,
                     index: IndexSeries | None = None) -> list[tuple[dict, RunSummary | None, str | None]]:
    """One run per ``(theta, L, dt)`` in its own subdirectory plus ``sweep.csv`` comparing aggregates."""
    root = Path(config.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    digests = {}
    if panel is None:
        panel = ingest_prices(config.prices)
        digests["prices"] = file_digest(config.prices)
        if config.index is not None:
            index = ingest_index(config.index)
            digests["index"] = file_digest(config.index)
    returns = compute_returns(panel)
    results = []
    for theta in theta_values:
        for L in L_values:
            for dt in dt_values:
                combo = {"theta": float(theta), "L": int(L), "dt": int(dt)}
                try:
                    sub = dataclasses.replace(config, theta=float(theta), window_length=int(L), step=int(dt),
                                              out_dir=root / combo_name(theta, L, dt))
                    results.append((combo, run_panel(panel, sub, index, returns, digests), None))
                except SignetError as exc:
                    logger.warning("sweep combination %s failed: %s", combo, exc)
                    results.append((combo, None, f"{type(exc).__name__}: {exc}"))

    rows = []
    for combo, summ, err in results:
        if summ is None:
            rows.append([combo["theta"], combo["L"], combo["dt"], None, None, None, None, None, None, None, err])
            continue
        for kind, agg in summ.aggregates.items():
            rows.append([combo["theta"], combo["L"], combo["dt"], summ.windows, len(summ.failed), kind,
                         agg["mean_assortativity"], agg["mean_avg_clustering"], agg["mean_avg_path_len"],
                         agg["mean_xi"], None])
    _write_table(root / "sweep.csv",
                 ["theta", "L", "dt", "windows", "failed", "kind", "mean_assortativity", "mean_avg_clustering",
                  "mean_avg_path_len", "mean_xi", "error"],
                 rows, config_hash(config, digests))
    return results
