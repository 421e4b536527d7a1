"""Command-line entry point: ``signet run|sweep|synth|export-edges|summarize``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import netbuild, pipeline, synthmarket
from .config import _floats, load_config_file
from .correlation import correlation_matrix, window_returns
from .errors import SignetError
from .marketdata import compute_returns, ingest_prices, write_index_csv, write_prices_csv
from .pipeline import RunConfig
from .windows import WindowParams, window_specs

logger = logging.getLogger("signet")


def _pair(text):
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return vals


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--prices", type=Path, help="price CSV (symbol,date,close)")
    p.add_argument("--index", type=Path, help="index CSV (date,open,close)")
    p.add_argument("--window-length", type=int, help="window length L in trading days (default 26)")
    p.add_argument("--step", type=int, help="window step in trading days (default 15)")
    p.add_argument("--theta", type=float, help="adjacency threshold (default 0)")
    p.add_argument("-k", "--top-k", dest="k", type=int, help="key stocks per window (default 10)")
    p.add_argument("--tail-fraction", type=float, help="GPD tail fraction (default 0.10)")
    p.add_argument("--bins", dest="n_bins", type=int, help="log bins for the strength PDF (default 20)")
    p.add_argument("--fit-range", type=_pair, help="power-law fit range LOW,HIGH in strength units")
    p.add_argument("--return-bins", type=_floats, help="explicit index-return bin edges, comma separated")
    p.add_argument("--return-bin-count", dest="n_return_bins", type=int,
                   help="equal-width return bins when edges are not given (default 8)")
    p.add_argument("-o", "--out", dest="out_dir", type=Path, help="output directory")
    p.add_argument("-j", "--jobs", type=int, help=f"worker processes (capped by ${pipeline.THREADS_ENV})")
    p.add_argument("--baseline", action="store_true", default=None, help="also measure the fully connected network")
    p.add_argument("--dump-corr", action="store_true", default=None, help="write per-window correlation matrices")
    p.add_argument("--dump-pdf", action="store_true", default=None, help="write per-window strength PDFs")
    p.add_argument("--dump-edges", action="store_true", default=None, help="write per-window edge lists")


_RUN_FIELDS = ("prices", "index", "window_length", "step", "theta", "k", "tail_fraction", "n_bins", "fit_range",
               "return_bins", "n_return_bins", "out_dir", "jobs", "baseline", "dump_corr", "dump_pdf", "dump_edges")


def build_config(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for name in _RUN_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def cmd_run(args) -> int:
    config = build_config(args)
    summary = pipeline.run(config)
    print(f"{summary.ok}/{summary.windows} windows ok -> {summary.out_dir} (config {summary.config_hash})")
    for f in summary.failed:
        print(f"  window {f['window']} failed: {f['error']}", file=sys.stderr)
    return summary.exit_status


def cmd_sweep(args) -> int:
    config = build_config(args)
    thetas = args.thetas or (config.theta,)
    Ls = [int(x) for x in args.lengths] if args.lengths else (config.window_length,)
    dts = [int(x) for x in args.steps] if args.steps else (config.step,)
    results = pipeline.robustness_sweep(config, thetas, Ls, dts)
    status = 0
    for combo, summ, err in results:
        if summ is None:
            print(f"{combo}: FAILED {err}", file=sys.stderr)
            status = 1
        else:
            print(f"{combo}: {summ.ok}/{summ.windows} windows ok")
            status = max(status, summ.exit_status)
    return status


def cmd_synth(args) -> int:
    n_pos = round(args.stocks * (1 - args.neutral) / 2)
    n_neg = round(args.stocks * (1 - args.neutral)) - n_pos
    loadings = (1,) * n_pos + (-1,) * n_neg + (0,) * (args.stocks - n_pos - n_neg)
    spec = synthmarket.FactorModelSpec(
        args.stocks, args.days, loadings, args.factor_vol, args.noise_ratio * args.factor_vol,
        args.seed, args.innovations, args.dof,
    )
    panel = synthmarket.generate_panel(spec)
    if args.crash:
        start, end = (int(x) for x in args.crash.split(":"))
        panel = synthmarket.plant_crash(panel, (start, end), args.amplification, spec)
    write_prices_csv(panel, args.out)
    if args.index_out:
        write_index_csv(synthmarket.generate_index(spec), args.index_out)
    print(f"wrote {spec.n_stocks} stocks x {spec.n_days} days to {args.out}")
    return 0


def cmd_export_edges(args) -> int:
    panel = ingest_prices(args.prices)
    returns = compute_returns(panel)
    params = WindowParams(args.window_length, args.step, args.theta)
    specs = window_specs(panel, params)
    wanted = set(args.window) if args.window else None
    kinds = args.kinds.split(",")
    args.out.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        if wanted is not None and spec.m not in wanted:
            continue
        corr = correlation_matrix(window_returns(returns, spec), [panel.symbols[i] for i in spec.eligible])
        for kind in kinds:
            net = netbuild.build_network(corr, kind, args.theta)
            netbuild.write_edge_list(net, args.out / f"w{spec.m:04d}_{kind}_edges.csv")
            netbuild.write_node_table(net, args.out / f"w{spec.m:04d}_{kind}_nodes.csv")
            print(f"window {spec.m} {kind}: {net.n} nodes, {net.edge_count} edges")
    return 0


def cmd_summarize(args) -> int:
    config = build_config(args)
    summary = pipeline.summarize_reports(args.reports, config, args.out_dir)
    print(f"re-derived aggregates for {summary.windows} windows -> {summary.out_dir}")
    return summary.exit_status


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="analyse every window of a price panel")
    _add_run_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat the run over theta / L / step grids")
    _add_run_options(p)
    p.add_argument("--thetas", type=_floats, help="comma-separated theta values")
    p.add_argument("--lengths", type=_floats, help="comma-separated window lengths")
    p.add_argument("--steps", type=_floats, help="comma-separated steps")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic factor-model price CSV")
    p.add_argument("--stocks", type=int, default=200)
    p.add_argument("--days", type=int, default=600)
    p.add_argument("--noise-ratio", type=float, default=0.2, help="idiosyncratic / factor volatility")
    p.add_argument("--factor-vol", type=float, default=0.02)
    p.add_argument("--neutral", type=float, default=0.0, help="fraction of stocks with zero loading")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--innovations", choices=("gaussian", "student_t"), default="gaussian")
    p.add_argument("--dof", type=float, default=4.0)
    p.add_argument("--crash", help="START:END calendar days to plant a crash on")
    p.add_argument("--amplification", type=float, default=3.0)
    p.add_argument("-o", "--out", type=Path, required=True)
    p.add_argument("--index-out", type=Path, help="also write an index CSV tracking the factor")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-edges", help="write per-window edge lists and node tables")
    p.add_argument("--prices", type=Path, required=True)
    p.add_argument("--window", type=int, action="append", help="window index (repeatable; default all)")
    p.add_argument("--kinds", default="anti,positive")
    p.add_argument("--window-length", type=int, default=26)
    p.add_argument("--step", type=int, default=15)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("-o", "--out", type=Path, required=True)
    p.set_defaults(func=cmd_export_edges)

    p = sub.add_parser("summarize", help="re-derive aggregate tables from reports.jsonl")
    p.add_argument("reports", type=Path)
    _add_run_options(p)
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SignetError as exc:
        print(f"signet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
