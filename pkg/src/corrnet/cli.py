"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from datetime import date
from pathlib import Path

from . import __version__
from .corr import correlation_surface, pearson_matrix, write_matrix, write_surface
from .errors import ConfigError, DataError
from .filtgraph import FilteredGraph, mst, pmfg, read_edgelist, read_graphml, write_edgelist, write_graphml
from .mapeq import detect_communities
from .panel import (Month, SingularWindowWarning, load_prices, log_returns, window, write_prices, write_returns,
                    write_table)
from .pipeline import (MI_HEADER, TTEST_HEADER, PipelineConfig, analysis_months, load_config_file, mi_rows,
                       monthly_results, parse_floats, resolve_reference, run_pipeline, ttest_rows,
                       write_communities, write_spectral)
from .spectral import eigen_series
from .synth import (FactorSpec, default_labels, gen_blocks, gen_equicorrelated, gen_regime_shift,
                    paper_calendar_records, to_prices)

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_out(path: str | None):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _returns(args):
    return log_returns(load_prices(args.input, args.fill))


def _window_matrix(args):
    panel = _returns(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularWindowWarning)
        win = window(panel, Month.parse(args.window), args.dt)
    return pearson_matrix(win)


def cmd_returns(args):
    with _open_out(args.output) as out:
        write_returns(_returns(args), out)


def cmd_corr(args):
    with _open_out(args.output) as out:
        write_matrix(_window_matrix(args), out)


def cmd_surface(args):
    surface = correlation_surface(_returns(args), parse_floats(args.dts))
    with _open_out(args.output) as out:
        write_surface(surface, out)


def cmd_graph(args):
    matrix = _window_matrix(args)
    graph = mst(matrix) if args.command == "mst" else pmfg(matrix)
    with _open_out(args.output) as out:
        if args.format == "graphml":
            write_graphml(graph, out)
        else:
            write_edgelist(graph, out)


def _read_graph(path: Path, labels=None):
    if path.suffix.lower() == ".graphml":
        return read_graphml(path)
    return read_edgelist(path, labels)


def _over_labels(graph: FilteredGraph, labels: tuple[str, ...]) -> FilteredGraph:
    if graph.labels == labels:
        return graph
    index = {label: k for k, label in enumerate(labels)}
    old = graph.labels
    return FilteredGraph(labels, tuple((index[old[i]], index[old[j]], w) for i, j, w in graph.edges), graph.kind)


def cmd_mi(args):
    directory = Path(args.graphs)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in (".edgelist", ".csv", ".txt", ".graphml"))
    if len(paths) < 2:
        raise DataError(f"need at least 2 graph files in {directory}")
    graphs = [_read_graph(p) for p in paths]
    # isolated vertices are absent from edge lists, so compare over the union of labels
    labels = tuple(dict.fromkeys(label for g in graphs for label in g.labels))
    graphs = [_over_labels(g, labels) for g in graphs]
    with _open_out(args.output) as out:
        write_table(mi_rows([p.stem for p in paths], graphs), MI_HEADER, out)


def cmd_communities(args):
    graph = _read_graph(Path(args.graph))
    partition = detect_communities(graph, args.runs, args.seed, "unweighted" if args.unweighted else "correlation")
    with _open_out(args.output) as out:
        write_communities(partition, out, args.runs, args.seed)


def _read_ordering(path):
    if path is None:
        return None
    import csv
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or rows[0][:3] != ["label", "module", "flow_rank"]:
        raise ConfigError(f"{path} is not a communities table")
    body = [(int(r[1]), int(r[2]), r[0]) for r in rows[1:]]
    return [label for _, _, label in sorted(body)]


def _monthly(args):
    panel = _returns(args)
    months = analysis_months(panel, args.dt)
    if not months:
        raise DataError(f"panel too short for a {args.dt}-year window")
    results, failures = monthly_results(panel, months, args.dt, getattr(args, "exclude_shared", False))
    for month, message in failures:
        print(f"warning: {month}: {message}", file=sys.stderr)
    return panel, results


def cmd_spectral(args):
    panel, results = _monthly(args)
    if not results:
        raise DataError("no month could be analysed")
    reference = resolve_reference(panel.labels, args.ref)
    series = eigen_series([r.matrix for r in results], reference, args.top, _read_ordering(args.order))
    if args.output_dir:
        outdir = Path(args.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_spectral(series, outdir)
        return
    out = sys.stdout
    write_table(series.eigenvalue_rows(), ["month", "rank", "eigenvalue"], out)
    out.write("\n")
    write_table(series.vector_rows(), ["month", "label", "v1_component", "v2_component"], out)
    out.write("\n")
    write_table(series.threshold_rows(), ["month", "n_above", "lambda_plus"], out)


def cmd_ttest(args):
    _, results = _monthly(args)
    with _open_out(args.output) as out:
        write_table(ttest_rows(results), TTEST_HEADER, out)


def _synth_panel(kind: str, params: dict[str, str], seed: int):
    def get(key, default=None, cast=str):
        if key not in params:
            if default is None:
                raise ConfigError(f"synth {kind}: missing parameter {key!r}")
            return default
        try:
            return cast(params[key])
        except ValueError:
            raise ConfigError(f"synth {kind}: bad value for {key!r}: {params[key]!r}") from None

    start = get("start", date(1996, 1, 1), date.fromisoformat)
    volatility = get("volatility", 0.01, float)

    def records(key="t"):
        if "end" in params:
            return paper_calendar_records(start, get("end", cast=date.fromisoformat))
        return get(key, cast=int)

    def assignment(key, n):
        sizes = [int(x) for x in parse_floats(get(key, str(n)))]
        if sum(sizes) != n:
            raise ConfigError(f"synth {kind}: block sizes {sizes} do not sum to n={n}")
        return tuple(b for b, size in enumerate(sizes) for _ in range(size))

    if kind == "equicorr":
        n = get("n", cast=int)
        return gen_equicorrelated(n, records(), get("rho", cast=float), seed, start, volatility)
    if kind == "blocks":
        n = get("n", cast=int)
        spec = FactorSpec(n, records(), assignment("blocks", n), get("rho_in", cast=float),
                          get("rho_out", cast=float), seed)
        return gen_blocks(spec, start, volatility)
    if kind == "shift":
        n = get("n", cast=int)
        before_blocks = assignment("blocks", n)
        relabel = get("relabel", "none")
        if relabel == "interleave":
            k = len(set(before_blocks))
            after_blocks = tuple(i % k for i in range(n))
        elif relabel == "none":
            after_blocks = before_blocks
        else:
            raise ConfigError(f"synth shift: relabel must be 'none' or 'interleave', got {relabel!r}")
        before = FactorSpec(n, get("t_before", cast=int), before_blocks, get("rho_in_before", cast=float),
                            get("rho_out_before", cast=float), seed)
        after = FactorSpec(n, get("t_after", cast=int), after_blocks, get("rho_in_after", cast=float),
                           get("rho_out_after", cast=float), seed)
        return gen_regime_shift(before, after, Month.parse(get("shift_month")), volatility, default_labels(n))
    raise ConfigError(f"unknown synth kind {kind!r}")


def cmd_synth(args):
    params = load_config_file(args.params) if args.params else {}
    for item in args.set or []:
        key, _, value = item.partition("=")
        params[key.strip()] = value.strip()
    panel = _synth_panel(args.kind, params, args.seed)
    with _open_out(args.output) as out:
        write_prices(to_prices(panel), out)


_PIPELINE_FLAGS = ("input", "output", "fill", "delta_ts", "dt", "reference", "runs", "seed", "top",
                   "weighting", "exclude_shared", "events", "workers")


def cmd_pipeline(args):
    values = load_config_file(args.config) if args.config else {}
    for key in _PIPELINE_FLAGS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            values[key] = str(value) if not isinstance(value, bool) else "true"
    report = run_pipeline(PipelineConfig.from_mapping(values))
    print(f"{len(report.months)} months analysed, {len(report.failures)} failed; "
          f"{report.partition.n_modules} communities; outputs in {report.output}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corrnet", description="Correlation-based networks of multivariate return series.")
    parser.add_argument("--version", action="version", version=f"corrnet {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p, window_required=False):
        p.add_argument("--input", required=True, help="price table: date,<label1>,...")
        p.add_argument("--fill", choices=["forward", "strict"], default="forward")
        p.add_argument("--output", help="output file (default stdout)")
        if window_required:
            p.add_argument("--window", required=True, help="end month YYYY-MM")
            p.add_argument("--dt", type=float, required=True, help="window length in years")

    p = sub.add_parser("returns", help="log returns of a price table")
    data_args(p)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("corr", help="correlation matrix of one window")
    data_args(p, window_required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("surface", help="mean correlation for every month and window length")
    data_args(p)
    p.add_argument("--dts", default="0.25,0.5,1,2,5")
    p.set_defaults(func=cmd_surface)

    for name in ("mst", "pmfg"):
        p = sub.add_parser(name, help=f"{name.upper()} of one window")
        data_args(p, window_required=True)
        p.add_argument("--format", choices=["edgelist", "graphml"], default="edgelist")
        p.set_defaults(func=cmd_graph)

    p = sub.add_parser("mi", help="link mutual information between successive graphs")
    p.add_argument("--graphs", required=True, help="directory of edge lists, sorted by file name")
    p.add_argument("--output")
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("communities", help="map-equation communities of a graph")
    p.add_argument("--graph", required=True, help="edge list or .graphml file")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--unweighted", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("spectral", help="monthly eigenvalues, eigenvectors and noise-edge counts")
    data_args(p)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--ref", help="label whose eigenvector component is made positive")
    p.add_argument("--top", type=int, default=3)
    p.add_argument("--order", help="communities table fixing the eigenvector column order")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("ttest", help="monthly Welch test of MST vs PMFG link correlations")
    data_args(p)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--exclude-shared", action="store_true")
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("synth", help="write a synthetic price table")
    p.add_argument("kind", choices=["equicorr", "blocks", "shift"])
    p.add_argument("--params", help="key = value parameter file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run the full monthly analysis")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--input")
    p.add_argument("--output", help="output directory")
    p.add_argument("--fill", choices=["forward", "strict"])
    p.add_argument("--delta-ts", dest="delta_ts")
    p.add_argument("--dt", type=float)
    p.add_argument("--reference")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--top", type=int)
    p.add_argument("--weighting", choices=["correlation", "unweighted"])
    p.add_argument("--exclude-shared", action="store_true")
    p.add_argument("--events")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"corrnet: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"corrnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"corrnet: configuration error: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    sys.exit(main())
