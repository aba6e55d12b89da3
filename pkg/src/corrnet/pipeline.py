"""End-to-end monthly analysis: correlations, filtered graphs, information, tests, spectra."""

from __future__ import annotations

import logging
import os
import warnings
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from .corr import CorrelationMatrix, correlation_surface, mean_offdiag, pearson_matrix, write_matrix, write_surface
from .errors import ConfigError, CorrnetError, DataError
from .filtgraph import FilteredGraph, degree_profile, mst, pmfg, write_edgelist, write_graphml
from .mapeq import Partition, Weighting, detect_communities
from .netinfo import rolling_mi
from .panel import (FillPolicy, Month, ReturnPanel, ReturnWindow, SingularWindowWarning, has_history,
                    load_prices, log_returns, window, write_table)
from .spectral import EigenSeries, eigen_series
from .stats import WelchResult, mst_vs_pmfg

log = logging.getLogger(__name__)

DEFAULT_DELTA_TS = (0.25, 0.5, 1.0, 2.0, 5.0)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def load_config_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config_text(text)


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


@dataclass
class PipelineConfig:
    """Settings for :func:`run_pipeline`; the config-file keys are the field names."""

    input: Path
    output: Path
    fill: FillPolicy = FillPolicy.FORWARD_FILL
    delta_ts: tuple[float, ...] = DEFAULT_DELTA_TS
    dt: float = 0.25
    reference: str | None = None
    runs: int = 100
    seed: int = 42
    top: int = 3
    weighting: Weighting = Weighting.CORRELATION
    exclude_shared: bool = False
    events: Path | None = None
    workers: int = 1

    def __post_init__(self):
        self.input = Path(self.input)
        self.output = Path(self.output)
        self.events = Path(self.events) if self.events else None
        try:
            self.fill = FillPolicy(self.fill)
            self.weighting = Weighting(self.weighting)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.delta_ts = tuple(float(x) for x in self.delta_ts)
        if not self.delta_ts or any(not x > 0 for x in self.delta_ts):
            raise ConfigError("delta_ts values must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        for required in ("input", "output"):
            if not values.get(required):
                raise ConfigError(f"missing required config key {required!r}")
        kwargs: dict[str, object] = {}
        try:
            for key, value in values.items():
                if value is None:
                    continue
                if isinstance(value, str):
                    if key == "delta_ts":
                        value = parse_floats(value)
                    elif key == "dt":
                        value = float(value)
                    elif key in ("runs", "seed", "top", "workers"):
                        value = int(value)
                    elif key == "exclude_shared":
                        value = _parse_bool(value)
                    elif key in ("reference", "events") and value == "":
                        value = None
                kwargs[key] = value
        except ValueError as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**kwargs)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(x) for x in value)
            elif hasattr(value, "value"):
                value = value.value
            elif value is None:
                value = ""
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


@dataclass
class MonthResult:
    month: Month
    matrix: CorrelationMatrix
    tree: FilteredGraph
    planar: FilteredGraph
    welch: WelchResult


@dataclass
class PipelineReport:
    output: Path
    months: list[str]
    failures: list[tuple[str, str]]
    partition: Partition
    files: list[Path] = field(default_factory=list)


def full_period_window(panel: ReturnPanel) -> ReturnWindow:
    """A window holding every record of the panel."""
    last = panel.last_month
    return ReturnWindow(last, float("nan"), panel.labels, panel.dates[0], panel.dates[-1], panel.returns)


def analysis_months(panel: ReturnPanel, dt: float) -> list[Month]:
    return [m for m in panel.months() if has_history(panel, m, dt)]


def analyze_month(panel: ReturnPanel, month: Month, dt: float, exclude_shared: bool = False) -> MonthResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularWindowWarning)
        win = window(panel, month, dt)
    matrix = pearson_matrix(win)
    tree = mst(matrix)
    planar = pmfg(matrix)
    welch = mst_vs_pmfg(matrix, exclude_shared, graphs=(tree, planar))
    return MonthResult(month, matrix, tree, planar, welch)


def monthly_results(panel: ReturnPanel, months: Sequence[Month], dt: float, exclude_shared: bool = False,
                    workers: int = 1) -> tuple[list[MonthResult], list[tuple[str, str]]]:
    """Analyse every month; failures are collected instead of aborting the loop."""
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(panel, dt, exclude_shared)) as pool:
            outcomes = list(pool.map(_worker_month, months))
    else:
        outcomes = [_safe_month(panel, m, dt, exclude_shared) for m in months]
    results, failures = [], []
    for month, outcome in zip(months, outcomes):
        if isinstance(outcome, str):
            log.warning("month %s failed: %s", month, outcome)
            failures.append((str(month), outcome))
        else:
            results.append(outcome)
    return results, failures


def _safe_month(panel, month, dt, exclude_shared):
    try:
        return analyze_month(panel, month, dt, exclude_shared)
    except CorrnetError as exc:
        return str(exc)


_WORKER_STATE: tuple = ()


def _init_worker(panel, dt, exclude_shared):
    global _WORKER_STATE
    _WORKER_STATE = (panel, dt, exclude_shared)


def _worker_month(month):
    panel, dt, exclude_shared = _WORKER_STATE
    return _safe_month(panel, month, dt, exclude_shared)


def resolve_reference(labels: Sequence[str], reference: str | None) -> str:
    if reference is None:
        return "USA" if "USA" in labels else labels[0]
    if reference not in labels:
        raise ConfigError(f"reference label {reference!r} not among series labels")
    return reference


def load_events(path: Path) -> list[tuple[str, str]]:
    """Read ``month,label`` annotation lines (``YYYY-MM``)."""
    events = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read events file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.lower().startswith("month,"):
            continue
        parts = [p.strip() for p in line.split(",", 1)]
        if len(parts) != 2:
            raise ConfigError(f"events line {lineno}: expected 'month,label'")
        events.append((str(Month.parse(parts[0])), parts[1]))
    return events


def communities_rows(partition: Partition):
    for v, label in enumerate(partition.labels):
        yield label, partition.assignment[v], partition.flow_rank[v]


def communities_summary(partition: Partition, runs: int, seed: int) -> str:
    return (f"# codelength_bits={partition.codelength!r} n_modules={partition.n_modules} "
            f"runs={runs} seed={seed}\n")


def write_communities(partition: Partition, out, runs: int, seed: int) -> None:
    write_table(communities_rows(partition), ["label", "module", "flow_rank"], out)
    out.write(communities_summary(partition, runs, seed))


def ttest_rows(results: Sequence[MonthResult]):
    for r in results:
        w = r.welch
        yield str(r.month), w.t_statistic, w.dof, w.p_value, w.mean1, w.mean2


TTEST_HEADER = ["month", "t", "dof", "p", "mean_mst", "mean_pmfg"]
MI_HEADER = ["month", "n1", "n2", "n12", "I_nats", "i_normalized"]


def mi_rows(months: Sequence[str], graphs: Sequence[FilteredGraph]):
    if len(graphs) < 2:
        return
    for month, res in zip(months[1:], rolling_mi(graphs, strict=False)):
        yield month, res.n1, res.n2, res.n12, res.mutual_information, res.normalized


def write_spectral(series: EigenSeries, outdir: Path) -> list[Path]:
    paths = [outdir / "eigenvalues.csv", outdir / "eigenvectors.csv", outdir / "threshold.csv"]
    with open(paths[0], "w", newline="") as fh:
        write_table(series.eigenvalue_rows(), ["month", "rank", "eigenvalue"], fh)
    with open(paths[1], "w", newline="") as fh:
        write_table(series.vector_rows(), ["month", "label", "v1_component", "v2_component"], fh)
    with open(paths[2], "w", newline="") as fh:
        write_table(series.threshold_rows(), ["month", "n_above", "lambda_plus"], fh)
    return paths


def read_returns(config: PipelineConfig) -> ReturnPanel:
    if not config.input.exists():
        raise ConfigError(f"input file {config.input} does not exist")
    if config.input.stat().st_size == 0 or not config.input.read_text().strip():
        raise ConfigError(f"input file {config.input} is empty")
    return log_returns(load_prices(config.input, config.fill))


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Run every analysis step and write plot-ready tables under ``config.output``.

    Input problems are raised before anything is written.  Individual months
    that fail are skipped and listed in ``manifest.csv``.
    """
    panel = read_returns(config)
    reference = resolve_reference(panel.labels, config.reference)
    events = load_events(config.events) if config.events else []
    months = analysis_months(panel, config.dt)
    if not months:
        raise DataError(f"panel too short for a {config.dt}-year window")

    out = config.output
    try:
        out.mkdir(parents=True, exist_ok=True)
        for sub in ("correlations", "mst", "pmfg", "unconditional"):
            (out / sub).mkdir(exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    files: list[Path] = []

    def dest(name: str) -> Path:
        path = out / name
        files.append(path)
        return path

    with open(dest("config.txt"), "w") as fh:
        fh.write(config.to_text())

    # unconditional graph and its communities fix the column order of per-vertex tables
    full = pearson_matrix(full_period_window(panel))
    full_pmfg = pmfg(full)
    partition = detect_communities(full_pmfg, config.runs, config.seed, config.weighting)
    ordering = partition.ordering()
    with open(dest("unconditional/correlation.csv"), "w", newline="") as fh:
        write_matrix(full, fh)
    with open(dest("unconditional/pmfg.edgelist"), "w", newline="") as fh:
        write_edgelist(full_pmfg, fh)
    with open(dest("unconditional/pmfg.graphml"), "w") as fh:
        write_graphml(full_pmfg, fh)
    with open(dest("unconditional/communities.csv"), "w", newline="") as fh:
        write_communities(partition, fh, config.runs, config.seed)

    surface = correlation_surface(panel, config.delta_ts)
    with open(dest("surface.csv"), "w", newline="") as fh:
        write_surface(surface, fh)

    results, failures = monthly_results(panel, months, config.dt, config.exclude_shared, config.workers)
    ok_months = [str(r.month) for r in results]
    for r in results:
        name = str(r.month)
        with open(dest(f"correlations/{name}.csv"), "w", newline="") as fh:
            write_matrix(r.matrix, fh)
        with open(dest(f"mst/{name}.edgelist"), "w", newline="") as fh:
            write_edgelist(r.tree, fh)
        with open(dest(f"pmfg/{name}.edgelist"), "w", newline="") as fh:
            write_edgelist(r.planar, fh)

    with open(dest("mean_corr.csv"), "w", newline="") as fh:
        rows = ((str(r.month), config.dt, mean_offdiag(r.matrix), r.matrix.record_count) for r in results)
        write_table(rows, ["month", "dt", "mean_corr", "record_count"], fh)

    with open(dest("mi.csv"), "w", newline="") as fh:
        write_table(mi_rows(ok_months, [r.planar for r in results]), MI_HEADER, fh)

    profile = degree_profile([r.planar for r in results], ordering)
    with open(dest("degree_profile.csv"), "w", newline="") as fh:
        write_table(([m, *row] for m, row in zip(ok_months, profile.tolist())), ["month", *ordering], fh)

    with open(dest("ttest.csv"), "w", newline="") as fh:
        write_table(ttest_rows(results), TTEST_HEADER, fh)

    if results:
        series = eigen_series([r.matrix for r in results], reference, config.top, ordering)
        for path in write_spectral(series, out):
            files.append(path)

    if events:
        with open(dest("events.csv"), "w", newline="") as fh:
            in_range = set(ok_months)
            write_table(((m, label, m in in_range) for m, label in events), ["month", "label", "analysed"], fh)

    with open(dest("manifest.csv"), "w", newline="") as fh:
        write_table(failures, ["month", "error"], fh)

    log.info("pipeline finished: %d months, %d failures", len(results), len(failures))
    return PipelineReport(out, ok_months, failures, partition, files)
