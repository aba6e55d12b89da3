"""Pearson correlation matrices per window and the mean-correlation surface."""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import DataError
from .panel import Month, ReturnPanel, ReturnWindow, SingularWindowWarning, has_history, window, write_table

ZERO_STD = 1e-15


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray = field(repr=False)
    end_month: Month | None = None
    delta_t_years: float | None = None
    record_count: int | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.shape != (len(self.labels), len(self.labels)):
            raise DataError(f"correlation matrix shape {values.shape} does not match {len(self.labels)} labels")

    @property
    def n(self) -> int:
        return len(self.labels)


def pearson_matrix(win: ReturnWindow) -> CorrelationMatrix:
    """Pearson correlations of the window's records, using 1/T_w sample moments.

    Raises DataError when fewer than two records are present or any series has
    (numerically) zero standard deviation inside the window.
    """
    x = np.asarray(win.records, dtype=float)
    t = x.shape[1]
    if t < 2:
        raise DataError(f"window ending {win.end_month} has {t} record(s), need at least 2")
    centered = x - x.mean(axis=1, keepdims=True)
    std = np.sqrt((centered * centered).mean(axis=1))
    flat = np.flatnonzero(std < ZERO_STD)
    if flat.size:
        names = ", ".join(win.labels[i] for i in flat)
        raise DataError(f"zero-variance series in window ending {win.end_month}: {names}")
    z = centered / std[:, None]
    c = (z @ z.T) / t
    c = 0.5 * (c + c.T)
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(win.labels, c, win.end_month, win.delta_t_years, t)


def mean_offdiag(matrix: CorrelationMatrix | np.ndarray) -> float:
    """Average of the N(N-1)/2 distinct off-diagonal entries."""
    c = matrix.values if isinstance(matrix, CorrelationMatrix) else np.asarray(matrix)
    n = c.shape[0]
    if n < 2:
        raise DataError("mean off-diagonal correlation needs at least 2 series")
    iu = np.triu_indices(n, 1)
    return float(c[iu].mean())


@dataclass(frozen=True)
class CorrelationSurface:
    months: tuple[Month, ...]
    delta_ts: tuple[float, ...]
    mean_corr: np.ndarray = field(repr=False)  # len(months) x len(delta_ts), NaN where invalid
    valid_mask: np.ndarray = field(repr=False)
    record_counts: np.ndarray = field(repr=False)
    failures: dict = field(default_factory=dict, repr=False)  # (month, dt) -> message

    def rows(self):
        """Long-format rows ``(month, dt, mean_corr, valid)``; invalid cells have an empty value."""
        for i, month in enumerate(self.months):
            for j, dt in enumerate(self.delta_ts):
                ok = bool(self.valid_mask[i, j])
                yield str(month), dt, float(self.mean_corr[i, j]) if ok else None, ok


def correlation_surface(panel: ReturnPanel, delta_ts: Sequence[float],
                        months: Sequence[Month] | None = None) -> CorrelationSurface:
    """Mean off-diagonal correlation for every (month end, window length) cell.

    Cells whose window would start before the data are flagged invalid, as are
    cells whose correlation matrix cannot be estimated (listed in ``failures``).
    """
    if not delta_ts:
        raise DataError("delta_ts must be nonempty")
    if any(not dt > 0 for dt in delta_ts):
        raise DataError("every window length must be positive")
    months = tuple(months) if months is not None else tuple(panel.months())
    if not any(has_history(panel, m, min(delta_ts)) for m in months):
        raise DataError(f"panel shorter than the shortest window ({min(delta_ts)} years)")
    mean = np.full((len(months), len(delta_ts)), np.nan)
    valid = np.zeros(mean.shape, dtype=bool)
    counts = np.zeros(mean.shape, dtype=int)
    failures = {}
    for j, dt in enumerate(delta_ts):
        for i, month in enumerate(months):
            if not has_history(panel, month, dt):
                continue
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", SingularWindowWarning)
                    win = window(panel, month, dt)
                mean[i, j] = mean_offdiag(pearson_matrix(win))
            except DataError as exc:
                failures[(month, float(dt))] = str(exc)
                continue
            valid[i, j] = True
            counts[i, j] = win.record_count
    return CorrelationSurface(months, tuple(float(d) for d in delta_ts), mean, valid, counts, failures)


def write_matrix(matrix: CorrelationMatrix, out: IO[str]) -> None:
    rows = ([label, *matrix.values[i]] for i, label in enumerate(matrix.labels))
    write_table(rows, ["label", *matrix.labels], out)


def write_surface(surface: CorrelationSurface, out: IO[str]) -> None:
    write_table(surface.rows(), ["month", "dt", "mean_corr", "valid"], out)
