"""Price ingestion, log returns and calendar-month evaluation windows."""

from __future__ import annotations

import calendar
import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import IO, NamedTuple

import numpy as np

from .errors import DataError


class FillPolicy(str, Enum):
    FORWARD_FILL = "forward"
    STRICT = "strict"


class SingularWindowWarning(UserWarning):
    """A window holds no more records than series, so its correlation matrix is singular."""


class Month(NamedTuple):
    year: int
    month: int

    @classmethod
    def parse(cls, text: str) -> "Month":
        """Parse ``YYYY-MM`` (a trailing ``-DD`` is ignored)."""
        try:
            parts = text.strip().split("-")
            month = cls(int(parts[0]), int(parts[1]))
        except (ValueError, IndexError):
            raise DataError(f"cannot parse month {text!r}, expected YYYY-MM") from None
        if not 1 <= month.month <= 12:
            raise DataError(f"cannot parse month {text!r}, month out of range")
        return month

    @classmethod
    def of(cls, day: date) -> "Month":
        return cls(day.year, day.month)

    def shift(self, months: int) -> "Month":
        index = self.year * 12 + (self.month - 1) + months
        return Month(index // 12, index % 12 + 1)

    def first_day(self) -> date:
        return date(self.year, self.month, 1)

    def last_day(self) -> date:
        return date(self.year, self.month, calendar.monthrange(self.year, self.month)[1])

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def month_range(first: Month, last: Month) -> list[Month]:
    """All months from ``first`` to ``last`` inclusive."""
    count = (last.year - first.year) * 12 + last.month - first.month + 1
    return [first.shift(k) for k in range(max(count, 0))]


def months_in(delta_t_years: float) -> int:
    """Convert a window length in years to a whole number of calendar months."""
    months = delta_t_years * 12
    rounded = round(months)
    if delta_t_years <= 0 or rounded < 1 or abs(months - rounded) > 1e-9:
        raise DataError(f"window length {delta_t_years!r} years is not a positive whole number of months")
    return rounded


def _check_dates(dates) -> None:
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise DataError(f"non-monotone dates: {cur.isoformat()} follows {prev.isoformat()}")


@dataclass(frozen=True)
class PricePanel:
    """N labeled price series on a shared, strictly increasing daily calendar."""

    dates: tuple[date, ...]
    labels: tuple[str, ...]
    prices: np.ndarray  # N x L

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(self.labels))
        prices = np.array(self.prices, dtype=float)
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        if prices.shape != (len(self.labels), len(self.dates)):
            raise DataError(f"price matrix shape {prices.shape} does not match "
                            f"{len(self.labels)} labels x {len(self.dates)} dates")
        _check_dates(self.dates)


@dataclass(frozen=True)
class ReturnPanel:
    """Daily log returns; ``dates[k]`` is the later day of the k-th price pair."""

    dates: tuple[date, ...]
    labels: tuple[str, ...]
    returns: np.ndarray  # N x (L-1)

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(self.labels))
        returns = np.array(self.returns, dtype=float)
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)
        if returns.shape != (len(self.labels), len(self.dates)):
            raise DataError(f"return matrix shape {returns.shape} does not match "
                            f"{len(self.labels)} labels x {len(self.dates)} dates")
        if not self.dates:
            raise DataError("return panel has no records")
        _check_dates(self.dates)

    @property
    def n_series(self) -> int:
        return len(self.labels)

    @cached_property
    def _ordinals(self) -> np.ndarray:
        return np.array([d.toordinal() for d in self.dates], dtype=np.int64)

    @property
    def first_month(self) -> Month:
        return Month.of(self.dates[0])

    @property
    def last_month(self) -> Month:
        return Month.of(self.dates[-1])

    def months(self) -> list[Month]:
        """Every calendar month touched by the panel, in order."""
        return month_range(self.first_month, self.last_month)


@dataclass(frozen=True)
class ReturnWindow:
    end_month: Month
    delta_t_years: float
    labels: tuple[str, ...]
    start: date
    end: date
    records: np.ndarray = field(repr=False)  # N x T_w

    @property
    def record_count(self) -> int:
        return self.records.shape[1]


def load_prices(source: str | Path | IO[str], fill_policy: FillPolicy | str = FillPolicy.FORWARD_FILL,
                delimiter: str = ",") -> PricePanel:
    """Read a ``date,<label1>,...,<labelN>`` table of prices.

    Empty fields are missing values. Under ``forward`` fill each one takes the
    most recent earlier price of the same series; under ``strict`` any missing
    value is an error.
    """
    policy = FillPolicy(fill_policy)
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return load_prices(fh, policy, delimiter)
    rows = [row for row in csv.reader(source, delimiter=delimiter) if row and any(f.strip() for f in row)]
    if not rows:
        raise DataError("empty price table")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise DataError("header must be 'date' followed by one column per series")
    labels = header[1:]
    if len(set(labels)) != len(labels):
        raise DataError("duplicate series labels in header")
    body = rows[1:]
    if len(body) < 2:
        raise DataError("fewer than 2 price rows")

    n = len(labels)
    dates = []
    prices = np.empty((n, len(body)))
    last = [math.nan] * n
    for k, row in enumerate(body, start=2):
        if len(row) != n + 1:
            raise DataError(f"line {k}: expected {n + 1} fields, got {len(row)}")
        try:
            dates.append(date.fromisoformat(row[0].strip()))
        except ValueError:
            raise DataError(f"line {k}: cannot parse date {row[0]!r}") from None
        for i, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                if policy is FillPolicy.STRICT:
                    raise DataError(f"line {k}: missing value for {labels[i]} under strict fill policy")
                if math.isnan(last[i]):
                    raise DataError(f"line {k}: missing value for {labels[i]} with no prior value to fill")
                value = last[i]
            else:
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(f"line {k}: cannot parse price {cell!r} for {labels[i]}") from None
                if not value > 0 or not math.isfinite(value):
                    raise DataError(f"line {k}: non-positive price {cell} for {labels[i]}")
            prices[i, k - 2] = value
            last[i] = value
    return PricePanel(tuple(dates), tuple(labels), prices)


def log_returns(panel: PricePanel) -> ReturnPanel:
    """Daily log returns ``ln P(t) - ln P(t-1)`` for every series."""
    if len(panel.dates) < 2:
        raise DataError("need at least 2 price rows to form returns")
    if not np.all(panel.prices > 0):
        i, k = np.argwhere(~(panel.prices > 0))[0]
        raise DataError(f"non-positive price encountered for {panel.labels[i]} on {panel.dates[k].isoformat()}")
    logp = np.log(panel.prices)
    return ReturnPanel(panel.dates[1:], panel.labels, logp[:, 1:] - logp[:, :-1])


def window_bounds(end_month: Month, delta_t_years: float) -> tuple[date, date]:
    """First and last calendar day covered by a window ending in ``end_month``."""
    months = months_in(delta_t_years)
    return end_month.shift(1 - months).first_day(), end_month.last_day()


def has_history(panel: ReturnPanel, end_month: Month, delta_t_years: float) -> bool:
    """True iff the window does not start before the panel's first month."""
    start, _ = window_bounds(end_month, delta_t_years)
    return Month.of(start) >= panel.first_month


def window(panel: ReturnPanel, end_month: Month | str, delta_t_years: float) -> ReturnWindow:
    """Returns dated within the ``delta_t_years`` calendar span ending with ``end_month``."""
    if isinstance(end_month, str):
        end_month = Month.parse(end_month)
    start, end = window_bounds(end_month, delta_t_years)
    if Month.of(start) < panel.first_month:
        raise DataError(f"insufficient history: window {start.isoformat()}..{end.isoformat()} "
                        f"begins before data start {panel.dates[0].isoformat()}")
    ords = panel._ordinals
    lo = int(np.searchsorted(ords, start.toordinal(), side="left"))
    hi = int(np.searchsorted(ords, end.toordinal(), side="right"))
    if hi <= lo:
        raise DataError(f"window {start.isoformat()}..{end.isoformat()} contains no records")
    records = panel.returns[:, lo:hi]
    if records.shape[1] <= panel.n_series:
        warnings.warn(f"window ending {end_month} has {records.shape[1]} records for "
                      f"{panel.n_series} series; correlation matrix will be singular",
                      SingularWindowWarning, stacklevel=2)
    return ReturnWindow(end_month, delta_t_years, panel.labels, start, end, records)


def write_table(rows, header, out: IO[str], delimiter: str = ",") -> None:
    """Write a header plus rows; floats use ``repr`` so output is exact and reproducible."""
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def write_prices(panel: PricePanel, out: IO[str]) -> None:
    rows = ([d.isoformat(), *panel.prices[:, k]] for k, d in enumerate(panel.dates))
    write_table(rows, ["date", *panel.labels], out)


def write_returns(panel: ReturnPanel, out: IO[str]) -> None:
    rows = ([d.isoformat(), *panel.returns[:, k]] for k, d in enumerate(panel.dates))
    write_table(rows, ["date", *panel.labels], out)


def prices_to_text(panel: PricePanel) -> str:
    buf = io.StringIO()
    write_prices(panel, buf)
    return buf.getvalue()
