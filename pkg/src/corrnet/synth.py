"""Gaussian return panels with a known correlation structure.

All generators use a Monday-to-Friday calendar and are deterministic per seed.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import DataError
from .panel import Month, PricePanel, ReturnPanel

PAPER_START = date(1996, 1, 1)
PAPER_END = date(2009, 7, 31)

# country vocabulary of a 57-market world index panel, usable as series labels
MARKET_LABELS = (
    "ARG", "AUS", "AUT", "BEL", "BMU", "BRA", "CAN", "CHL", "CHN", "CRI", "CZE", "DNK", "EGY", "ESP",
    "FIN", "FRA", "DEU", "GRC", "HKG", "HUN", "IDN", "IND", "IRL", "ISL", "ISR", "ITA", "JAM", "JPN",
    "KEN", "KOR", "SAU", "MAR", "MYS", "MEX", "MUS", "NLD", "NOR", "NZL", "OMN", "PAK", "PER", "PHL",
    "POL", "PRT", "ZAF", "RUS", "SVN", "LKA", "CHE", "SVK", "SWE", "THA", "TUR", "TWN", "GBR", "USA",
    "VEN",
)


def default_labels(n: int) -> tuple[str, ...]:
    if n == len(MARKET_LABELS):
        return MARKET_LABELS
    width = len(str(n))
    return tuple(f"S{k + 1:0{width}d}" for k in range(n))


def business_days(start: date, count: int) -> list[date]:
    """The first ``count`` weekdays on or after ``start``."""
    days = []
    day = start
    while len(days) < count:
        if day.weekday() < 5:
            days.append(day)
        day += timedelta(days=1)
    return days


def business_days_between(start: date, end: date) -> list[date]:
    days = []
    day = start
    while day <= end:
        if day.weekday() < 5:
            days.append(day)
        day += timedelta(days=1)
    return days


def _previous_business_day(day: date) -> date:
    day -= timedelta(days=1)
    while day.weekday() >= 5:
        day -= timedelta(days=1)
    return day


@dataclass(frozen=True)
class FactorSpec:
    """Block one-factor model: correlation ``rho_in`` inside blocks and ``rho_out`` across."""

    n_series: int
    n_records: int
    block_assignment: tuple[int, ...]
    rho_in: float
    rho_out: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "block_assignment", tuple(int(b) for b in self.block_assignment))
        if len(self.block_assignment) != self.n_series:
            raise DataError("block_assignment length must equal n_series")
        if self.n_records < 1:
            raise DataError("n_records must be positive")
        if not 0 <= self.rho_out <= self.rho_in < 1:
            raise DataError(f"need 0 <= rho_out <= rho_in < 1, got rho_in={self.rho_in}, rho_out={self.rho_out}")

    @classmethod
    def equal_blocks(cls, n_blocks: int, block_size: int, n_records: int, rho_in: float, rho_out: float,
                     seed: int = 0) -> "FactorSpec":
        assignment = tuple(k // block_size for k in range(n_blocks * block_size))
        return cls(n_blocks * block_size, n_records, assignment, rho_in, rho_out, seed)

    def population_matrix(self) -> np.ndarray:
        b = np.asarray(self.block_assignment)
        c = np.where(b[:, None] == b[None, :], self.rho_in, self.rho_out)
        np.fill_diagonal(c, 1.0)
        return c


def equicorrelation_matrix(n: int, rho: float) -> np.ndarray:
    c = np.full((n, n), float(rho))
    np.fill_diagonal(c, 1.0)
    return c


def _block_returns(spec: FactorSpec, rng: np.random.Generator) -> np.ndarray:
    t = spec.n_records
    blocks = np.asarray(spec.block_assignment)
    _, block_index = np.unique(blocks, return_inverse=True)
    market = rng.standard_normal(t)
    factors = rng.standard_normal((block_index.max() + 1, t))
    noise = rng.standard_normal((spec.n_series, t))
    return (math.sqrt(spec.rho_out) * market[None, :]
            + math.sqrt(spec.rho_in - spec.rho_out) * factors[block_index]
            + math.sqrt(1.0 - spec.rho_in) * noise)


def gen_equicorrelated(n: int, t: int, rho: float, seed: int, start: date = PAPER_START,
                       volatility: float = 1.0, labels: Sequence[str] | None = None) -> ReturnPanel:
    """Gaussian returns with correlation ``rho`` between every pair of series."""
    if n < 2:
        raise DataError("need at least 2 series")
    if not -1.0 / (n - 1) < rho < 1:
        raise DataError(f"rho={rho} outside the positive-definite range (-1/(n-1), 1)")
    rng = np.random.default_rng(seed)
    if rho >= 0:
        spec = FactorSpec(n, t, (0,) * n, rho, rho, seed)
        r = _block_returns(spec, rng)
    else:
        chol = np.linalg.cholesky(equicorrelation_matrix(n, rho))
        r = chol @ rng.standard_normal((n, t))
    dates = business_days(_next_day(start), t)
    return ReturnPanel(dates, labels or default_labels(n), volatility * r)


def _next_day(day: date) -> date:
    return day + timedelta(days=1)


def gen_blocks(spec: FactorSpec, start: date = PAPER_START, volatility: float = 1.0,
               labels: Sequence[str] | None = None) -> ReturnPanel:
    """Block one-factor panel; returns begin on the first weekday after ``start``."""
    rng = np.random.default_rng(spec.seed)
    r = _block_returns(spec, rng)
    dates = business_days(_next_day(start), spec.n_records)
    return ReturnPanel(dates, labels or default_labels(spec.n_series), volatility * r)


def gen_regime_shift(before: FactorSpec, after: FactorSpec, shift_month: Month | str,
                     volatility: float = 1.0, labels: Sequence[str] | None = None) -> ReturnPanel:
    """Concatenate ``before.n_records`` days of one process and ``after.n_records`` of another.

    The generating process switches on the first weekday of ``shift_month``.
    """
    if before.n_series != after.n_series:
        raise DataError("before and after specs must have the same number of series")
    if isinstance(shift_month, str):
        shift_month = Month.parse(shift_month)
    after_dates = business_days(shift_month.first_day(), after.n_records)
    before_dates = []
    day = after_dates[0]
    for _ in range(before.n_records):
        day = _previous_business_day(day)
        before_dates.append(day)
    before_dates.reverse()
    r1 = _block_returns(before, np.random.default_rng([before.seed, 0]))
    r2 = _block_returns(after, np.random.default_rng([after.seed, 1]))
    return ReturnPanel(before_dates + after_dates, labels or default_labels(before.n_series),
                       volatility * np.hstack([r1, r2]))


def to_prices(returns: ReturnPanel, start_price: float = 100.0) -> PricePanel:
    """Price levels ``start_price * exp(cumulative returns)``, with the base price on the prior weekday."""
    base = _previous_business_day(returns.dates[0])
    cum = np.cumsum(returns.returns, axis=1)
    prices = start_price * np.exp(np.hstack([np.zeros((returns.n_series, 1)), cum]))
    return PricePanel((base, *returns.dates), returns.labels, prices)


def paper_calendar_records(start: date = PAPER_START, end: date = PAPER_END) -> int:
    """Number of daily returns on a weekday calendar whose first price falls on ``start``."""
    return len(business_days_between(_next_day(start), end))
