"""Welch's unequal-variance t-test and its monthly MST-vs-PMFG application."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .corr import CorrelationMatrix
from .errors import DataError
from .filtgraph import FilteredGraph, mst, pmfg


@dataclass(frozen=True)
class WelchResult:
    t_statistic: float
    dof: float
    p_value: float
    n1: int
    n2: int
    mean1: float
    mean2: float
    var1: float
    var2: float


def student_t_sf2(t: float, dof: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) of Student's t with ``dof`` degrees of freedom.

    Uses the identity P = I_x(dof/2, 1/2) with x = dof / (dof + t^2).
    """
    if not dof > 0:
        raise DataError(f"degrees of freedom must be positive, got {dof}")
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return float(min(1.0, max(0.0, betainc(0.5 * dof, 0.5, x))))


def student_t_cdf(t: float, dof: float) -> float:
    tail = 0.5 * student_t_sf2(t, dof)
    return tail if t < 0 else 1.0 - tail


def welch_ttest(sample1: Sequence[float], sample2: Sequence[float]) -> WelchResult:
    """Two-sided Welch t-test for a difference in means (unbiased variances)."""
    a = np.asarray(sample1, dtype=float)
    b = np.asarray(sample2, dtype=float)
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise DataError(f"sample too small (sizes {n1}, {n2}); need at least 2 each")
    m1, m2 = float(a.mean()), float(b.mean())
    v1, v2 = float(a.var(ddof=1)), float(b.var(ddof=1))
    se1, se2 = v1 / n1, v2 / n2
    se = se1 + se2
    if se == 0:
        raise DataError("zero variance in both samples")
    t = (m1 - m2) / math.sqrt(se)
    dof = se * se / (se1 * se1 / (n1 - 1) + se2 * se2 / (n2 - 1))
    return WelchResult(t, dof, student_t_sf2(t, dof), n1, n2, m1, m2, v1, v2)


def link_correlations(graph: FilteredGraph, exclude: FilteredGraph | None = None) -> list[float]:
    skip = exclude.pairs() if exclude is not None else set()
    return [w for i, j, w in graph.edges if (i, j) not in skip]


def mst_vs_pmfg(matrix: CorrelationMatrix, exclude_shared: bool = False,
                graphs: tuple[FilteredGraph, FilteredGraph] | None = None) -> WelchResult:
    """Welch test of MST link correlations against PMFG link correlations.

    The PMFG sample includes links shared with the MST unless ``exclude_shared``.
    Prebuilt ``(mst, pmfg)`` graphs may be passed to avoid recomputation.
    """
    tree, planar = graphs if graphs is not None else (mst(matrix), pmfg(matrix))
    return welch_ttest(link_correlations(tree),
                       link_correlations(planar, tree if exclude_shared else None))


def mst_vs_pmfg_pvalues(matrices: Sequence[CorrelationMatrix], exclude_shared: bool = False) -> list[WelchResult]:
    return [mst_vs_pmfg(m, exclude_shared) for m in matrices]
