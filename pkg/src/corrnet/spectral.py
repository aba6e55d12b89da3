"""Eigen-decomposition of correlation matrices and the random-matrix noise edge."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .corr import CorrelationMatrix
from .errors import DataError

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralSummary:
    labels: tuple[str, ...]
    eigenvalues: np.ndarray = field(repr=False)   # descending
    eigenvectors: np.ndarray = field(repr=False)  # column k pairs with eigenvalues[k]
    reference_label: str
    rmt_upper: float | None = None
    record_count: int | None = None

    @property
    def n_above(self) -> int | None:
        if self.rmt_upper is None:
            return None
        return count_above_threshold(self)


def orient(vector: np.ndarray, ref_index: int) -> np.ndarray:
    """Flip ``vector`` so its reference component is positive.

    A zero reference component falls back to making the component sum positive.
    """
    ref = vector[ref_index]
    if ref < 0 or (ref == 0 and vector.sum() < 0):
        return -vector
    return vector


def rmt_upper_bound(n_series: int, n_records: int) -> float:
    """Upper edge ``(1 + sqrt(N/T))^2`` of the eigenvalue spectrum for unit-variance i.i.d. series."""
    if n_series <= 0 or n_records <= 0:
        raise DataError("n_series and n_records must be positive")
    return (1.0 + math.sqrt(n_series / n_records)) ** 2


def eigen_decompose(matrix: CorrelationMatrix | np.ndarray, reference_label: str | None = None,
                    n_records: int | None = None) -> SpectralSummary:
    """Full symmetric eigen-decomposition with descending eigenvalues and oriented eigenvectors.

    ``n_records`` (default: the matrix's record count, if known) sets the noise
    edge used by :func:`count_above_threshold`.
    """
    if isinstance(matrix, CorrelationMatrix):
        labels, c = matrix.labels, matrix.values
        if n_records is None:
            n_records = matrix.record_count
    else:
        c = np.asarray(matrix, dtype=float)
        labels = tuple(str(k) for k in range(c.shape[0]))
    if reference_label is None:
        reference_label = labels[0]
    if reference_label not in labels:
        raise DataError(f"reference label {reference_label!r} not present")
    asym = np.max(np.abs(c - c.T)) if c.size else 0.0
    if asym > SYMMETRY_TOL:
        raise DataError(f"matrix is asymmetric (max deviation {asym:.3g})")
    values, vectors = np.linalg.eigh(c)
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    vectors = vectors[:, order]
    ref = labels.index(reference_label)
    vectors = np.column_stack([orient(vectors[:, k], ref) for k in range(vectors.shape[1])])
    upper = rmt_upper_bound(len(labels), n_records) if n_records else None
    return SpectralSummary(tuple(labels), values, vectors, reference_label, upper, n_records)


def count_above_threshold(summary: SpectralSummary) -> int:
    """Number of eigenvalues strictly above the noise edge."""
    if summary.rmt_upper is None:
        raise DataError("summary has no noise edge; pass n_records to eigen_decompose")
    return int(np.sum(summary.eigenvalues > summary.rmt_upper))


@dataclass(frozen=True)
class EigenSeries:
    months: tuple[str, ...]
    top_eigenvalues: np.ndarray = field(repr=False)  # months x k
    n_above: np.ndarray = field(repr=False)
    lambda_plus: np.ndarray = field(repr=False)
    ordering: tuple[str, ...] = ()
    v1: np.ndarray = field(default=None, repr=False)  # months x N, columns in ``ordering``
    v2: np.ndarray = field(default=None, repr=False)

    def eigenvalue_rows(self):
        for t, month in enumerate(self.months):
            for r in range(self.top_eigenvalues.shape[1]):
                yield month, r + 1, float(self.top_eigenvalues[t, r])

    def vector_rows(self):
        for t, month in enumerate(self.months):
            for k, label in enumerate(self.ordering):
                v2 = float(self.v2[t, k]) if self.v2 is not None else None
                yield month, label, float(self.v1[t, k]), v2

    def threshold_rows(self):
        for t, month in enumerate(self.months):
            yield month, int(self.n_above[t]), float(self.lambda_plus[t])


def eigen_series(matrices: Sequence[CorrelationMatrix], reference_label: str, k: int = 3,
                 ordering: Sequence[str] | None = None) -> EigenSeries:
    """Per-month top-k eigenvalues, noise-edge counts and oriented first/second eigenvectors."""
    if not matrices:
        raise DataError("no matrices given")
    labels = matrices[0].labels
    ordering = tuple(ordering) if ordering is not None else labels
    if sorted(ordering) != sorted(labels):
        raise DataError("ordering is not a permutation of the matrix labels")
    cols = [labels.index(label) for label in ordering]
    n = len(labels)
    k = max(0, min(k, n))
    top = np.zeros((len(matrices), k))
    above = np.zeros(len(matrices), dtype=int)
    lam = np.zeros(len(matrices))
    v1 = np.zeros((len(matrices), n))
    v2 = np.zeros((len(matrices), n)) if n > 1 else None
    months = []
    for t, m in enumerate(matrices):
        if m.labels != labels:
            raise DataError(f"label mismatch in matrix for {m.end_month}")
        s = eigen_decompose(m, reference_label)
        months.append(str(m.end_month))
        top[t] = s.eigenvalues[:k]
        above[t] = count_above_threshold(s)
        lam[t] = s.rmt_upper
        v1[t] = s.eigenvectors[cols, 0]
        if v2 is not None:
            v2[t] = s.eigenvectors[cols, 1]
    return EigenSeries(tuple(months), top, above, lam, ordering, v1, v2)
