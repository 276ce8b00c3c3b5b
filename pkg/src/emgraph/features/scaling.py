"""Column-wise standardization of feature matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError, InsufficientDataError, ShapeError


@dataclass(frozen=True)
class Standardizer:
    """Per-column means and population SDs frozen at fit time."""

    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        if means.shape != sds.shape or means.ndim != 1:
            raise ShapeError("means and sds must be 1-D arrays of equal length")
        if np.any(sds <= 0):
            raise DegenerateDataError("standardizer SDs must be positive")
        means.flags.writeable = False
        sds.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)


def fit_standardizer(matrix, column_names: list[str] | None = None) -> Standardizer:
    """Fit per-column mean/SD. Constant columns are rejected by name."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ShapeError("feature matrix must be 2-D")
    if matrix.shape[0] < 2:
        raise InsufficientDataError("standardizer needs at least 2 rows")
    means = matrix.mean(axis=0)
    sds = matrix.std(axis=0)
    constant = np.flatnonzero(sds == 0)
    if constant.size:
        idx = int(constant[0])
        name = column_names[idx] if column_names else f"column {idx}"
        raise DegenerateDataError(f"constant feature cannot be standardized: {name}")
    return Standardizer(means=means, sds=sds)


def apply_standardizer(standardizer: Standardizer, matrix) -> np.ndarray:
    """Return (x - mean) / sd per column."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != standardizer.means.size:
        raise ShapeError(
            f"matrix has {matrix.shape[-1] if matrix.ndim == 2 else '?'} columns, "
            f"standardizer expects {standardizer.means.size}"
        )
    return (matrix - standardizer.means) / standardizer.sds
