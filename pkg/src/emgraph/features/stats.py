"""Amplitude and distribution-shape features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError, EmptyInputError, InsufficientDataError


def rms(x) -> float:
    """Root mean square of the signal."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyInputError("rms of an empty sequence")
    return float(np.sqrt(np.mean(np.square(x))))


@dataclass(frozen=True)
class DescriptiveStats:
    variance: float
    sd: float
    skewness: float
    kurtosis_excess: float
    minimum: float
    maximum: float
    value_range: float


def descriptive_stats(x) -> DescriptiveStats:
    """Population moments of the sample distribution.

    variance = m2, skewness = m3/m2^1.5, excess kurtosis = m4/m2^2 - 3
    (Gaussian maps to 0). Needs at least 4 samples and nonzero variance.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("descriptive stats need at least 2 samples")
    if x.size < 4:
        raise InsufficientDataError("kurtosis needs at least 4 samples")
    centered = x - np.mean(x)
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateDataError("zero variance: skewness and kurtosis undefined")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    minimum = float(np.min(x))
    maximum = float(np.max(x))
    return DescriptiveStats(
        variance=m2,
        sd=float(np.sqrt(m2)),
        skewness=m3 / m2**1.5,
        kurtosis_excess=m4 / m2**2 - 3.0,
        minimum=minimum,
        maximum=maximum,
        value_range=maximum - minimum,
    )
