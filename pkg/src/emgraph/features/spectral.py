"""One-sided power spectrum and its frequency-domain summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    InsufficientDataError,
    InvalidInputError,
    ParameterError,
    UndefinedSpectrumError,
)

MIN_SPECTRUM_SAMPLES = 16


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum: strictly increasing ``freqs`` in Hz and
    nonnegative ``power`` per bin summing to the signal variance."""

    freqs: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        power = np.asarray(self.power, dtype=float)
        if freqs.shape != power.shape or freqs.ndim != 1:
            raise ParameterError("freqs and power must be 1-D arrays of equal length")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ParameterError("freqs must be strictly increasing")
        if not np.all(np.isfinite(power)) or np.any(power < 0):
            raise InvalidInputError("power values must be finite and nonnegative")
        freqs.flags.writeable = False
        power.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)

    @property
    def total_power(self) -> float:
        return float(np.sum(self.power))


def power_spectrum(x, fs: float, taper: str = "rectangular") -> Spectrum:
    """Periodogram of the mean-removed signal.

    With the default rectangular taper the bin powers sum exactly (Parseval)
    to the population variance of the signal. A ``hann`` taper is available
    for leakage-sensitive uses; its powers are scaled by the taper energy so
    the total still estimates the variance.
    """
    x = np.asarray(x, dtype=float)
    if x.size < MIN_SPECTRUM_SAMPLES:
        raise InsufficientDataError(
            f"spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {x.size}"
        )
    if fs <= 0:
        raise ParameterError("fs must be positive")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("signal contains non-finite samples")

    n = x.size
    centered = x - np.mean(x)
    if taper == "rectangular":
        tapered = centered
        norm = float(n)
    elif taper == "hann":
        w = np.hanning(n)
        tapered = centered * w
        norm = float(np.sum(w**2))
    else:
        raise ParameterError(f"unknown taper {taper!r}")

    spec = np.fft.rfft(tapered)
    power = np.abs(spec) ** 2 / (norm * n)
    # fold the negative-frequency half into the positive bins; DC and (for
    # even n) Nyquist are unique and stay unscaled
    power[1:] *= 2.0
    if n % 2 == 0:
        power[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    return Spectrum(freqs=freqs, power=power)


def median_frequency(spectrum: Spectrum) -> float:
    """Frequency splitting the spectral power in half.

    Bins are treated as mass centered on their frequency with width equal to
    the local bin spacing; the crossing bin is interpolated linearly, so a
    single spectral line returns its exact frequency.
    """
    power = spectrum.power
    total = spectrum.total_power
    if total <= 0:
        raise UndefinedSpectrumError("total power is zero")
    target = 0.5 * total
    cum = np.cumsum(power)
    k = int(np.searchsorted(cum, target, side="left"))
    freqs = spectrum.freqs
    if freqs.size == 1:
        return float(freqs[0])
    width = freqs[k] - freqs[k - 1] if k > 0 else freqs[1] - freqs[0]
    left_edge = freqs[k] - width / 2.0
    below = cum[k - 1] if k > 0 else 0.0
    return float(max(0.0, left_edge + width * (target - below) / power[k]))


def mean_frequency(spectrum: Spectrum) -> float:
    """Spectral centroid: sum(f * P(f)) / sum(P(f)); always nonnegative."""
    total = spectrum.total_power
    if total <= 0:
        raise UndefinedSpectrumError("total power is zero")
    return float(np.sum(spectrum.freqs * spectrum.power) / total)
