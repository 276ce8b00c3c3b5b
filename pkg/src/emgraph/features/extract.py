"""Per-window feature vector assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateDataError, EmgError
from ..signal_io import Window
from .nonlinear import (
    correlation_dimension,
    default_radii,
    recurrence_matrix,
    rqa_measures,
    sample_entropy,
)
from .spectral import mean_frequency, median_frequency, power_spectrum
from .stats import descriptive_stats, rms

MODEL_FEATURE_NAMES = (
    "rms",
    "mdf",
    "mean_freq",
    "variance",
    "skewness",
    "kurtosis",
    "max",
    "min",
    "range",
)
EXTENDED_FEATURE_NAMES = ("sd", "rec", "det", "samp_en", "cd")
ALL_FEATURE_NAMES = MODEL_FEATURE_NAMES + EXTENDED_FEATURE_NAMES


@dataclass(frozen=True)
class FeatureConfig:
    """Extraction parameters; defaults follow common practice for sEMG windows."""

    taper: str = "rectangular"
    rqa_embedding_dim: int = 3
    rqa_delay: int = 1
    rqa_eps_sd_scale: float = 0.2
    rqa_l_min: int = 2
    sampen_m: int = 2
    sampen_r_sd_scale: float = 0.2
    cd_embedding_dim: int = 3
    cd_delay: int = 1
    cd_n_radii: int = 12
    cd_radius_sd_scales: tuple[float, float] = (0.05, 2.0)
    include_nonlinear: bool = True


@dataclass(frozen=True)
class FeatureVector:
    """The 9 model features plus the extended nonlinear set for one window.

    Fields that cannot be computed for a degenerate window are NaN, with the
    reason recorded in ``flags``.
    """

    rms: float
    mdf: float
    mean_freq: float
    variance: float
    skewness: float
    kurtosis: float
    max: float
    min: float
    range: float
    sd: float
    rec: float = math.nan
    det: float = math.nan
    samp_en: float = math.nan
    cd: float = math.nan
    flags: tuple[str, ...] = field(default=())

    def values(self, names=ALL_FEATURE_NAMES) -> np.ndarray:
        return np.array([getattr(self, _FIELD_BY_NAME[n]) for n in names], dtype=float)

    @property
    def degenerate(self) -> bool:
        return bool(self.flags)


_FIELD_BY_NAME = {name: name for name in ALL_FEATURE_NAMES}


def extract_features(window: Window, fs: float, cfg: FeatureConfig | None = None) -> FeatureVector:
    """Compute every configured feature of one window.

    Individual feature failures on degenerate input (for example a constant
    window) become NaN values with a flag; structural errors are re-raised
    tagged with the failing feature.
    """
    cfg = cfg or FeatureConfig()
    x = window.values
    flags: list[str] = []

    amplitude = _tagged(lambda: rms(x), "rms")
    minimum = float(np.min(x))
    maximum = float(np.max(x))
    sd = float(np.std(x))
    variance = float(np.var(x))

    if variance == 0.0:
        flags.append("degenerate_window")
        skewness = kurtosis = math.nan
    else:
        stats = _tagged(lambda: descriptive_stats(x), "descriptive_stats")
        skewness = stats.skewness
        kurtosis = stats.kurtosis_excess

    try:
        spectrum = power_spectrum(x, fs, taper=cfg.taper)
        mdf = _tagged(lambda: median_frequency(spectrum), "mdf")
        mfreq = _tagged(lambda: mean_frequency(spectrum), "mean_freq")
    except EmgError:
        if variance != 0.0:
            raise
        flags.append("spectrum_undefined")
        mdf = mfreq = math.nan

    rec = det = samp_en = cd = math.nan
    if cfg.include_nonlinear:
        if variance == 0.0:
            flags.append("nonlinear_undefined")
        else:
            eps = cfg.rqa_eps_sd_scale * sd
            matrix = _tagged(
                lambda: recurrence_matrix(x, cfg.rqa_embedding_dim, cfg.rqa_delay, eps),
                "recurrence_matrix",
            )
            rqa = _tagged(lambda: rqa_measures(matrix, cfg.rqa_l_min), "rqa_measures")
            rec, det = rqa.rec, rqa.det
            sampen_result = _tagged(
                lambda: sample_entropy(x, cfg.sampen_m, cfg.sampen_r_sd_scale * sd),
                "samp_en",
            )
            samp_en = sampen_result.value
            if sampen_result.capped:
                flags.append("samp_en_capped")
            lo, hi = cfg.cd_radius_sd_scales
            radii = default_radii(x, cfg.cd_n_radii, lo, hi)
            cd = _tagged(
                lambda: correlation_dimension(x, cfg.cd_embedding_dim, radii, cfg.cd_delay),
                "cd",
            )

    return FeatureVector(
        rms=amplitude,
        mdf=mdf,
        mean_freq=mfreq,
        variance=variance,
        skewness=skewness,
        kurtosis=kurtosis,
        max=maximum,
        min=minimum,
        range=maximum - minimum,
        sd=sd,
        rec=rec,
        det=det,
        samp_en=samp_en,
        cd=cd,
        flags=tuple(flags),
    )


def _tagged(compute, feature_name: str):
    """Run one feature computation, tagging any library error with its name."""
    try:
        return compute()
    except DegenerateDataError:
        raise
    except EmgError as exc:
        raise type(exc)(f"{feature_name}: {exc}") from exc


def model_features(window: Window, fs: float, cfg: FeatureConfig | None = None) -> np.ndarray:
    """The 9-feature classifier row for one window (skips nonlinear features)."""
    cfg = cfg or FeatureConfig()
    fast_cfg = FeatureConfig(
        taper=cfg.taper,
        include_nonlinear=False,
    )
    return extract_features(window, fs, fast_cfg).values(MODEL_FEATURE_NAMES)
