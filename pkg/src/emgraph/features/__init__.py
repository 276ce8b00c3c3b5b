"""Linear and nonlinear sEMG window features plus standardization."""

from .extract import (
    ALL_FEATURE_NAMES,
    EXTENDED_FEATURE_NAMES,
    MODEL_FEATURE_NAMES,
    FeatureConfig,
    FeatureVector,
    extract_features,
    model_features,
)
from .nonlinear import (
    correlation_dimension,
    default_radii,
    delay_embedding,
    recurrence_matrix,
    rqa_measures,
    sample_entropy,
)
from .scaling import Standardizer, apply_standardizer, fit_standardizer
from .spectral import Spectrum, mean_frequency, median_frequency, power_spectrum
from .stats import DescriptiveStats, descriptive_stats, rms

__all__ = [
    "ALL_FEATURE_NAMES",
    "EXTENDED_FEATURE_NAMES",
    "MODEL_FEATURE_NAMES",
    "DescriptiveStats",
    "FeatureConfig",
    "FeatureVector",
    "Spectrum",
    "Standardizer",
    "apply_standardizer",
    "correlation_dimension",
    "default_radii",
    "delay_embedding",
    "descriptive_stats",
    "extract_features",
    "fit_standardizer",
    "mean_frequency",
    "median_frequency",
    "model_features",
    "power_spectrum",
    "recurrence_matrix",
    "rms",
    "rqa_measures",
    "sample_entropy",
]
