"""sEMG feature extraction and graph-based PD/healthy classification."""

__version__ = "0.1.0"

from . import errors
from .signal_io import (
    Group,
    Hand,
    ProtocolTiming,
    Recording,
    SegmentId,
    ValidationReport,
    Window,
    load_dataset,
    load_recording,
    make_windows,
    segment,
    validate,
    write_recording,
)

__all__ = [
    "Group",
    "Hand",
    "ProtocolTiming",
    "Recording",
    "SegmentId",
    "ValidationReport",
    "Window",
    "errors",
    "load_dataset",
    "load_recording",
    "make_windows",
    "segment",
    "validate",
    "write_recording",
    "__version__",
]
