"""Dataset-to-feature-table assembly shared by the CLI and the evaluators."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CsvParseError, EmptyInputError, ParameterError
from .features.extract import (
    ALL_FEATURE_NAMES,
    MODEL_FEATURE_NAMES,
    FeatureConfig,
    extract_features,
)
from .signal_io import (
    Group,
    Hand,
    ProtocolTiming,
    Recording,
    SegmentId,
    Window,
    make_windows,
    segment,
)

ANALYSIS_SEGMENTS = (
    SegmentId.S1_RELAXATION,
    SegmentId.S3_HOLD_CONTRACTION,
    SegmentId.S5_REPETITIONS,
)

METADATA_COLUMNS = ("label", "subject", "hand", "segment")


@dataclass(frozen=True)
class WindowingConfig:
    window_s: float = 1.0
    overlap: float = 0.5
    segments: tuple[SegmentId, ...] = ANALYSIS_SEGMENTS


@dataclass(frozen=True)
class FeatureTable:
    """Feature matrix with aligned per-window metadata."""

    matrix: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray
    subjects: tuple[str, ...]
    hands: tuple[str, ...]
    segments: tuple[int, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        n = matrix.shape[0]
        if labels.size != n or len(self.subjects) != n or len(self.hands) != n:
            raise ParameterError("metadata columns must align with the matrix rows")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return int(self.matrix.shape[0])

    def columns(self, names) -> np.ndarray:
        idx = [self.feature_names.index(n) for n in names]
        return self.matrix[:, idx]

    def model_matrix(self) -> np.ndarray:
        return self.columns(MODEL_FEATURE_NAMES)


def windows_for_recording(
    recording: Recording,
    wcfg: WindowingConfig | None = None,
    protocol: ProtocolTiming | None = None,
) -> list[Window]:
    """Segment one recording and window the configured segments."""
    wcfg = wcfg or WindowingConfig()
    slices = segment(recording, protocol)
    fs = recording.sampling_rate_hz
    windows: list[Window] = []
    for seg in wcfg.segments:
        if seg not in slices:
            continue
        windows.extend(
            make_windows(
                slices[seg],
                wcfg.window_s,
                wcfg.overlap,
                fs,
                subject_id=recording.subject_id,
                hand=recording.hand,
                segment_id=seg,
                label=recording.group,
            )
        )
    return windows


def build_feature_table(
    recordings: list[Recording],
    wcfg: WindowingConfig | None = None,
    fcfg: FeatureConfig | None = None,
    protocol: ProtocolTiming | None = None,
    feature_names: tuple[str, ...] = MODEL_FEATURE_NAMES,
) -> FeatureTable:
    """Extract one feature row per window over a list of recordings."""
    wcfg = wcfg or WindowingConfig()
    if fcfg is None:
        needs_nonlinear = any(n not in MODEL_FEATURE_NAMES for n in feature_names)
        fcfg = FeatureConfig(include_nonlinear=needs_nonlinear)
    rows = []
    labels = []
    subjects = []
    hands = []
    segments = []
    for rec in recordings:
        for window in windows_for_recording(rec, wcfg, protocol):
            vector = extract_features(window, rec.sampling_rate_hz, fcfg)
            rows.append(vector.values(feature_names))
            labels.append(window.label.value)
            subjects.append(window.subject_id)
            hands.append(window.hand.value)
            segments.append(int(window.segment))
    if not rows:
        raise EmptyInputError("no windows produced from the given recordings")
    return FeatureTable(
        matrix=np.vstack(rows),
        feature_names=tuple(feature_names),
        labels=np.array(labels, dtype=np.int64),
        subjects=tuple(subjects),
        hands=tuple(hands),
        segments=tuple(segments),
    )


def feature_table_to_csv(table: FeatureTable, provenance: dict | None = None) -> str:
    """Serialize with the fixed column order, metadata last; '#' provenance header."""
    buf = io.StringIO()
    for key, value in sorted((provenance or {}).items()):
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(table.feature_names) + list(METADATA_COLUMNS))
    group_name = {0: "healthy", 1: "pd"}
    for i in range(table.n_rows):
        row = [repr(float(v)) for v in table.matrix[i]]
        row += [
            group_name[int(table.labels[i])],
            table.subjects[i],
            table.hands[i],
            str(table.segments[i]),
        ]
        writer.writerow(row)
    return buf.getvalue()


def feature_table_from_csv(text: str) -> FeatureTable:
    """Parse a feature CSV produced by feature_table_to_csv."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError("feature CSV is empty") from None
    for col in METADATA_COLUMNS:
        if col not in header:
            raise CsvParseError(f"missing metadata column {col!r}")
    meta_start = header.index(METADATA_COLUMNS[0])
    feature_names = tuple(header[:meta_start])
    label_of = {"healthy": 0, "pd": 1}
    rows, labels, subjects, hands, segments = [], [], [], [], []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            rows.append([float(v) for v in row[:meta_start]])
            labels.append(label_of[row[meta_start]])
            subjects.append(row[meta_start + 1])
            hands.append(row[meta_start + 2])
            segments.append(int(row[meta_start + 3]))
        except (ValueError, KeyError) as exc:
            raise CsvParseError(str(exc), line_no) from None
    if not rows:
        raise EmptyInputError("feature CSV has no data rows")
    return FeatureTable(
        matrix=np.array(rows, dtype=float),
        feature_names=feature_names,
        labels=np.array(labels, dtype=np.int64),
        subjects=tuple(subjects),
        hands=tuple(hands),
        segments=tuple(segments),
    )
