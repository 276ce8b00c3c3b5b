"""Loading, validation, segmentation and windowing of raw sEMG recordings.

Recordings are CSV files with header ``t_s,emg_au[,stage]``; datasets are
directory trees ``<root>/{pd,healthy}/{left,right}/<subject>.csv``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .errors import (
    CsvParseError,
    EmptyInputError,
    InsufficientDataError,
    InvalidInputError,
    LayoutError,
    OrderingError,
    ParameterError,
    TruncatedRecordingError,
)

DEFAULT_OUTLIER_SIGMA = 6.0
MIN_WINDOW_SAMPLES = 16


class Group(Enum):
    """Cohort label. Numeric values double as classifier labels."""

    HEALTHY = 0
    PD = 1


class Hand(Enum):
    LEFT = "left"
    RIGHT = "right"


class SegmentId(IntEnum):
    """The five phases of one measurement session, in protocol order."""

    S1_RELAXATION = 1
    S2_PREP_CONTRACTION = 2
    S3_HOLD_CONTRACTION = 3
    S4_PREP_REPETITIONS = 4
    S5_REPETITIONS = 5


@dataclass(frozen=True)
class Recording:
    """One subject/hand session: timestamped amplitude series plus metadata.

    ``t`` is in seconds, ``v`` in arbitrary units (AU). ``stage_marks`` is an
    optional ordered list of (time, segment) pairs marking phase starts.
    """

    subject_id: str
    group: Group
    hand: Hand
    sampling_rate_hz: float
    t: np.ndarray
    v: np.ndarray
    stage_marks: tuple[tuple[float, SegmentId], ...] | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.size == 0 or v.size == 0:
            raise EmptyInputError("recording has no samples")
        if t.size != v.size:
            raise ParameterError("timestamp and value arrays differ in length")
        if self.sampling_rate_hz <= 0:
            raise ParameterError("sampling_rate_hz must be positive")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise OrderingError("timestamps must be strictly increasing")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        if self.stage_marks is not None:
            marks = tuple((float(mt), SegmentId(ms)) for mt, ms in self.stage_marks)
            times = [mt for mt, _ in marks]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise OrderingError("stage mark times must be strictly increasing")
            object.__setattr__(self, "stage_marks", marks)

    @property
    def n_samples(self) -> int:
        return int(self.t.size)

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class ValidationReport:
    outlier_count: int
    discontinuity_count: int

    @property
    def passed(self) -> bool:
        return self.outlier_count == 0 and self.discontinuity_count == 0


@dataclass(frozen=True)
class ProtocolTiming:
    """Per-segment durations in seconds, used when a recording carries no marks."""

    durations_s: tuple[float, float, float, float, float] = (30.0, 5.0, 30.0, 5.0, 30.0)

    def boundaries(self) -> list[tuple[float, float, SegmentId]]:
        """Half-open [start, end) intervals for S1..S5, relative to recording start."""
        out = []
        start = 0.0
        for seg, dur in zip(SegmentId, self.durations_s):
            out.append((start, start + dur, seg))
            start += dur
        return out

    @property
    def span_s(self) -> float:
        return float(sum(self.durations_s))


@dataclass(frozen=True)
class Window:
    """A fixed-length slice of one segment, the unit of feature extraction."""

    values: np.ndarray
    start_t: float
    subject_id: str = ""
    hand: Hand | None = None
    segment: SegmentId | None = None
    label: Group | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise EmptyInputError("window has no samples")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("window contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


def load_recording(
    source,
    *,
    subject_id: str = "unknown",
    group: Group = Group.HEALTHY,
    hand: Hand = Hand.LEFT,
    sampling_rate_hz: float | None = None,
) -> Recording:
    """Parse one recording CSV (path, bytes, or text).

    The header must contain ``t_s`` and ``emg_au``; an optional ``stage``
    column holds integers 1..5. When ``sampling_rate_hz`` is not supplied it
    is estimated as 1/median(dt).
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError("CSV file is empty") from None
    header = [h.strip() for h in header]
    for required in ("t_s", "emg_au"):
        if required not in header:
            raise CsvParseError(f"missing required column {required!r}", line_number=1)
    it_col = header.index("t_s")
    iv_col = header.index("emg_au")
    is_col = header.index("stage") if "stage" in header else None

    times: list[float] = []
    values: list[float] = []
    stages: list[int] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < len(header):
            raise CsvParseError(f"expected {len(header)} fields, got {len(row)}", line_no)
        try:
            times.append(float(row[it_col]))
            values.append(float(row[iv_col]))
        except ValueError as exc:
            raise CsvParseError(str(exc), line_no) from None
        if is_col is not None:
            try:
                stage = int(row[is_col])
                SegmentId(stage)
            except ValueError as exc:
                raise CsvParseError(f"bad stage value {row[is_col]!r}", line_no) from None
            stages.append(stage)

    if not times:
        raise EmptyInputError("CSV file has a header but no data rows")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size > 1 and not np.all(np.diff(t) > 0):
        bad = int(np.argmin(np.diff(t) > 0))
        raise OrderingError(f"timestamps not strictly increasing near row {bad + 2}")

    if sampling_rate_hz is None:
        if t.size < 2:
            raise InsufficientDataError("cannot estimate sampling rate from one sample")
        sampling_rate_hz = float(1.0 / np.median(np.diff(t)))

    marks = None
    if is_col is not None:
        marks = _marks_from_stage_column(t, stages)

    return Recording(
        subject_id=subject_id,
        group=group,
        hand=hand,
        sampling_rate_hz=sampling_rate_hz,
        t=t,
        v=v,
        stage_marks=marks,
    )


def _marks_from_stage_column(t: np.ndarray, stages: list[int]):
    marks = [(float(t[0]), SegmentId(stages[0]))]
    for i in range(1, len(stages)):
        if stages[i] != stages[i - 1]:
            marks.append((float(t[i]), SegmentId(stages[i])))
    return tuple(marks)


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str) and "\n" in source:
        return source
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    return Path(source).read_text(encoding="utf-8")


def write_recording(recording: Recording, path) -> None:
    """Write a recording in the CSV schema; includes a stage column iff marks exist.

    Floats are written with ``repr`` so a reload reproduces them bit for bit.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    marks = recording.stage_marks
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if marks:
            fh.write("t_s,emg_au,stage\n")
            stage_per_sample = _stages_per_sample(recording.t, marks)
            for ti, vi, si in zip(recording.t, recording.v, stage_per_sample):
                fh.write(f"{float(ti)!r},{float(vi)!r},{si}\n")
        else:
            fh.write("t_s,emg_au\n")
            for ti, vi in zip(recording.t, recording.v):
                fh.write(f"{float(ti)!r},{float(vi)!r}\n")


def _stages_per_sample(t: np.ndarray, marks) -> np.ndarray:
    mark_times = np.array([mt for mt, _ in marks])
    mark_stages = np.array([int(ms) for _, ms in marks])
    idx = np.searchsorted(mark_times, t, side="right") - 1
    idx = np.clip(idx, 0, len(marks) - 1)
    return mark_stages[idx]


def validate(recording: Recording, outlier_sigma: float = DEFAULT_OUTLIER_SIGMA) -> ValidationReport:
    """Count amplitude outliers (|v - mean| > sigma*SD) and sampling gaps (dt off nominal by >5%)."""
    if outlier_sigma <= 0:
        raise ParameterError("outlier_sigma must be positive")
    if recording.n_samples < 2:
        raise InsufficientDataError("validation needs at least 2 samples")
    v = recording.v
    mean = float(np.mean(v))
    sd = float(np.std(v))
    outliers = int(np.count_nonzero(np.abs(v - mean) > outlier_sigma * sd))
    nominal = 1.0 / recording.sampling_rate_hz
    dt = np.diff(recording.t)
    discontinuities = int(np.count_nonzero(np.abs(dt - nominal) > 0.05 * nominal))
    return ValidationReport(outlier_count=outliers, discontinuity_count=discontinuities)


REQUIRED_SEGMENTS = (
    SegmentId.S1_RELAXATION,
    SegmentId.S3_HOLD_CONTRACTION,
    SegmentId.S5_REPETITIONS,
)


def segment(
    recording: Recording, protocol: ProtocolTiming | None = None
) -> dict[SegmentId, np.ndarray]:
    """Split a recording into per-segment value slices.

    Stage marks win when present; otherwise the protocol's timing arithmetic
    is applied relative to the first timestamp. S1, S3 and S5 must be covered.
    """
    if recording.stage_marks:
        return _segment_by_marks(recording)
    return _segment_by_protocol(recording, protocol or ProtocolTiming())


def _segment_by_marks(recording: Recording) -> dict[SegmentId, np.ndarray]:
    marks = recording.stage_marks
    out: dict[SegmentId, np.ndarray] = {}
    t = recording.t
    for i, (start_t, seg) in enumerate(marks):
        end_t = marks[i + 1][0] if i + 1 < len(marks) else np.inf
        lo = int(np.searchsorted(t, start_t, side="left"))
        hi = int(np.searchsorted(t, end_t, side="left"))
        if hi > lo:
            out[seg] = recording.v[lo:hi]
    for seg in REQUIRED_SEGMENTS:
        if seg not in out:
            raise TruncatedRecordingError(
                f"stage marks never cover segment {seg.name}", missing_segment=seg
            )
    return out


def _segment_by_protocol(recording: Recording, protocol: ProtocolTiming) -> dict[SegmentId, np.ndarray]:
    t = recording.t - recording.t[0]
    end_reach = t[-1] + 1.0 / recording.sampling_rate_hz
    out: dict[SegmentId, np.ndarray] = {}
    for start, end, seg in protocol.boundaries():
        if end_reach < end:
            raise TruncatedRecordingError(
                f"recording ends at {t[-1]:.3f}s before segment {seg.name} "
                f"completes at {end:.3f}s",
                missing_segment=seg,
            )
        lo = int(np.searchsorted(t, start, side="left"))
        hi = int(np.searchsorted(t, end, side="left"))
        if hi > lo:
            out[seg] = recording.v[lo:hi]
    return out


def make_windows(
    values: np.ndarray,
    window_s: float,
    overlap_fraction: float,
    fs: float,
    *,
    start_t: float = 0.0,
    subject_id: str = "",
    hand: Hand | None = None,
    segment_id: SegmentId | None = None,
    label: Group | None = None,
) -> list[Window]:
    """Cut a segment slice into fixed-length windows.

    Window length is floor(window_s*fs) samples, hop floor(window_s*fs*(1-overlap));
    a trailing remainder shorter than one window is dropped.
    """
    if not 0 <= overlap_fraction < 1:
        raise ParameterError("overlap_fraction must be in [0, 1)")
    if fs <= 0:
        raise ParameterError("fs must be positive")
    raw_len = window_s * fs
    if raw_len < MIN_WINDOW_SAMPLES:
        raise ParameterError(f"window must hold at least {MIN_WINDOW_SAMPLES} samples")
    length = int(np.floor(raw_len))
    hop = int(np.floor(raw_len * (1.0 - overlap_fraction)))
    if hop < 1:
        raise ParameterError("overlap too large: hop would be zero samples")
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < length:
        return []
    count = (n - length) // hop + 1
    windows = []
    for i in range(count):
        lo = i * hop
        windows.append(
            Window(
                values=values[lo : lo + length],
                start_t=start_t + lo / fs,
                subject_id=subject_id,
                hand=hand,
                segment=segment_id,
                label=label,
            )
        )
    return windows


_GROUP_DIRS = {"pd": Group.PD, "healthy": Group.HEALTHY}
_HAND_DIRS = {"left": Hand.LEFT, "right": Hand.RIGHT}


def load_dataset(root, sampling_rate_hz: float | None = None) -> list[Recording]:
    """Load every recording under ``<root>/{pd,healthy}/{left,right}/*.csv``.

    Returns recordings in deterministic lexicographic path order with group
    and hand inferred from the directory names.
    """
    root = Path(root)
    if not root.is_dir():
        raise LayoutError(f"dataset root {root} is not a directory")
    recordings: list[Recording] = []
    for group_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if group_dir.name not in _GROUP_DIRS:
            raise LayoutError(f"unexpected directory {group_dir} (want pd/ or healthy/)")
        group = _GROUP_DIRS[group_dir.name]
        for hand_dir in sorted(p for p in group_dir.iterdir() if p.is_dir()):
            if hand_dir.name not in _HAND_DIRS:
                raise LayoutError(f"unexpected directory {hand_dir} (want left/ or right/)")
            hand = _HAND_DIRS[hand_dir.name]
            for csv_path in sorted(hand_dir.glob("*.csv")):
                try:
                    recordings.append(
                        load_recording(
                            csv_path,
                            subject_id=csv_path.stem,
                            group=group,
                            hand=hand,
                            sampling_rate_hz=sampling_rate_hz,
                        )
                    )
                except OSError as exc:
                    raise LayoutError(f"cannot read {csv_path}: {exc}") from exc
    return recordings
