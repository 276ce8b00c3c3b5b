"""Protocol-faithful synthetic sEMG cohort generator.

Signals are surrogates of an envelope-style sEMG channel, built from the five
session phases: rest, ramp-up, sustained hold, ramp-down, and 5-second
flexion/extension repetitions. The PD profile adds a resting-tremor band
oscillation (amplitude modulation of the active level) and burst-timing and
amplitude irregularity; the healthy profile omits both. Generation is
deterministic per (cohort seed, subject id, hand).
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import ParameterError
from .signal_io import (
    Group,
    Hand,
    ProtocolTiming,
    Recording,
    SegmentId,
    write_recording,
)


@dataclass(frozen=True)
class SignalProfile:
    """Shape parameters for one group's signals.

    baseline_noise_sd sets the resting activity scale in AU;
    contraction_gain multiplies it during holds and bursts; tremor is an
    amplitude modulation of the active level at tremor_freq with relative
    depth tremor_depth; burst_irregularity in [0, 1] jitters repetition
    bursts and adds fast stochastic modulation.
    """

    baseline_noise_sd: float = 30.0
    contraction_gain: float = 8.0
    tremor_freq: float = 0.0
    tremor_depth: float = 0.0
    burst_irregularity: float = 0.0

    def __post_init__(self):
        if min(self.baseline_noise_sd, self.contraction_gain, self.tremor_freq,
               self.tremor_depth, self.burst_irregularity) < 0:
            raise ParameterError("profile parameters must be nonnegative")
        if self.tremor_depth > 1 or self.burst_irregularity > 1:
            raise ParameterError("tremor_depth and burst_irregularity must be <= 1")


PD_PROFILE = SignalProfile(
    baseline_noise_sd=30.0,
    contraction_gain=8.0,
    tremor_freq=5.0,
    tremor_depth=0.45,
    burst_irregularity=0.5,
)
HEALTHY_PROFILE = SignalProfile(
    baseline_noise_sd=30.0,
    contraction_gain=8.0,
    tremor_freq=0.0,
    tremor_depth=0.0,
    burst_irregularity=0.0,
)


@dataclass(frozen=True)
class CohortSpec:
    n_pd: int = 5
    n_healthy: int = 5
    fs: float = 1000.0
    seed: int = 0
    pd_profile: SignalProfile = field(default_factory=lambda: PD_PROFILE)
    healthy_profile: SignalProfile = field(default_factory=lambda: HEALTHY_PROFILE)
    protocol: ProtocolTiming = field(default_factory=ProtocolTiming)

    def __post_init__(self):
        if self.n_pd + self.n_healthy < 2:
            raise ParameterError("cohort needs at least 2 subjects")
        if self.fs <= 0:
            raise ParameterError("fs must be positive")

    def profile_for(self, group: Group) -> SignalProfile:
        return self.pd_profile if group is Group.PD else self.healthy_profile


# relative amplitude of the slow stochastic envelope modulation and of the
# extra fast modulation scaled by burst_irregularity
SLOW_MOD_FRACTION = 0.22
FAST_MOD_FRACTION = 0.30
SLOW_SMOOTH_S = 0.20
FAST_SMOOTH_S = 0.012
RAMP_OFFSET = 60.0  # AU floor so signals sit above zero like sensor output
SUBJECT_GAIN_JITTER = 0.45
REPETITION_PERIOD_S = 5.0


def _substream(spec: CohortSpec, subject_id: str, hand: Hand, group: Group):
    key = (
        spec.seed & 0xFFFFFFFFFFFFFFFF,
        zlib.crc32(subject_id.encode("utf-8")),
        1 if hand is Hand.RIGHT else 0,
        group.value,
    )
    return np.random.default_rng(np.random.SeedSequence(key))


def _smooth_noise(rng, n: int, fs: float, smooth_s: float) -> np.ndarray:
    """Unit-variance low-passed Gaussian noise (single-pole smoothing)."""
    alpha = 1.0 / max(1.0, smooth_s * fs)
    raw = rng.standard_normal(n)
    smoothed = lfilter([alpha], [1.0, -(1.0 - alpha)], raw)
    stationary_sd = np.sqrt(alpha / (2.0 - alpha))
    return smoothed / stationary_sd


def _segment_level(spec: CohortSpec, profile: SignalProfile, rng, n: int, fs: float) -> np.ndarray:
    """Deterministic activity level over time for the five protocol phases."""
    base = profile.baseline_noise_sd
    peak = base * profile.contraction_gain
    irregularity = profile.burst_irregularity
    level = np.full(n, base)
    bounds = [(int(round(s * fs)), int(round(e * fs))) for s, e, _ in spec.protocol.boundaries()]
    (s1, e1), (s2, e2), (s3, e3), (s4, e4), (s5, e5) = bounds

    if e2 > s2:
        level[s2:e2] = np.linspace(base, peak, e2 - s2)
    level[s3:e3] = peak
    if e4 > s4:
        level[s4:e4] = np.linspace(peak, base, e4 - s4)

    # repetition bursts: one flexion/extension per 5 s interval
    period = int(round(REPETITION_PERIOD_S * fs))
    t5 = s5
    while t5 < e5:
        start = t5
        if irregularity > 0:
            start += int(round(irregularity * rng.uniform(-0.8, 0.8) * fs))
        start = max(s5, start)
        burst_len = int(round(period * 0.55))
        end = min(e5, start + burst_len)
        if end > start:
            shape = np.sin(np.linspace(0.0, np.pi, end - start)) ** 2
            amp = peak
            if irregularity > 0:
                amp *= 1.0 + irregularity * rng.uniform(-0.5, 0.5)
            level[start:end] = np.maximum(level[start:end], base + (amp - base) * shape)
        t5 += period
    return level


def generate_recording(subject_id: str, group: Group, hand: Hand, spec: CohortSpec) -> Recording:
    """One 5-phase session with embedded stage marks."""
    profile = spec.profile_for(group)
    rng = _substream(spec, subject_id, hand, group)
    fs = spec.fs
    n = int(round(spec.protocol.span_s * fs))

    # persistent per-subject physiology: amplitude gain, envelope smoothness,
    # tremor traits; these make a session's windows cluster the way repeated
    # measurements of one person do
    subject_gain = float(np.exp(SUBJECT_GAIN_JITTER * rng.standard_normal()))
    slow_smooth_s = SLOW_SMOOTH_S * float(np.exp(0.7 * rng.standard_normal()))
    fast_smooth_s = FAST_SMOOTH_S * float(np.exp(0.8 * rng.standard_normal()))
    irregularity = profile.burst_irregularity * rng.uniform(0.6, 1.4)
    tremor_depth = profile.tremor_depth * rng.uniform(0.5, 1.5)
    tremor_freq = profile.tremor_freq
    if tremor_freq > 0:
        tremor_freq += rng.uniform(-1.0, 1.0)

    level = _segment_level(spec, profile, rng, n, fs) * subject_gain
    t = np.arange(n) / fs

    modulation = np.ones(n)
    if tremor_depth > 0 and tremor_freq > 0:
        phase = rng.uniform(0.0, 2.0 * np.pi)
        modulation += min(1.0, tremor_depth) * np.sin(2.0 * np.pi * tremor_freq * t + phase)

    slow = _smooth_noise(rng, n, fs, slow_smooth_s)
    fast = _smooth_noise(rng, n, fs, fast_smooth_s)
    fast_fraction = FAST_MOD_FRACTION * irregularity
    v = (
        RAMP_OFFSET
        + level * modulation * (1.0 + SLOW_MOD_FRACTION * slow)
        + level * fast_fraction * fast
    )

    marks = tuple(
        (start, seg) for start, _, seg in spec.protocol.boundaries()
    )
    return Recording(
        subject_id=subject_id,
        group=group,
        hand=hand,
        sampling_rate_hz=fs,
        t=t,
        v=v,
        stage_marks=marks,
    )


def generate_recordings(spec: CohortSpec) -> list[Recording]:
    """All subject/hand sessions of the cohort, in dataset (lexicographic) order."""
    recordings = []
    roster = [(Group.HEALTHY, f"healthy{i + 1:02d}") for i in range(spec.n_healthy)]
    roster += [(Group.PD, f"pd{i + 1:02d}") for i in range(spec.n_pd)]
    for group, subject_id in roster:
        for hand in (Hand.LEFT, Hand.RIGHT):
            recordings.append(generate_recording(subject_id, group, hand, spec))
    return recordings


_GROUP_DIR = {Group.PD: "pd", Group.HEALTHY: "healthy"}


def generate_cohort(spec: CohortSpec, out_dir) -> dict:
    """Write the cohort tree plus manifest.json; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in generate_recordings(spec):
        rel = Path(_GROUP_DIR[rec.group]) / rec.hand.value / f"{rec.subject_id}.csv"
        write_recording(rec, out_dir / rel)
        entries.append(
            {
                "subject_id": rec.subject_id,
                "group": _GROUP_DIR[rec.group],
                "hand": rec.hand.value,
                "path": str(rel),
            }
        )
    manifest = {
        "seed": spec.seed,
        "fs": spec.fs,
        "n_pd": spec.n_pd,
        "n_healthy": spec.n_healthy,
        "subjects": entries,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
