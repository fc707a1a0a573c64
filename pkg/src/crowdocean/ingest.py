"""Parse, validate and world-calibrate tracker output.

A clip is one trajectory CSV (``frame,agent_id,x,y``) plus a JSON sidecar
with ``video_id``, ``country``, ``fps`` and ``scale_m_per_unit``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, EmptyInputError, ParseError, ValidationError

CSV_HEADER = ("frame", "agent_id", "x", "y")
META_FIELDS = ("video_id", "country", "fps", "scale_m_per_unit")
META_SUFFIX = ".meta.json"

DEFAULT_GAP_THRESHOLD = 5
MIN_OBSERVATIONS = 3

_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


class FrameObservation(NamedTuple):
    frame: int
    agent_id: int
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Track:
    """One agent's ordered observations as parallel arrays."""

    frames: np.ndarray  # int64, strictly increasing
    positions: np.ndarray  # (n, 2) float64

    def __len__(self) -> int:
        return len(self.frames)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Track):
            return NotImplemented
        return np.array_equal(self.frames, other.frames) and np.array_equal(
            self.positions, other.positions
        )

    def observations(self, agent_id: int) -> Iterator[FrameObservation]:
        for f, (x, y) in zip(self.frames.tolist(), self.positions.tolist()):
            yield FrameObservation(f, agent_id, x, y)


@dataclass(frozen=True)
class VideoClip:
    video_id: str
    country: str
    fps: float
    scale_m_per_unit: float
    trajectories: dict[int, Track] = field(default_factory=dict)

    @property
    def agent_ids(self) -> list[int]:
        return sorted(self.trajectories)

    def observation_count(self) -> int:
        return sum(len(t) for t in self.trajectories.values())

    def metadata(self) -> dict:
        return {
            "video_id": self.video_id,
            "country": self.country,
            "fps": self.fps,
            "scale_m_per_unit": self.scale_m_per_unit,
        }


@dataclass
class DropReport:
    dropped: list[dict] = field(default_factory=list)
    # new segment id -> original agent id, for agents split at frame gaps
    segments: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.dropped, indent=2)


def parse_metadata(metadata_text: str) -> dict:
    try:
        meta = json.loads(metadata_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"metadata is not valid JSON: {exc}") from exc
    if not isinstance(meta, dict):
        raise ConfigError("metadata must be a JSON object")
    missing = [k for k in META_FIELDS if k not in meta]
    if missing:
        raise ConfigError(f"metadata missing field(s): {', '.join(missing)}")

    country = meta["country"]
    if not isinstance(country, str) or not _COUNTRY_RE.match(country):
        raise ConfigError(f"country must be an ISO alpha-2 code, got {country!r}")
    for key in ("fps", "scale_m_per_unit"):
        value = meta[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        if not math.isfinite(value) or value <= 0:
            raise ConfigError(f"{key} must be positive, got {value!r}")
    return {
        "video_id": str(meta["video_id"]),
        "country": country,
        "fps": float(meta["fps"]),
        "scale_m_per_unit": float(meta["scale_m_per_unit"]),
    }


def _parse_rows(trajectory_text: str) -> list[FrameObservation]:
    reader = csv.reader(io.StringIO(trajectory_text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty trajectory file", line=1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"expected header {','.join(CSV_HEADER)}", line=1)

    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", line=line)
        try:
            frame = int(row[0])
            agent_id = int(row[1])
            x = float(row[2])
            y = float(row[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=line) from None
        if frame < 0:
            raise ParseError(f"negative frame index {frame}", line=line)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite coordinate", line=line)
        rows.append(FrameObservation(frame, agent_id, x, y))
    return rows


def clip_from_observations(
    observations: list[FrameObservation], meta: dict
) -> VideoClip:
    """Group observations by agent, sorted by (agent_id, frame)."""
    by_agent: dict[int, list[FrameObservation]] = {}
    for obs in sorted(observations, key=lambda o: (o.agent_id, o.frame)):
        by_agent.setdefault(obs.agent_id, []).append(obs)

    trajectories = {}
    for agent_id, obs in by_agent.items():
        frames = np.array([o.frame for o in obs], dtype=np.int64)
        dup = np.flatnonzero(np.diff(frames) == 0)
        if dup.size:
            raise ValidationError(
                f"duplicate observation for agent {agent_id} at frame {frames[dup[0]]}"
            )
        positions = np.array([(o.x, o.y) for o in obs], dtype=np.float64).reshape(-1, 2)
        trajectories[agent_id] = Track(frames, positions)
    return VideoClip(trajectories=trajectories, **meta)


def parse_clip(trajectory_text: str, metadata_text: str) -> VideoClip:
    """Build a clip in original (unscaled) units from CSV and sidecar text."""
    meta = parse_metadata(metadata_text)
    return clip_from_observations(_parse_rows(trajectory_text), meta)


def serialize_clip(clip: VideoClip) -> tuple[str, str]:
    """Inverse of :func:`parse_clip`; returns (csv_text, metadata_json)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for agent_id in clip.agent_ids:
        for obs in clip.trajectories[agent_id].observations(agent_id):
            writer.writerow([obs.frame, obs.agent_id, repr(obs.x), repr(obs.y)])
    return buf.getvalue(), json.dumps(clip.metadata(), indent=2) + "\n"


def metadata_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + META_SUFFIX)


def read_clip(csv_path: str | Path) -> VideoClip:
    csv_path = Path(csv_path)
    meta_path = metadata_path(csv_path)
    if not meta_path.exists():
        raise ConfigError(f"metadata sidecar not found: {meta_path}")
    return parse_clip(csv_path.read_text(), meta_path.read_text())


def write_clip(clip: VideoClip, csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    csv_text, meta_text = serialize_clip(clip)
    csv_path.write_text(csv_text)
    metadata_path(csv_path).write_text(meta_text)
    return csv_path


def validate_clip(
    clip: VideoClip, gap_threshold: int = DEFAULT_GAP_THRESHOLD
) -> tuple[VideoClip, DropReport]:
    """Split agents at frame gaps wider than ``gap_threshold`` and drop short tracks.

    The first segment of a split agent keeps its id; later segments get fresh ids
    above the clip's current maximum, assigned in (agent_id, frame) order.
    """
    if gap_threshold < 1:
        raise ConfigError("gap threshold must be >= 1 frame")
    report = DropReport()
    next_id = max(clip.trajectories, default=-1) + 1
    kept: dict[int, Track] = {}

    for agent_id in clip.agent_ids:
        track = clip.trajectories[agent_id]
        cuts = np.flatnonzero(np.diff(track.frames) > gap_threshold) + 1
        bounds = [0, *cuts.tolist(), len(track)]
        for k, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
            if k == 0:
                seg_id = agent_id
            else:
                seg_id = next_id
                next_id += 1
                report.segments[seg_id] = agent_id
            if hi - lo < MIN_OBSERVATIONS:
                report.dropped.append(
                    {"agent_id": seg_id, "reason": f"fewer than {MIN_OBSERVATIONS} observations ({hi - lo})"}
                )
                continue
            if lo == 0 and hi == len(track):
                kept[seg_id] = track
            else:
                kept[seg_id] = Track(track.frames[lo:hi].copy(), track.positions[lo:hi].copy())

    if not kept:
        raise EmptyInputError(f"clip {clip.video_id!r} has no usable trajectories")
    return replace(clip, trajectories=kept), report


def scale_to_meters(clip: VideoClip) -> VideoClip:
    scale = clip.scale_m_per_unit
    if not (math.isfinite(scale) and scale > 0):
        raise ConfigError(f"scale_m_per_unit must be positive, got {scale!r}")
    if scale == 1.0:
        return clip
    scaled = {
        aid: Track(t.frames, t.positions * scale) for aid, t in clip.trajectories.items()
    }
    return replace(clip, trajectories=scaled, scale_m_per_unit=1.0)


def load_clip(csv_path: str | Path, gap_threshold: int = DEFAULT_GAP_THRESHOLD):
    """Read, validate and scale one clip file; returns (clip, drop report)."""
    clip, report = validate_clip(read_clip(csv_path), gap_threshold)
    return scale_to_meters(clip), report
