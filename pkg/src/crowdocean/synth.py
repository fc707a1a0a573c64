"""Synthetic pedestrian clips with controllable group structure.

Motion is purely kinematic: constant speed along a heading perturbed by
Gaussian jitter each frame. No collision avoidance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .features import SOCIAL_RADIUS, CollectivityParams, extract_features
from .ingest import Track, VideoClip

KINDS = ("coherent_group", "random_walk", "lone_among_crowd", "mixed", "dispersed")

# clearance kept between the lone agent and the cluster beyond the social radius
LONE_MARGIN = 1.0


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    agent_count: int
    frames: int
    base_speed: float = 0.05
    spacing: float = 2.0
    heading_jitter: float = 0.0
    seed: int = 0
    video_id: str = "synthetic"
    country: str = "ZZ"
    fps: float = 25.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.agent_count < 1:
            raise ConfigError("agent_count must be >= 1")
        if self.frames < 3:
            raise ConfigError("frames must be >= 3")
        if self.heading_jitter < 0:
            raise ConfigError("heading_jitter must be >= 0")
        if self.base_speed < 0 or self.spacing <= 0 or self.fps <= 0:
            raise ConfigError("base_speed must be >= 0, spacing and fps > 0")


def _walk(start: np.ndarray, headings_deg: np.ndarray, speed: float) -> np.ndarray:
    """Positions (frames, 2) from a start point and per-step headings (frames-1,)."""
    rad = np.radians(headings_deg)
    steps = speed * np.column_stack([np.cos(rad), np.sin(rad)])
    return np.vstack([start, start + np.cumsum(steps, axis=0)])


def _formation(n: int, spacing: float) -> np.ndarray:
    """Points on a circle of diameter ``spacing``: every pair is within ``spacing``."""
    if n == 1:
        return np.zeros((1, 2))
    ang = 2 * np.pi * np.arange(n) / n
    return 0.5 * spacing * np.column_stack([np.cos(ang), np.sin(ang)])


def _group(rng, n, frames, speed, spacing, jitter, heading, origin=(0.0, 0.0)):
    offsets = _formation(n, spacing) + np.asarray(origin)
    paths = []
    for j in range(n):
        h = heading + (rng.normal(0.0, jitter, frames - 1) if jitter > 0 else np.zeros(frames - 1))
        paths.append(_walk(offsets[j], h, speed))
    return paths


def _random_walk(rng, n, frames, speed, spacing, origin=(0.0, 0.0)):
    side = spacing * math.sqrt(n)
    paths = []
    for _ in range(n):
        start = rng.uniform(0.0, side, 2) + np.asarray(origin)
        paths.append(_walk(start, rng.uniform(0.0, 360.0, frames - 1), speed))
    return paths


def _dispersed(rng, n, frames, speed, spacing, jitter, heading, origin=(0.0, 0.0)):
    cols = math.ceil(math.sqrt(n))
    paths = []
    for j in range(n):
        start = np.array([j % cols, j // cols], dtype=float) * spacing + np.asarray(origin)
        h = heading + (rng.normal(0.0, jitter, frames - 1) if jitter > 0 else np.zeros(frames - 1))
        paths.append(_walk(start, h, speed))
    return paths


def _lone_path(cluster: list[np.ndarray], frames: int, speed: float, heading: float) -> np.ndarray:
    """A straight path parallel to the cluster's heading, offset so that every
    cluster member stays farther than the social radius at every frame."""
    direction = np.array([math.cos(math.radians(heading)), math.sin(math.radians(heading))])
    normal = np.array([-direction[1], direction[0]])
    anchor = np.arange(frames)[:, None] * speed * direction
    if cluster:
        deviation = max(float(np.max(np.abs((p - anchor) @ normal))) for p in cluster)
    else:
        deviation = 0.0
    offset = deviation + SOCIAL_RADIUS + LONE_MARGIN
    return anchor + offset * normal


def generate(spec: ScenarioSpec) -> VideoClip:
    """Build a clip in meters (scale 1.0); deterministic for a fixed spec."""
    rng = np.random.default_rng(spec.seed)
    n, frames, v = spec.agent_count, spec.frames, spec.base_speed
    heading = float(rng.uniform(0.0, 360.0))

    if spec.kind == "coherent_group":
        paths = _group(rng, n, frames, v, spec.spacing, spec.heading_jitter, heading)
    elif spec.kind == "random_walk":
        paths = _random_walk(rng, n, frames, v, spec.spacing)
    elif spec.kind == "dispersed":
        paths = _dispersed(rng, n, frames, v, spec.spacing, spec.heading_jitter, heading)
    elif spec.kind == "lone_among_crowd":
        cluster = _group(rng, n - 1, frames, v, spec.spacing, spec.heading_jitter, heading) if n > 1 else []
        paths = cluster + [_lone_path(cluster, frames, v, heading)]
    else:  # mixed: a group, random walkers and isolated walkers side by side
        g = max(1, n // 3)
        w = (n - g) // 2
        rest = n - g - w
        region = spec.spacing * 4 + SOCIAL_RADIUS
        paths = _group(rng, g, frames, v, spec.spacing, spec.heading_jitter, heading)
        if w:
            paths += _random_walk(rng, w, frames, v, spec.spacing * 2, origin=(region, 0.0))
        if rest:
            paths += _dispersed(
                rng, rest, frames, v, SOCIAL_RADIUS + spec.spacing, spec.heading_jitter,
                heading, origin=(0.0, region),
            )

    frame_idx = np.arange(frames, dtype=np.int64)
    trajectories = {aid: Track(frame_idx.copy(), p.astype(float)) for aid, p in enumerate(paths)}
    return VideoClip(
        video_id=spec.video_id,
        country=spec.country,
        fps=spec.fps,
        scale_m_per_unit=1.0,
        trajectories=trajectories,
    )


# --- training corpus ----------------------------------------------------------

TRAINING_SAMPLES = 16_000
TRAINING_WINDOW = 25  # leading frames of each clip used for training

# Per-kind parameter ranges drawn for each training clip, cycled in this order:
# (kind, agent_count range, spacing range in m, heading jitter range in degrees)
TRAINING_MIX = (
    ("coherent_group", (2, 12), (1.0, 3.5), (0.0, 15.0)),
    ("random_walk", (3, 30), (1.5, 6.0), (0.0, 0.0)),
    ("lone_among_crowd", (2, 12), (1.0, 3.0), (0.0, 10.0)),
    ("mixed", (6, 30), (1.0, 3.0), (0.0, 15.0)),
    ("dispersed", (2, 12), (4.0, 8.0), (0.0, 10.0)),
)


def training_specs(seed: int):
    """Endless, seeded stream of scenario specs following TRAINING_MIX."""
    rng = np.random.default_rng(seed)
    i = 0
    while True:
        kind, (n_lo, n_hi), (s_lo, s_hi), (j_lo, j_hi) = TRAINING_MIX[i % len(TRAINING_MIX)]
        yield ScenarioSpec(
            kind=kind,
            agent_count=int(rng.integers(n_lo, n_hi + 1)),
            frames=TRAINING_WINDOW,
            base_speed=float(rng.uniform(0.02, 0.08)),
            spacing=float(rng.uniform(s_lo, s_hi)),
            heading_jitter=float(rng.uniform(j_lo, j_hi)),
            seed=int(rng.integers(0, 2**31 - 1)),
            video_id=f"train-{i:05d}",
        )
        i += 1


def training_set(
    seed: int,
    n_samples: int = TRAINING_SAMPLES,
    params: CollectivityParams = CollectivityParams(),
    radius: float = SOCIAL_RADIUS,
) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth labelled classifier samples drawn from synthetic clips.

    Rows are (collectivity, mean distance, social-space count) for every agent
    frame with kinematics; labels come from the neighbor-ratio rule.
    """
    xs, ys, total = [], [], 0
    for spec in training_specs(seed):
        table = extract_features(generate(spec), params, radius)
        xs.append(table.net_inputs())
        ys.append(table.gt_label)
        total += len(table)
        if total >= n_samples:
            break
    return np.vstack(xs)[:n_samples], np.concatenate(ys)[:n_samples]


def training_set_csv(X: np.ndarray, y: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["collectivity", "mean_distance", "n_social", "social"])
    for row, label in zip(X.tolist(), y.tolist()):
        w.writerow([repr(row[0]), repr(row[1]), int(row[2]), int(label)])
    return buf.getvalue()

