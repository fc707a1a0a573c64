"""Per-frame pedestrian features and their per-video summaries.

Units: meters for positions and distances, frames for time, degrees for
headings and angular variation. Headings are measured counter-clockwise from
the reference vector (1, 0).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import AgentLookupError, ConfigError, InsufficientDataError
from .ingest import MIN_OBSERVATIONS, Track, VideoClip

SOCIAL_RADIUS = 3.6
SOCIAL_THRESHOLD = 0.5
# displacements shorter than this count as standing still
STATIONARY_EPS = 1e-12

FEATURE_CSV_HEADER = (
    "video_id", "agent_id", "frame", "speed", "heading_deg", "ang_var_deg",
    "n_social", "mean_dist", "collectivity", "gt_social",
)


@dataclass(frozen=True)
class KinematicState:
    speed: float
    heading: float
    angular_variation: float


@dataclass(frozen=True)
class NeighborhoodStats:
    n_social: int
    mean_distance: float
    frame_population: int


@dataclass(frozen=True)
class CollectivityParams:
    gamma: float = 1.0
    beta: float = 0.3
    w1: float = 1.0
    w2: float = 1.0
    pair_cap: float = 4.34

    def __post_init__(self):
        for name in ("gamma", "beta", "w1", "w2", "pair_cap"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"collectivity parameter {name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class FeatureFrame:
    agent_id: int
    frame: int
    kinematics: KinematicState
    neighborhood: NeighborhoodStats
    collectivity: float
    gt_social_level: float

    @property
    def gt_social(self) -> bool:
        return self.gt_social_level >= SOCIAL_THRESHOLD


@dataclass(frozen=True)
class FeatureSummary:
    agent_id: int
    mean_speed: float
    mean_angular_variation: float
    std_angular_variation: float
    mean_collectivity: float
    mean_socialization: float
    mean_isolation: float
    frame_count: int


def angle_difference(a, b):
    """Smallest absolute angle between headings ``a`` and ``b``, degrees in [0, 180]."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 360.0
    return np.minimum(d, 360.0 - d)


def kinematics_arrays(track: Track) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Speed, heading and angular variation for frames ``track.frames[1:]``.

    A zero displacement keeps the previous heading. Leading stationary frames
    borrow the first defined heading; an agent that never moves has heading 0.
    """
    if len(track) < MIN_OBSERVATIONS:
        raise InsufficientDataError(
            f"need at least {MIN_OBSERVATIONS} observations, got {len(track)}"
        )
    disp = np.diff(track.positions, axis=0)
    gaps = np.diff(track.frames).astype(float)
    dist = np.hypot(disp[:, 0], disp[:, 1])
    speed = dist / gaps

    raw = np.degrees(np.arctan2(disp[:, 1], disp[:, 0])) % 360.0
    raw[raw >= 360.0] = 0.0  # tiny negative angles wrap to exactly 360.0
    moving = dist > STATIONARY_EPS
    if moving.any():
        idx = np.where(moving, np.arange(len(moving)), -1)
        idx = np.maximum.accumulate(idx)
        idx[idx < 0] = np.flatnonzero(moving)[0]
        heading = raw[idx]
    else:
        heading = np.zeros_like(speed)

    ang_var = np.zeros_like(speed)
    ang_var[1:] = angle_difference(heading[1:], heading[:-1])
    return speed, heading, ang_var


def compute_kinematics(track: Track) -> list[KinematicState]:
    speed, heading, ang_var = kinematics_arrays(track)
    return [
        KinematicState(float(s), float(h), float(a))
        for s, h, a in zip(speed, heading, ang_var)
    ]


def pair_affinity(a: KinematicState, b: KinematicState, params: CollectivityParams) -> float:
    """Speed/orientation dissimilarity of two agents, clamped to ``params.pair_cap``."""
    dtheta = math.radians(float(angle_difference(a.heading, b.heading)))
    raw = abs(a.speed - b.speed) * params.w1 + dtheta * params.w2
    return min(params.pair_cap, raw)


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def frame_neighborhoods(
    positions: np.ndarray, radius: float = SOCIAL_RADIUS
) -> tuple[np.ndarray, np.ndarray, int]:
    """Social-space counts and mean distances for every agent of one frame."""
    k = len(positions)
    dist = pairwise_distances(positions)
    others = ~np.eye(k, dtype=bool)
    n_social = ((dist <= radius) & others).sum(axis=1)
    if k > 1:
        mean_dist = np.where(others, dist, 0.0).sum(axis=1) / (k - 1)
    else:
        mean_dist = np.zeros(k)
    return n_social, mean_dist, k


def frame_collectivity(
    positions: np.ndarray,
    speeds: np.ndarray,
    headings: np.ndarray,
    params: CollectivityParams,
    radius: float = SOCIAL_RADIUS,
    valid: np.ndarray | None = None,
) -> np.ndarray:
    """Mean decay affinity to social-space neighbors, for every agent of one frame.

    ``valid`` marks agents with defined kinematics; the others neither receive a
    value (NaN) nor count as neighbors. Agents without valid neighbors get 0.
    """
    k = len(positions)
    if valid is None:
        valid = np.ones(k, dtype=bool)
    dist = pairwise_distances(positions)
    mask = (dist <= radius) & ~np.eye(k, dtype=bool) & valid[None, :]

    dtheta = np.radians(angle_difference(headings[:, None], headings[None, :]))
    w = np.abs(speeds[:, None] - speeds[None, :]) * params.w1 + dtheta * params.w2
    w = np.minimum(w, params.pair_cap)
    decay = params.gamma * np.exp(-params.beta * w * w)

    counts = mask.sum(axis=1)
    sums = np.where(mask, decay, 0.0).sum(axis=1)
    out = np.divide(sums, counts, out=np.zeros(k), where=counts > 0)
    out[~valid] = np.nan
    return out


def gt_socialization(stats: NeighborhoodStats) -> tuple[float, bool]:
    """Ground-truth socialization level and its social / not-social label."""
    if stats.frame_population < 1:
        raise ConfigError("frame_population must be >= 1")
    level = 0.0 if stats.n_social == 0 else stats.n_social / stats.frame_population
    return level, level >= SOCIAL_THRESHOLD


def clip_kinematics(clip: VideoClip) -> dict[int, dict[int, KinematicState]]:
    out = {}
    for aid in clip.agent_ids:
        track = clip.trajectories[aid]
        states = compute_kinematics(track)
        out[aid] = dict(zip(track.frames[1:].tolist(), states))
    return out


def _frame_agents(clip: VideoClip, frame: int) -> tuple[list[int], np.ndarray]:
    ids, pos = [], []
    for aid in clip.agent_ids:
        track = clip.trajectories[aid]
        i = np.searchsorted(track.frames, frame)
        if i < len(track) and track.frames[i] == frame:
            ids.append(aid)
            pos.append(track.positions[i])
    return ids, np.array(pos, dtype=float).reshape(-1, 2)


def neighborhood(
    clip: VideoClip, frame: int, agent: int, radius: float = SOCIAL_RADIUS
) -> NeighborhoodStats:
    ids, pos = _frame_agents(clip, frame)
    if agent not in ids:
        raise AgentLookupError(f"agent {agent} not present in frame {frame}")
    n_social, mean_dist, k = frame_neighborhoods(pos, radius)
    i = ids.index(agent)
    return NeighborhoodStats(int(n_social[i]), float(mean_dist[i]), k)


def collectivity(
    clip: VideoClip,
    frame: int,
    agent: int,
    params: CollectivityParams = CollectivityParams(),
    radius: float = SOCIAL_RADIUS,
    kinematics: dict[int, dict[int, KinematicState]] | None = None,
) -> float:
    if kinematics is None:
        kinematics = clip_kinematics(clip)
    ids, pos = _frame_agents(clip, frame)
    if agent not in ids:
        raise AgentLookupError(f"agent {agent} not present in frame {frame}")
    states = [kinematics.get(aid, {}).get(frame) for aid in ids]
    if states[ids.index(agent)] is None:
        raise AgentLookupError(f"agent {agent} has no kinematics at frame {frame}")
    valid = np.array([s is not None for s in states])
    speeds = np.array([s.speed if s else 0.0 for s in states])
    headings = np.array([s.heading if s else 0.0 for s in states])
    values = frame_collectivity(pos, speeds, headings, params, radius, valid)
    return float(values[ids.index(agent)])


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Column-wise per-agent, per-frame features of one clip, sorted by (agent_id, frame)."""

    video_id: str
    agent_id: np.ndarray
    frame: np.ndarray
    speed: np.ndarray
    heading: np.ndarray
    ang_var: np.ndarray
    n_social: np.ndarray
    mean_dist: np.ndarray
    population: np.ndarray
    collectivity: np.ndarray
    gt_level: np.ndarray

    def __len__(self) -> int:
        return len(self.agent_id)

    @property
    def gt_label(self) -> np.ndarray:
        return self.gt_level >= SOCIAL_THRESHOLD

    def net_inputs(self) -> np.ndarray:
        """(collectivity, mean distance, social-space count) rows for the classifier."""
        return np.column_stack([self.collectivity, self.mean_dist, self.n_social.astype(float)])

    def agents(self) -> list[int]:
        return np.unique(self.agent_id).tolist()

    def rows(self, agent: int | None = None) -> np.ndarray:
        if agent is None:
            return np.arange(len(self))
        return np.flatnonzero(self.agent_id == agent)

    def frames(self, agent: int | None = None) -> Iterator[FeatureFrame]:
        for r in self.rows(agent):
            yield FeatureFrame(
                agent_id=int(self.agent_id[r]),
                frame=int(self.frame[r]),
                kinematics=KinematicState(
                    float(self.speed[r]), float(self.heading[r]), float(self.ang_var[r])
                ),
                neighborhood=NeighborhoodStats(
                    int(self.n_social[r]), float(self.mean_dist[r]), int(self.population[r])
                ),
                collectivity=float(self.collectivity[r]),
                gt_social_level=float(self.gt_level[r]),
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FEATURE_CSV_HEADER)
        for r in range(len(self)):
            w.writerow([
                self.video_id, int(self.agent_id[r]), int(self.frame[r]),
                f"{self.speed[r]:.6f}", f"{self.heading[r]:.6f}", f"{self.ang_var[r]:.6f}",
                int(self.n_social[r]), f"{self.mean_dist[r]:.6f}",
                f"{self.collectivity[r]:.6f}", f"{self.gt_level[r]:.6f}",
            ])
        return buf.getvalue()


def extract_features(
    clip: VideoClip,
    params: CollectivityParams = CollectivityParams(),
    radius: float = SOCIAL_RADIUS,
) -> FeatureTable:
    """Compute every agent's features at every frame where its kinematics exist.

    Neighborhood statistics count every agent visible in the frame; collectivity
    only pairs agents whose kinematics are defined at that frame.
    """
    cols = {k: [] for k in ("agent", "frame", "x", "y", "valid", "speed", "heading", "ang_var")}
    for aid in clip.agent_ids:
        track = clip.trajectories[aid]
        speed, heading, ang_var = kinematics_arrays(track)
        n = len(track)
        cols["agent"].append(np.full(n, aid, dtype=np.int64))
        cols["frame"].append(track.frames)
        cols["x"].append(track.positions[:, 0])
        cols["y"].append(track.positions[:, 1])
        cols["valid"].append(np.r_[False, np.ones(n - 1, dtype=bool)])
        cols["speed"].append(np.r_[0.0, speed])
        cols["heading"].append(np.r_[0.0, heading])
        cols["ang_var"].append(np.r_[0.0, ang_var])
    if not cols["agent"]:
        raise InsufficientDataError(f"clip {clip.video_id!r} has no trajectories")
    c = {k: np.concatenate(v) for k, v in cols.items()}

    order = np.lexsort((c["agent"], c["frame"]))
    c = {k: v[order] for k, v in c.items()}
    total = len(order)
    n_social = np.zeros(total, dtype=np.int64)
    mean_dist = np.zeros(total)
    population = np.zeros(total, dtype=np.int64)
    coll = np.full(total, np.nan)

    _, starts = np.unique(c["frame"], return_index=True)
    bounds = np.r_[starts, total]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        pos = np.column_stack([c["x"][lo:hi], c["y"][lo:hi]])
        ns, md, k = frame_neighborhoods(pos, radius)
        n_social[lo:hi] = ns
        mean_dist[lo:hi] = md
        population[lo:hi] = k
        coll[lo:hi] = frame_collectivity(
            pos, c["speed"][lo:hi], c["heading"][lo:hi], params, radius, c["valid"][lo:hi]
        )

    gt = np.where(n_social == 0, 0.0, n_social / population)
    keep = c["valid"]
    back = np.lexsort((c["frame"][keep], c["agent"][keep]))

    def col(a):
        return a[keep][back]

    return FeatureTable(
        video_id=clip.video_id,
        agent_id=col(c["agent"]),
        frame=col(c["frame"]),
        speed=col(c["speed"]),
        heading=col(c["heading"]),
        ang_var=col(c["ang_var"]),
        n_social=col(n_social),
        mean_dist=col(mean_dist),
        population=col(population),
        collectivity=col(coll),
        gt_level=col(gt),
    )


def _summary(agent_id, speed, ang_var, coll, social) -> FeatureSummary:
    if len(speed) == 0:
        raise InsufficientDataError(f"agent {agent_id} has no feature frames")
    if len(social) != len(speed):
        raise InsufficientDataError("socialization sequence length differs from frames")
    mean_social = float(np.mean(social))
    return FeatureSummary(
        agent_id=agent_id,
        mean_speed=float(np.mean(speed)),
        mean_angular_variation=float(np.mean(ang_var)),
        std_angular_variation=float(np.std(ang_var)),
        mean_collectivity=float(np.mean(coll)),
        mean_socialization=mean_social,
        mean_isolation=1.0 - mean_social,
        frame_count=len(speed),
    )


def summarize(frames: Sequence[FeatureFrame], socialization: Sequence[float]) -> FeatureSummary:
    """Average one agent's frames; std of angular variation is the population std."""
    if not frames:
        raise InsufficientDataError("no feature frames to summarize")
    return _summary(
        frames[0].agent_id,
        np.array([f.kinematics.speed for f in frames]),
        np.array([f.kinematics.angular_variation for f in frames]),
        np.array([f.collectivity for f in frames]),
        np.asarray(socialization, dtype=float),
    )


def summarize_table(table: FeatureTable, socialization: np.ndarray) -> list[FeatureSummary]:
    """One summary per agent, in ascending agent_id order."""
    socialization = np.asarray(socialization, dtype=float)
    if len(socialization) != len(table):
        raise InsufficientDataError("socialization length differs from feature rows")
    out = []
    for aid in table.agents():
        r = table.rows(aid)
        out.append(_summary(aid, table.speed[r], table.ang_var[r], table.collectivity[r], socialization[r]))
    return out
