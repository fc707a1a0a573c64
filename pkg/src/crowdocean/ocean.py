"""Map per-agent feature summaries to Big-Five (OCEAN) scores.

Twenty-five crowd-related NEO PI-R items are "answered" from an agent's
feature summary, quantized to the 0..4 answer scale relative to the highest
answer in the same video, reverse-keyed where agreement indicates the low
pole, and summed into the five dimensions.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .features import FeatureSummary

N_ITEMS = 25
MAX_LEVEL = 4
N_LEVELS = 5
DIMENSIONS = ("O", "C", "E", "A", "N")


@dataclass(frozen=True)
class GuardParams:
    """Lower bounds applied to the denominators of reciprocal items."""

    eps_alpha: float = 0.1  # degrees
    eps_phi: float = 0.01

    def __post_init__(self):
        if not (self.eps_alpha > 0 and self.eps_phi > 0):
            raise ConfigError("guard epsilons must be > 0")


@dataclass(frozen=True)
class DimensionWeights:
    """Share of the 25 items belonging to each dimension."""

    O: float = 0.04
    C: float = 0.04
    E: float = 0.72
    A: float = 0.08
    N: float = 0.12

    def __post_init__(self):
        values = [getattr(self, d) for d in DIMENSIONS]
        if any(v <= 0 for v in values) or not math.isclose(sum(values), 1.0, abs_tol=1e-9):
            raise ConfigError(f"dimension weights must be positive and sum to 1, got {values}")


# Item keying per dimension: (item number, reverse-keyed?). Item 3 appears
# un-reversed, as printed in the published extraversion equation.
PUBLISHED_KEYS: dict[str, tuple[tuple[int, bool], ...]] = {
    "O": ((2, True),),
    "C": ((1, False),),
    "E": (
        (3, False), (12, False), (14, False),
        *((k, False) for k in range(16, 24)),
        *((k, True) for k in range(4, 9)),
        (11, True), (15, True),
    ),
    "A": ((9, False), (10, False)),
    "N": ((13, False), (24, True), (25, True)),
}


def item_keys(strict_paper: bool = True) -> dict[str, tuple[tuple[int, bool], ...]]:
    """Item keying; ``strict_paper=False`` reverse-keys item 3 ("shy away from crowds")."""
    if strict_paper:
        return PUBLISHED_KEYS
    keys = dict(PUBLISHED_KEYS)
    keys["E"] = tuple((k, True) if k == 3 else (k, rev) for k, rev in PUBLISHED_KEYS["E"])
    return keys


def partition_counts(strict_paper: bool = True) -> dict[str, int]:
    return {d: len(items) for d, items in item_keys(strict_paper).items()}


def answer_items(summary: FeatureSummary, guards: GuardParams = GuardParams()) -> np.ndarray:
    """Raw answers Q1..Q25 (array index k-1) from one agent's feature summary."""
    s = summary.mean_speed
    alpha = summary.mean_angular_variation
    alpha_std = summary.std_angular_variation
    coll = summary.mean_collectivity
    social = summary.mean_socialization
    iso = summary.mean_isolation
    inv_alpha = 1.0 / max(alpha, guards.eps_alpha)

    q = np.empty(N_ITEMS)
    q[0] = s + inv_alpha
    q[1] = alpha
    q[2:8] = iso
    q[8:10] = coll
    q[10] = iso + alpha_std
    q[11] = s + alpha
    q[12] = iso + 1.0 / max(coll, guards.eps_phi)
    q[13] = coll + social + inv_alpha
    q[14] = 1.0 / max(q[13], guards.eps_phi)
    q[15:21] = social
    q[21:25] = social + coll
    return q


def quantize_items(raw: np.ndarray) -> np.ndarray:
    """Quantize a video's (agents, 25) raw answers into levels 0..4.

    Each item is scaled by its maximum over the video's agents and cut into five
    equal bins; the maximum itself lands in the top level.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        raw = raw[None, :]
    if raw.shape[0] < 1 or raw.shape[1] != N_ITEMS:
        raise InsufficientDataError(f"expected (agents >= 1, {N_ITEMS}) answers, got {raw.shape}")
    top = raw.max(axis=0)
    levels = np.zeros(raw.shape, dtype=np.int64)
    pos = top > 0
    levels[:, pos] = np.floor(N_LEVELS * raw[:, pos] / top[pos]).astype(np.int64)
    return np.clip(levels, 0, MAX_LEVEL)


def reverse_items(levels: np.ndarray) -> np.ndarray:
    return MAX_LEVEL - np.asarray(levels)


@dataclass(frozen=True)
class OceanScore:
    O: float
    C: float
    E: float
    A: float
    N: float
    level: str = "individual"
    id: str = ""
    country: str = ""

    def values(self) -> np.ndarray:
        return np.array([self.O, self.C, self.E, self.A, self.N])

    def as_dict(self) -> dict:
        return asdict(self)


def raw_dimensions(
    levels: np.ndarray,
    weights: DimensionWeights = DimensionWeights(),
    strict_paper: bool = True,
) -> dict[str, float]:
    """Dimension scores on the 0..100 scale for one agent's quantized answers."""
    levels = np.asarray(levels)
    rev = reverse_items(levels)
    out = {}
    for dim, items in item_keys(strict_paper).items():
        total = sum(int(rev[k - 1]) if reverse else int(levels[k - 1]) for k, reverse in items)
        out[dim] = total / getattr(weights, dim)
    return out


def score_dimensions(
    levels: np.ndarray,
    weights: DimensionWeights = DimensionWeights(),
    strict_paper: bool = True,
    id: str = "",
    country: str = "",
) -> OceanScore:
    raw = raw_dimensions(levels, weights, strict_paper)
    return OceanScore(**{d: raw[d] / 100.0 for d in DIMENSIONS}, level="individual", id=id, country=country)


def _mean_score(scores: Sequence[OceanScore], level: str, id: str, country: str) -> OceanScore:
    if not scores:
        raise InsufficientDataError(f"no scores to aggregate at {level} level")
    m = np.mean([s.values() for s in scores], axis=0)
    return OceanScore(*map(float, m), level=level, id=id, country=country)


def aggregate_video(scores: Sequence[OceanScore], video_id: str = "", country: str = "") -> OceanScore:
    return _mean_score(list(scores), "video", video_id, country)


def aggregate_country(video_scores: Iterable[OceanScore]) -> dict[str, OceanScore]:
    """Unweighted mean over each country's videos, keyed by country code."""
    groups: dict[str, list[OceanScore]] = {}
    for s in video_scores:
        groups.setdefault(s.country, []).append(s)
    out = {}
    for country in sorted(groups):
        # sort so the result does not depend on input order
        videos = sorted(groups[country], key=lambda s: s.id)
        out[country] = _mean_score(videos, "country", country, country)
    return out


def score_video(
    summaries: Sequence[FeatureSummary],
    video_id: str,
    country: str,
    guards: GuardParams = GuardParams(),
    weights: DimensionWeights = DimensionWeights(),
    strict_paper: bool = True,
) -> tuple[list[OceanScore], OceanScore]:
    """Individual scores for every summarized agent of one video, plus the video mean."""
    if not summaries:
        raise InsufficientDataError(f"video {video_id!r} has no agents to score")
    raw = np.vstack([answer_items(s, guards) for s in summaries])
    levels = quantize_items(raw)
    people = [
        score_dimensions(lv, weights, strict_paper, id=f"{video_id}:{s.agent_id}", country=country)
        for s, lv in zip(summaries, levels)
    ]
    return people, aggregate_video(people, video_id, country)


SCORE_CSV_HEADER = ("level", "id", "country", *DIMENSIONS)


def scores_to_csv(scores: Iterable[OceanScore]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_CSV_HEADER)
    for s in scores:
        w.writerow([s.level, s.id, s.country, *(f"{getattr(s, d):.4f}" for d in DIMENSIONS)])
    return buf.getvalue()


def scores_to_json(scores: Iterable[OceanScore]) -> str:
    rows = [
        {"level": s.level, "id": s.id, "country": s.country,
         **{d: round(getattr(s, d), 4) for d in DIMENSIONS}}
        for s in scores
    ]
    return json.dumps(rows, indent=2) + "\n"


def scores_from_rows(rows: Iterable[Mapping]) -> list[OceanScore]:
    return [
        OceanScore(
            **{d: float(r[d]) for d in DIMENSIONS},
            level=str(r["level"]), id=str(r["id"]), country=str(r["country"]),
        )
        for r in rows
    ]
