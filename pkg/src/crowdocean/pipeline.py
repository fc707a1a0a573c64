"""End-to-end wiring: clips -> features -> socialization -> OCEAN -> report."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, CrowdOceanError, ValidationError
from .features import SOCIAL_RADIUS, CollectivityParams, FeatureTable, extract_features, summarize_table
from .ingest import DEFAULT_GAP_THRESHOLD, DropReport, load_clip
from .ocean import (
    DimensionWeights,
    GuardParams,
    OceanScore,
    aggregate_country,
    score_video,
    scores_from_rows,
    scores_to_csv,
    scores_to_json,
)
from .report import compute_errors, emit_report, load_baselines
from .socialnet import MlpWeights, TrainConfig, load_model, predict_socialization_batch, scg_train
from .synth import TRAINING_SAMPLES, TRAINING_WINDOW, training_set

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    social_radius: float = SOCIAL_RADIUS
    gamma: float = 1.0
    beta: float = 0.3
    w1: float = 1.0
    w2: float = 1.0
    pair_cap: float = 4.34
    eps_alpha: float = 0.1
    eps_phi: float = 0.01
    strict_paper: bool = True
    gap_threshold: int = DEFAULT_GAP_THRESHOLD
    seed: int = 0
    jobs: int = 1
    # training
    training_samples: int = TRAINING_SAMPLES
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    sigma0: float = 1e-4
    lambda0: float = 1e-6
    split_fraction: float = 0.7
    # paths
    model: str | None = None
    baselines: str | None = None
    out: str | None = None
    clips: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.social_radius > 0:
            raise ConfigError("social_radius must be > 0")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        # constructing these validates their invariants
        self.collectivity_params()
        self.guards()
        self.train_config()

    def collectivity_params(self) -> CollectivityParams:
        return CollectivityParams(self.gamma, self.beta, self.w1, self.w2, self.pair_cap)

    def guards(self) -> GuardParams:
        return GuardParams(self.eps_alpha, self.eps_phi)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            max_iterations=self.max_iterations,
            gradient_tolerance=self.gradient_tolerance,
            sigma0=self.sigma0,
            lambda0=self.lambda0,
            split_fraction=self.split_fraction,
            seed=self.seed,
        )

    @classmethod
    def from_sources(cls, path: str | Path | None = None, **overrides: Any) -> "PipelineConfig":
        """Defaults, then the JSON config file, then non-None ``overrides``."""
        values: dict[str, Any] = {}
        known = {f.name for f in fields(cls)}
        if path is not None:
            try:
                doc = json.loads(Path(path).read_text())
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {path}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
            if not isinstance(doc, dict):
                raise ConfigError(f"config file {path} must hold a JSON object")
            unknown = sorted(set(doc) - known)
            if unknown:
                raise ConfigError(f"unknown config key(s) in {path}: {', '.join(unknown)}")
            values.update(doc)
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ClipResult:
    video_id: str
    country: str
    path: str
    people: list[OceanScore]
    video: OceanScore
    drops: DropReport
    features: FeatureTable


def _with_context(exc: CrowdOceanError, context: str) -> CrowdOceanError:
    exc.args = (f"{context}: {exc}",)
    return exc


def read_model(path: str | Path | None) -> MlpWeights:
    if path is None:
        raise ConfigError("no model path given (--model)")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"model file not found: {p}")
    try:
        return load_model(p.read_bytes())
    except CrowdOceanError as exc:
        raise _with_context(exc, str(p)) from None


def analyze_clip(path: str | Path, weights: MlpWeights, config: PipelineConfig) -> ClipResult:
    try:
        clip, drops = load_clip(path, config.gap_threshold)
        for d in drops.dropped:
            log.info("%s: dropped agent %s (%s)", path, d["agent_id"], d["reason"])
        table = extract_features(clip, config.collectivity_params(), config.social_radius)
        social = predict_socialization_batch(weights, table.net_inputs())
        summaries = summarize_table(table, social)
        people, video = score_video(
            summaries, clip.video_id, clip.country, config.guards(),
            DimensionWeights(), config.strict_paper,
        )
    except CrowdOceanError as exc:
        raise _with_context(exc, str(path)) from None
    return ClipResult(clip.video_id, clip.country, str(path), people, video, drops, table)


def analyze(paths: Sequence[str | Path], weights: MlpWeights, config: PipelineConfig) -> list[ClipResult]:
    """Analyze clips (up to ``config.jobs`` at once); results sorted by video id."""
    if not paths:
        raise ConfigError("no clip files given")
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        results = list(pool.map(lambda p: analyze_clip(p, weights, config), paths))
    results.sort(key=lambda r: (r.video_id, r.path))
    seen: dict[str, str] = {}
    for r in results:
        if r.video_id in seen:
            raise ValidationError(f"video id {r.video_id!r} used by both {seen[r.video_id]} and {r.path}")
        seen[r.video_id] = r.path
    return results


def all_scores(results: Sequence[ClipResult]) -> list[OceanScore]:
    """Individual, then video, then country rows, each in sorted order."""
    people = [s for r in results for s in r.people]
    videos = [r.video for r in results]
    countries = list(aggregate_country(videos).values())
    return people + videos + countries


def write_scores(scores: Sequence[OceanScore], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "scores.json").write_text(scores_to_json(scores))
    (out / "scores.csv").write_text(scores_to_csv(scores))


def read_scores(path: str | Path) -> list[OceanScore]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"scores file not found: {p}")
    try:
        rows = json.loads(p.read_text())
        return scores_from_rows(rows)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{p}: malformed scores file ({exc})") from None


def country_scores(scores: Sequence[OceanScore]) -> dict[str, OceanScore]:
    countries = {s.country: s for s in scores if s.level == "country"}
    if countries:
        return dict(sorted(countries.items()))
    return aggregate_country(s for s in scores if s.level == "video")


def compare(scores: Sequence[OceanScore], baselines_path: str | Path | None, out: Path) -> dict:
    if baselines_path is None:
        raise ConfigError("no baseline file given (--baselines)")
    bp = Path(baselines_path)
    if not bp.is_file():
        raise ConfigError(f"baseline file not found: {bp}")
    try:
        baselines = load_baselines(bp.read_text())
    except CrowdOceanError as exc:
        raise _with_context(exc, str(bp)) from None
    countries = country_scores(scores)
    if not countries:
        raise ValidationError("no video or country scores to compare")
    errors = compute_errors(countries, baselines)
    report, series = emit_report(errors, countries, baselines)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(report)
    (out / "series.csv").write_bytes(series)
    return json.loads(report)


def write_drops(results: Sequence[ClipResult], out: Path) -> None:
    # json object keys are strings, so segment ids are written as text
    doc = {
        r.video_id: {"dropped": r.drops.dropped, "segments": {str(k): v for k, v in r.drops.segments.items()}}
        for r in results
    }
    (out / "drops.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def run_pipeline(config: PipelineConfig) -> tuple[list[ClipResult], dict]:
    """Analyze every clip and compare country scores with the baselines.

    Writes scores.json, scores.csv, drops.json, report.json and series.csv
    into ``config.out``; returns the per-clip results and the report document.
    """
    if config.out is None:
        raise ConfigError("no output directory given (--out)")
    weights = read_model(config.model)
    results = analyze(config.clips, weights, config)
    scores = all_scores(results)
    out = Path(config.out)
    write_scores(scores, out)
    write_drops(results, out)
    # compare what was written, so this equals running analyze then compare
    return results, compare(read_scores(out / "scores.json"), config.baselines, out)


def clip_training_set(paths: Sequence[str | Path], config: PipelineConfig) -> tuple[np.ndarray, np.ndarray]:
    """Labelled samples from the leading frames of each real clip."""
    xs, ys = [], []
    for p in paths:
        try:
            clip, _ = load_clip(p, config.gap_threshold)
            table = extract_features(clip, config.collectivity_params(), config.social_radius)
        except CrowdOceanError as exc:
            raise _with_context(exc, str(p)) from None
        first = table.frame.min()
        keep = table.frame < first + TRAINING_WINDOW
        xs.append(table.net_inputs()[keep])
        ys.append(table.gt_label[keep])
    return np.vstack(xs), np.concatenate(ys)


def train_model(config: PipelineConfig, clip_paths: Sequence[str | Path] = ()):
    if clip_paths:
        X, y = clip_training_set(clip_paths, config)
    else:
        X, y = training_set(
            config.seed, config.training_samples, config.collectivity_params(), config.social_radius
        )
    log.info("training on %d samples (%.1f%% social)", len(y), 100.0 * y.mean())
    return scg_train(X, y, config.train_config())
