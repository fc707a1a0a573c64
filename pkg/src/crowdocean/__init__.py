"""Big-Five (OCEAN) personality scores from pedestrian trajectories."""

from .errors import CrowdOceanError
from .features import CollectivityParams, FeatureSummary, extract_features, summarize_table
from .ingest import VideoClip, load_clip, parse_clip, scale_to_meters, validate_clip
from .ocean import DimensionWeights, GuardParams, OceanScore, score_video
from .socialnet import MlpWeights, TrainConfig, load_model, save_model, scg_train
from .synth import ScenarioSpec, generate

__all__ = [
    "CollectivityParams",
    "CrowdOceanError",
    "DimensionWeights",
    "FeatureSummary",
    "GuardParams",
    "MlpWeights",
    "OceanScore",
    "ScenarioSpec",
    "TrainConfig",
    "VideoClip",
    "extract_features",
    "generate",
    "load_clip",
    "load_model",
    "parse_clip",
    "save_model",
    "scale_to_meters",
    "scg_train",
    "score_video",
    "summarize_table",
    "validate_clip",
]
__version__ = "0.1.0"
