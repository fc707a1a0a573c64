"""Command-line entry point.

Exit codes: 0 success, 1 usage/config, 2 data validation, 3 training/runtime.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, CrowdOceanError
from .ingest import write_clip
from .pipeline import (
    PipelineConfig,
    analyze,
    all_scores,
    compare,
    read_model,
    read_scores,
    run_pipeline,
    train_model,
    write_drops,
    write_scores,
)
from .socialnet import save_model
from .synth import KINDS, ScenarioSpec, generate, training_set, training_set_csv

log = logging.getLogger("crowdocean")


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; keys mirror PipelineConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowdocean", description="Big-Five personality scores from pedestrian trajectories.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic clip or the classifier training set")
    _common(p)
    p.add_argument("--kind", choices=KINDS, default="coherent_group")
    p.add_argument("--agents", type=int, default=8)
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--speed", type=float, default=0.05, help="meters/frame")
    p.add_argument("--spacing", type=float, default=2.0, help="meters")
    p.add_argument("--jitter", type=float, default=0.0, help="heading jitter std, degrees")
    p.add_argument("--video-id", default="synthetic")
    p.add_argument("--country", default="ZZ")
    p.add_argument("--fps", type=float, default=25.0)
    p.add_argument("--training-set", action="store_true",
                   help="write the labelled classifier training set instead of a clip")

    p = sub.add_parser("train", help="train the socialization classifier")
    _common(p)
    p.add_argument("--model", help="where to write the model JSON")
    p.add_argument("clips", nargs="*", help="train on the leading frames of these clips instead of synthetic data")

    for name, help_ in (("analyze", "score clips"), ("pipeline", "score clips and compare with baselines")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--model")
        p.add_argument("--jobs", type=int)
        p.add_argument("--strict-paper", type=_bool, metavar="BOOL")
        p.add_argument("--dump-features", action="store_true", help="also write per-frame feature CSVs")
        if name == "pipeline":
            p.add_argument("--baselines")
        p.add_argument("clips", nargs="*", help="trajectory CSV files (sidecar: <name>.meta.json)")

    p = sub.add_parser("compare", help="compare a scores.json with literature baselines")
    _common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--baselines")
    return parser


def _config(args) -> PipelineConfig:
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "model": getattr(args, "model", None),
        "baselines": getattr(args, "baselines", None),
        "jobs": getattr(args, "jobs", None),
        "strict_paper": getattr(args, "strict_paper", None),
        "clips": getattr(args, "clips", None) or None,
    }
    return PipelineConfig.from_sources(args.config, **overrides)


def _require_out(config: PipelineConfig) -> Path:
    if config.out is None:
        raise ConfigError("no output directory given (--out)")
    return Path(config.out)


def _dump_features(results, out: Path) -> None:
    fdir = out / "features"
    fdir.mkdir(parents=True, exist_ok=True)
    for r in results:
        (fdir / f"{r.video_id}.csv").write_text(r.features.to_csv())


def cmd_synth(args, config: PipelineConfig) -> None:
    out = _require_out(config)
    out.mkdir(parents=True, exist_ok=True)
    if args.training_set:
        X, y = training_set(config.seed, config.training_samples,
                            config.collectivity_params(), config.social_radius)
        path = out / f"training_set_seed{config.seed}.csv"
        path.write_text(training_set_csv(X, y))
    else:
        spec = ScenarioSpec(
            kind=args.kind, agent_count=args.agents, frames=args.frames,
            base_speed=args.speed, spacing=args.spacing, heading_jitter=args.jitter,
            seed=config.seed, video_id=args.video_id, country=args.country, fps=args.fps,
        )
        path = write_clip(generate(spec), out / f"{args.video_id}.csv")
    print(path)


def cmd_train(args, config: PipelineConfig) -> None:
    if config.model is None:
        raise ConfigError("no model path given (--model)")
    weights, report = train_model(config, config.clips)
    path = Path(config.model)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_model(weights))
    print(json.dumps({"model": str(path), "validation": report.to_dict(),
                      "training_meta": weights.training_meta}, indent=2))


def cmd_analyze(args, config: PipelineConfig) -> None:
    out = _require_out(config)
    results = analyze(config.clips, read_model(config.model), config)
    write_scores(all_scores(results), out)
    write_drops(results, out)
    if args.dump_features:
        _dump_features(results, out)
    print(out / "scores.json")


def cmd_compare(args, config: PipelineConfig) -> None:
    out = _require_out(config)
    doc = compare(read_scores(args.scores), config.baselines, out)
    print(json.dumps({"overall_mean_error_pct": doc["overall_mean_error_pct"]}))


def cmd_pipeline(args, config: PipelineConfig) -> None:
    results, doc = run_pipeline(config)
    if args.dump_features:
        _dump_features(results, Path(config.out))
    print(json.dumps({"overall_mean_error_pct": doc["overall_mean_error_pct"]}))


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _config(args)
        COMMANDS[args.command](args, config)
    except CrowdOceanError as exc:
        print(f"crowdocean: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"crowdocean: error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
