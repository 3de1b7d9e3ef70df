"""``coughscreen`` command line.

Exit codes: 0 success, 1 at least one experiment cell failed, 2 invalid
configuration or unusable input.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..audio_io import AudioClip, canonicalize, read_wav, write_wav
from ..errors import ConfigError, CoughScreenError
from ..evaluation.report import markdown_summary, report_json
from ..evaluation.scenarios import run_scenario, scenario
from ..features.extract import FeatureKind, frame_features, write_feature_cache
from ..models import save_model
from ..models.common import as_matrix, encode_labels
from ..models.grid import grid_search, mlp_search_space, svm_search_space
from . import pipeline
from .config import ExperimentConfig, config_from_dict, load_config
from .synth import write_synth_recordings

log = logging.getLogger("coughscreen")

EXIT_OK, EXIT_CELL_FAILED, EXIT_CONFIG = 0, 1, 2
GLOBAL_DEFAULTS = {"config": None, "seed": None, "out": None, "jobs": None, "verbose": False}


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand; SUPPRESS keeps
    # the subparser from clobbering a value given before it.
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="experiment config (YAML)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="coughscreen", parents=[common],
                                description="Cough-sound screening: features, classifiers, scenario sweeps.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common], help="decode, resample and segment manifest recordings") \
        .add_argument("--export-segments", action="store_true", help="also write each segment as WAV")
    sub.add_parser("extract", parents=[common], help="compute and cache feature vectors")

    t = sub.add_parser("train", parents=[common], help="train one model on a scenario's training side")
    t.add_argument("--scenario", type=int, default=5)
    t.add_argument("--kind", default="mfcc")
    t.add_argument("--family", default="mlp")

    g = sub.add_parser("grid", parents=[common], help="hyper-parameter search")
    g.add_argument("--family")
    g.add_argument("--kind")

    sub.add_parser("run", parents=[common], help="full scenario x feature x model sweep")

    s = sub.add_parser("synth", parents=[common], help="write synthetic recordings and a manifest")
    s.add_argument("--per-class", type=int)

    r = sub.add_parser("report", parents=[common], help="re-render summary, or export CSV for plotting")
    r.add_argument("--csv", type=Path, help="write waveform (or per-frame features with --kind) as CSV")
    r.add_argument("--wav", type=Path, help="recording to export with --csv")
    r.add_argument("--kind", help="feature kind for per-frame export")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return pipeline.with_overrides(cfg, args.seed, args.out, args.jobs)


def cmd_ingest(cfg, args) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = pipeline.ingest(cfg)
    seg_dir = out / "segments"
    seg_dir.mkdir(exist_ok=True)
    with open(seg_dir / "segments.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment_id", "parent_id", "dataset", "label", "start_s", "end_s", "degenerate"])
        for i, s in enumerate(result.segments):
            w.writerow([s.segment_id, s.parent_id, s.dataset, s.label or "",
                        format(s.start_s, ".17g"), format(s.end_s, ".17g"), int(s.degenerate)])
            if args.export_segments:
                write_wav(seg_dir / f"seg{i:06d}.wav", AudioClip(s.samples, s.sample_rate), "FLOAT")
    pipeline.write_json(out / "ingest.json", result.to_dict())
    print(f"{len(result.segments)} segments from {result.n_files} recordings -> {seg_dir}")
    return EXIT_OK


def cmd_extract(cfg, args) -> int:
    out = Path(cfg.output_dir)
    cache_dir = Path(cfg.data.feature_cache or out / "features")
    cache_dir.mkdir(parents=True, exist_ok=True)
    result = pipeline.ingest(cfg)
    for kind, vectors in pipeline.extract(cfg, result.segments).items():
        path = pipeline.cache_path(cache_dir, kind)
        write_feature_cache(path, vectors)
        print(f"{kind}: {len(vectors)} vectors -> {path}")
    return EXIT_OK


def _vectors(cfg, kind):
    kinds = (FeatureKind.parse(kind).value,)
    cfg = replace(cfg, features=replace(cfg.features, kinds=kinds))
    vectors, _ = pipeline.load_or_extract(cfg, cfg.output_dir)
    return vectors[kinds[0]]


def cmd_train(cfg, args) -> int:
    kind = FeatureKind.parse(args.kind).value
    if args.family not in ("mlp", "svm"):
        raise ConfigError(f"unknown model family {args.family!r}")
    spec = scenario(args.scenario, cfg.seed, cfg.scenarios.split_fraction)
    report, model = run_scenario(spec, _vectors(cfg, kind), kind, args.family,
                                 dict(getattr(cfg.models, args.family)),
                                 cfg.normalization.feature_scaling, cfg.scenarios.grouped,
                                 return_model=True)
    out = Path(cfg.output_dir)
    name = pipeline.cell_name(args.scenario, kind, args.family)
    (out / "models").mkdir(parents=True, exist_ok=True)
    (out / "reports").mkdir(exist_ok=True)
    save_model(model, out / "models" / f"{name}.json")
    (out / "reports" / f"{name}.json").write_text(report_json(report), encoding="utf-8")
    print(f"{name}: accuracy {report.confusion.accuracy:.2f}%, AUC "
          f"{'n/a' if report.auc is None else format(report.auc, '.3f')}")
    return EXIT_OK


def cmd_grid(cfg, args) -> int:
    family = args.family or cfg.grid.family
    kind = FeatureKind.parse(args.kind or cfg.grid.feature_kind).value
    if family not in ("mlp", "svm"):
        raise ConfigError(f"unknown model family {family!r}")
    space = cfg.grid.space
    if space == "table1":
        space = svm_search_space(cfg.grid.kernels) if family == "svm" else mlp_search_space()
    elif not isinstance(space, dict):
        raise ConfigError("grid.space must be 'table1' or a mapping of parameter lists")
    vectors = _vectors(cfg, kind)
    X = as_matrix([v.values for v in vectors])
    y = encode_labels([v.label for v in vectors])
    groups = [v.group or v.segment_ref for v in vectors] if cfg.scenarios.grouped else None
    result = grid_search(X, y, family, space, cfg.seed, groups,
                         fixed=dict(getattr(cfg.models, family)), jobs=cfg.jobs)
    out = Path(cfg.output_dir) / "grid"
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{family}_{kind}.json"
    pipeline.write_json(path, result.to_dict())
    best = result.cells[result.best_index]
    print(f"best {family} params {result.best_params}: accuracy {best.accuracy:.2f}% -> {path}")
    return EXIT_OK


def cmd_run(cfg, args) -> int:
    outcome = pipeline.run_experiment(cfg)
    print(f"{len(outcome.reports)} of {len(outcome.cells)} cells completed -> {cfg.output_dir}")
    for cell, msg in outcome.failures:
        print(f"FAILED {cell}: {msg}", file=sys.stderr)
    return outcome.exit_code


def cmd_synth(cfg, args) -> int:
    out = Path(cfg.output_dir) / "synth"
    manifest = write_synth_recordings(out, args.per_class or cfg.synth.per_class, cfg.seed,
                                      cfg.synth.datasets, cfg.synth.max_bursts, cfg.synth.noise_rms,
                                      cfg.data.sample_rate)
    print(manifest)
    return EXIT_OK


def cmd_report(cfg, args) -> int:
    if args.csv:
        if not args.wav:
            raise ConfigError("report --csv needs --wav <file>")
        clip = canonicalize(read_wav(args.wav), cfg.data.sample_rate)
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if args.kind:
                frames = frame_features(clip.samples, args.kind, cfg.features.params(), clip.sample_rate)
                hop = cfg.features.hop_length
                w.writerow(["time_s"] + [f"f{i}" for i in range(frames.shape[1])])
                for i, row in enumerate(frames):
                    w.writerow([format(i * hop / clip.sample_rate, ".17g")]
                               + [format(float(v), ".17g") for v in row])
            else:
                w.writerow(["time_s", "amplitude"])
                t = np.arange(len(clip.samples)) / clip.sample_rate
                w.writerows([format(a, ".17g"), format(b, ".17g")] for a, b in zip(t, clip.samples))
        print(args.csv)
        return EXIT_OK
    reports = pipeline.load_reports(cfg.output_dir)
    text = markdown_summary(reports, (), "Experiment summary")
    print(text)
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "extract": cmd_extract, "train": cmd_train, "grid": cmd_grid,
            "run": cmd_run, "synth": cmd_synth, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CoughScreenError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
