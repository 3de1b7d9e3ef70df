"""Ingest -> segment -> features -> scenario cells, writing reports to an output directory.

Every stage is deterministic for a fixed config; worker pools only change
wall time, never results (outputs are collected in submission order).
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..audio_io import canonicalize, read_wav
from ..errors import CoughScreenError
from ..evaluation.metrics import MetricsReport
from ..evaluation.report import markdown_summary, report_json
from ..evaluation.scenarios import run_scenario, scenario
from ..features.extract import (FeatureKind, extract_feature_set, read_feature_cache,
                                write_feature_cache)
from ..preprocess import normalize_signal, segment_coughs
from .config import ExperimentConfig, config_to_dict
from .manifest import ManifestSummary, load_manifest
from .synth import synth_dataset

log = logging.getLogger(__name__)


@dataclass
class IngestResult:
    segments: list
    manifest: ManifestSummary = field(default_factory=ManifestSummary)
    n_files: int = 0
    n_empty: int = 0
    source: str = "manifest"

    def to_dict(self) -> dict:
        return {"source": self.source, "files": self.n_files, "files_without_segments": self.n_empty,
                "segments": len(self.segments), "manifest": self.manifest.to_dict()}


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(it) for it in items]


def _ingest_file(args):
    entry, cfg = args
    clip = canonicalize(read_wav(entry.path), cfg.data.sample_rate)
    segs = segment_coughs(clip, cfg.segmenter, label=entry.label, dataset=entry.dataset)
    if cfg.normalization.signal_minmax:
        segs = [normalize_signal(s) for s in segs]
    return segs


def ingest(cfg: ExperimentConfig, jobs: int | None = None) -> IngestResult:
    """Load manifests, decode, resample, segment and normalize every recording.

    With no manifests configured, the synthetic generator stands in for the
    datasets (segments tagged alternately with the configured dataset names).
    """
    jobs = jobs or cfg.jobs
    if not cfg.data.manifests:
        log.info("no manifests configured; using %d synthetic segments per class", cfg.synth.per_class)
        pairs = synth_dataset(cfg.synth.per_class, cfg.seed, datasets=cfg.synth.datasets,
                              sample_rate=cfg.data.sample_rate)
        segs = [s for s, _ in pairs]
        if cfg.normalization.signal_minmax:
            segs = [normalize_signal(s) for s in segs]
        return IngestResult(segs, ManifestSummary(len(segs), len(segs)), len(segs), 0, "synthetic")

    entries, total = [], ManifestSummary()
    for m in cfg.data.manifests:
        got, summary = load_manifest(m, cfg.data.quality_filter)
        entries.extend(got)
        total.total += summary.total
        total.kept += summary.kept
        total.dropped.update(summary.dropped)
    per_file = _map(_ingest_file, [(e, cfg) for e in entries], jobs)
    segments = [s for segs in per_file for s in segs]
    n_empty = sum(1 for segs in per_file if not segs)
    if n_empty:
        log.warning("%d of %d recordings produced no cough segment", n_empty, len(entries))
    return IngestResult(segments, total, len(entries), n_empty)


def _extract_one(args):
    seg, kinds, params = args
    return [extract_feature_set(seg, k, params) for k in kinds]


def extract(cfg: ExperimentConfig, segments, jobs: int | None = None) -> dict:
    """``{kind: [FeatureVector]}`` for every configured feature kind."""
    jobs = jobs or cfg.jobs
    kinds = [FeatureKind.parse(k) for k in cfg.features.kinds]
    params = cfg.features.params()
    rows = _map(_extract_one, [(s, kinds, params) for s in segments], jobs)
    return {k.value: [r[i] for r in rows] for i, k in enumerate(kinds)}


def cache_path(cache_dir, kind) -> Path:
    return Path(cache_dir) / f"features_{FeatureKind.parse(kind).value}.csv"


def load_or_extract(cfg: ExperimentConfig, out_dir, jobs: int | None = None):
    """Feature vectors per kind, reusing ``data.feature_cache`` files when present.

    Freshly computed vectors are written to the cache directory (the
    configured one, else ``<out>/features``). Returns ``(vectors, ingest_info)``.
    """
    cache_dir = Path(cfg.data.feature_cache or Path(out_dir) / "features")
    kinds = [FeatureKind.parse(k).value for k in cfg.features.kinds]
    if cfg.data.feature_cache and all(cache_path(cache_dir, k).exists() for k in kinds):
        log.info("reading cached features from %s", cache_dir)
        return {k: read_feature_cache(cache_path(cache_dir, k)) for k in kinds}, {"source": "cache"}
    result = ingest(cfg, jobs)
    vectors = extract(cfg, result.segments, jobs)
    cache_dir.mkdir(parents=True, exist_ok=True)
    for k, vs in vectors.items():
        write_feature_cache(cache_path(cache_dir, k), vs)
    return vectors, result.to_dict()


def cell_name(sid: int, kind: str, family: str) -> str:
    return f"s{sid}_{kind}_{family}"


def _run_cell(args):
    sid, kind, family, vectors, cfg = args
    spec = scenario(sid, cfg.seed, cfg.scenarios.split_fraction)
    try:
        report = run_scenario(spec, vectors, kind, family, dict(getattr(cfg.models, family)),
                              cfg.normalization.feature_scaling, cfg.scenarios.grouped)
        return report, None
    except (CoughScreenError, ValueError, FloatingPointError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class RunOutcome:
    reports: list
    failures: list  # (cell, message)
    cells: list

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def run_experiment(cfg: ExperimentConfig, out_dir=None, jobs: int | None = None) -> RunOutcome:
    """Every (scenario, feature kind, model family) cell; one JSON report per completed cell.

    Writes ``reports/<cell>.json``, ``summary.md``, ``config.json`` and the
    feature cache under ``out_dir``. Cells that raise get no report file and
    are listed as failed in the summary.
    """
    out = Path(out_dir or cfg.output_dir)
    jobs = jobs or cfg.jobs
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "config.json", config_to_dict(cfg))
    vectors, info = load_or_extract(cfg, out, jobs)
    write_json(out / "ingest.json", info)

    cells = [(sid, FeatureKind.parse(k).value, fam)
             for sid in cfg.scenarios.ids for k in cfg.features.kinds for fam in cfg.models.families]
    outcomes = _map(_run_cell, [(s, k, f, vectors[k], cfg) for s, k, f in cells], jobs)

    rep_dir = out / "reports"
    rep_dir.mkdir(exist_ok=True)
    reports, failures, status = [], [], []
    for (sid, kind, fam), (report, err) in zip(cells, outcomes):
        name = cell_name(sid, kind, fam)
        target = rep_dir / f"{name}.json"
        if err is None:
            target.write_text(report_json(report), encoding="utf-8")
            reports.append(report)
            status.append((name, "ok", f"accuracy {report.confusion.accuracy:.2f}%"))
        else:
            if target.exists():
                target.unlink()
            log.error("cell %s failed: %s", name, err)
            failures.append((name, err))
            status.append((name, "failed", err))
    (out / "summary.md").write_text(render_summary(reports, status), encoding="utf-8")
    return RunOutcome(reports, failures, [c[0] for c in status])


def render_summary(reports, status) -> str:
    lines = ["## Cells", "", "| Cell | Status | Detail |", "|---|---|---|"]
    lines += [f"| {n} | {s} | {d} |" for n, s, d in status]
    return markdown_summary(reports, (), "Experiment summary") + "\n".join(lines) + "\n"


def load_reports(out_dir) -> list[MetricsReport]:
    paths = sorted((Path(out_dir) / "reports").glob("*.json"))
    return [MetricsReport.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]


def with_overrides(cfg: ExperimentConfig, seed=None, out=None, jobs=None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if out is not None:
        changes["output_dir"] = str(out)
    if jobs is not None:
        changes["jobs"] = jobs
    return replace(cfg, **changes)
