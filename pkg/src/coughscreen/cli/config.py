"""Experiment configuration: YAML file -> validated, frozen dataclasses.

Unknown keys anywhere in the tree are rejected before any work starts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError, CoughScreenError
from ..evaluation.scenarios import SCENARIO_PAIRS
from ..features.extract import FeatureKind, FeatureParams
from ..models import FAMILIES, MLPParams, SVMParams
from ..preprocess import SegmenterConfig
from .manifest import QualityFilter


@dataclass(frozen=True)
class DataConfig:
    manifests: tuple[str, ...] = ()
    feature_cache: str | None = None
    sample_rate: int = 22050
    quality_filter: QualityFilter = QualityFilter()


@dataclass(frozen=True)
class NormalizationConfig:
    signal_minmax: bool = True
    feature_scaling: str = "none"


@dataclass(frozen=True)
class FeaturesConfig:
    kinds: tuple[str, ...] = ("mfcc", "chroma", "contrast", "combined")
    n_fft: int = 2048
    hop_length: int = 512
    n_mels: int = 128
    n_mfcc: int = 13
    n_bands: int = 6

    def params(self) -> FeatureParams:
        return FeatureParams(self.n_fft, self.hop_length, self.n_mels, self.n_mfcc, self.n_bands)


@dataclass(frozen=True)
class ModelsConfig:
    families: tuple[str, ...] = ("mlp", "svm")
    mlp: dict = field(default_factory=dict)
    svm: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GridConfig:
    family: str = "svm"
    feature_kind: str = "mfcc"
    space: str | dict = "table1"
    kernels: tuple[str, ...] = ("rbf",)


@dataclass(frozen=True)
class ScenariosConfig:
    ids: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    split_fraction: float = 0.8
    grouped: bool = True


@dataclass(frozen=True)
class SynthConfig:
    per_class: int = 200
    datasets: tuple[str, ...] = ("COUGHVID", "Virufy")
    max_bursts: int = 3
    noise_rms: float = 1e-4


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    output_dir: str = "out"
    jobs: int = 1
    data: DataConfig = DataConfig()
    segmenter: SegmenterConfig = SegmenterConfig()
    normalization: NormalizationConfig = NormalizationConfig()
    features: FeaturesConfig = FeaturesConfig()
    models: ModelsConfig = ModelsConfig()
    grid: GridConfig = GridConfig()
    scenarios: ScenariosConfig = ScenariosConfig()
    synth: SynthConfig = SynthConfig()


def _build(cls, data, where: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{where}.{name}")
        elif isinstance(default, tuple) and value is not None:
            kwargs[name] = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        elif isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError, CoughScreenError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    for kind in cfg.features.kinds:
        try:
            FeatureKind.parse(kind)
        except ValueError as exc:
            raise ConfigError(f"features.kinds: {exc}") from None
    for fam in cfg.models.families:
        if fam not in FAMILIES:
            raise ConfigError(f"models.families: unknown model family {fam!r}")
    for fam, cls in (("mlp", MLPParams), ("svm", SVMParams)):
        overrides = getattr(cfg.models, fam) or {}
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(overrides) - allowed)
        if unknown:
            raise ConfigError(f"models.{fam}: unknown key(s) {unknown}")
        try:
            cls.from_dict(overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"models.{fam}: {exc}") from exc
    bad = [i for i in cfg.scenarios.ids if i not in SCENARIO_PAIRS]
    if bad:
        raise ConfigError(f"scenarios.ids: unknown scenario id(s) {bad}")
    if not 0 < cfg.scenarios.split_fraction < 1:
        raise ConfigError("scenarios.split_fraction must lie in (0, 1)")
    if cfg.normalization.feature_scaling not in ("none", "minmax"):
        raise ConfigError("normalization.feature_scaling must be 'none' or 'minmax'")
    if cfg.grid.family not in FAMILIES:
        raise ConfigError(f"grid.family: unknown model family {cfg.grid.family!r}")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.data.sample_rate <= 0:
        raise ConfigError("data.sample_rate must be positive")
    return cfg


def config_from_dict(data: dict | None) -> ExperimentConfig:
    return validate(_build(ExperimentConfig, data or {}, "config"))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = config_from_dict(data)
    # Relative manifest / cache paths are relative to the config file.
    base = path.parent
    manifests = tuple(str(base / m) if not Path(m).is_absolute() else m for m in cfg.data.manifests)
    cache = cfg.data.feature_cache
    if cache and not Path(cache).is_absolute():
        cache = str(base / cache)
    return dataclasses.replace(cfg, data=dataclasses.replace(cfg.data, manifests=manifests, feature_cache=cache))


def config_to_dict(cfg) -> dict:
    return dataclasses.asdict(cfg)
