from .config import ExperimentConfig, config_from_dict, load_config
from .manifest import ManifestEntry, QualityFilter, load_manifest
from .pipeline import extract, ingest, run_experiment
from .synth import synth_dataset, write_synth_recordings

__all__ = [
    "ExperimentConfig", "ManifestEntry", "QualityFilter", "config_from_dict",
    "extract", "ingest", "load_config", "load_manifest", "run_experiment",
    "synth_dataset", "write_synth_recordings",
]
