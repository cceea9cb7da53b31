"""Self-trained one-class classification for unsupervised anomaly detection."""

import json

from ._stoc import (
    ConfigError,
    ExperimentSplit,
    GdeModel,
    LabeledTable,
    RefinedSet,
    StocConfig,
    StocPipeline,
    auc,
    average_precision,
    f1_at_ratio,
    fit,
    load_csv,
    load_pipeline,
    make_split,
    percentile_threshold,
    recall_at_precision,
    refine_data,
    standardize,
    synth_blobs,
)

__all__ = [
    "ConfigError",
    "ExperimentSplit",
    "GdeModel",
    "LabeledTable",
    "RefinedSet",
    "StocConfig",
    "StocPipeline",
    "auc",
    "average_precision",
    "f1_at_ratio",
    "fit",
    "load_csv",
    "load_pipeline",
    "make_split",
    "percentile_threshold",
    "recall_at_precision",
    "refine_data",
    "run_experiment",
    "standardize",
    "synth_blobs",
    "validate_config",
]


def run_experiment(config):
    """Runs the protocol for a config dict and returns the parsed report."""
    from ._stoc import _run_experiment_json

    return json.loads(_run_experiment_json(json.dumps(config)))


def validate_config(config):
    """Returns the config hash, or raises ConfigError naming the bad field."""
    from ._stoc import _validate_json

    return _validate_json(json.dumps(config))
