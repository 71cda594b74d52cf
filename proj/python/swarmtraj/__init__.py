"""UAV swarm trajectory prediction and deconfliction."""

import json

from ._core import (
    ACTIVATIONS,
    ActivationSpec,
    DomainError,
    Error,
    GenConfig,
    IcdabConfig,
    IoError,
    NetworkParams,
    NumericError,
    ShapeError,
    SwarmDataset,
    TrainConfig,
    UsageError,
    generate,
    predict,
    sweep_safe_distance,
    validate_dataset,
)
from . import _core

__all__ = [
    "ACTIVATIONS",
    "ActivationSpec",
    "DomainError",
    "Error",
    "GenConfig",
    "IcdabConfig",
    "IoError",
    "NetworkParams",
    "NumericError",
    "ShapeError",
    "SwarmDataset",
    "TrainConfig",
    "UsageError",
    "compute_metrics",
    "detect_all",
    "generate",
    "predict",
    "run_pipeline",
    "sweep_safe_distance",
    "train",
    "validate_dataset",
]


def compute_metrics(actual, predicted):
    """MSE, RMSE, MAE, MAPE and SMAPE as a dict."""
    return json.loads(_core.compute_metrics(list(actual), list(predicted)))


def train(dataset, axis, activation, config=None):
    """Returns (model_json, report) for one (axis, activation) pair."""
    model, report = _core.train(dataset, axis, activation, config or TrainConfig())
    return model, json.loads(report)


def detect_all(dataset, config=None):
    return json.loads(_core.detect_all(dataset, config or IcdabConfig()))


def run_pipeline(dataset, config=None):
    return json.loads(_core.run_pipeline(dataset, config or IcdabConfig()))
