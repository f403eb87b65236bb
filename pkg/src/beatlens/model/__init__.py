"""Configurable residual 1D-CNN: training, inference, embeddings, weight files."""

from .config import ModelConfig
from .network import Embedding, ModelBundle, ModelNumericsError, PredictionResult, init_params, loss_and_grads
from .training import EvalReport, TrainParams, TrainingDivergedError, evaluate, train
from .weights_io import WeightFormatError, bundle_fingerprint, load_weights, save_weights

__all__ = [
    "ModelConfig",
    "ModelBundle",
    "PredictionResult",
    "Embedding",
    "ModelNumericsError",
    "init_params",
    "loss_and_grads",
    "TrainParams",
    "TrainingDivergedError",
    "EvalReport",
    "train",
    "evaluate",
    "WeightFormatError",
    "bundle_fingerprint",
    "save_weights",
    "load_weights",
]
