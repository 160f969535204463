"""Toy-encoder implementation of the sentence/token multi-granularity network."""

from propspan.granunet.model import (
    GATE_ACTIVATIONS,
    WIRINGS,
    ConfigError,
    Example,
    ForwardTrace,
    GranuConfig,
    GranuParams,
    LossParts,
    backward,
    encode,
    forward,
    loss,
)
from propspan.granunet.gradcheck import GradCheckReport, gradient_check, numeric_gradient
from propspan.granunet.training import EpochLog, TrainResult, predict, predict_example, train

__all__ = [
    "GATE_ACTIVATIONS",
    "WIRINGS",
    "ConfigError",
    "EpochLog",
    "Example",
    "ForwardTrace",
    "GradCheckReport",
    "GranuConfig",
    "GranuParams",
    "LossParts",
    "TrainResult",
    "backward",
    "encode",
    "forward",
    "gradient_check",
    "loss",
    "numeric_gradient",
    "predict",
    "predict_example",
    "train",
]
