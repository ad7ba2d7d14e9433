from ddos_analysis.nn.checkpoint import load_checkpoint, save_checkpoint
from ddos_analysis.nn.detector import Detector
from ddos_analysis.nn.gradcheck import gradient_check
from ddos_analysis.nn.layers import (
    LSTM,
    BatchNorm,
    Conv1D,
    Dense,
    Dropout,
    Flatten,
    GlobalAveragePooling1D,
    Layer,
    MaxPool1D,
    Reshape,
    SelfAttention,
)
from ddos_analysis.nn.models import (
    LayerSpec,
    Model,
    ModelKind,
    ModelSpec,
    Regularization,
    build_aen,
    build_cnn,
    build_lstm,
    build_mlp,
    build_spec,
    build_trf,
)
from ddos_analysis.nn.training import (
    TrainConfig,
    TrainedModel,
    forward,
    gradients,
    loss,
    loss_gradient,
    predict_batches,
    train,
)

__all__ = [
    "LSTM",
    "BatchNorm",
    "Conv1D",
    "Dense",
    "Detector",
    "Dropout",
    "Flatten",
    "GlobalAveragePooling1D",
    "Layer",
    "LayerSpec",
    "MaxPool1D",
    "Model",
    "ModelKind",
    "ModelSpec",
    "Regularization",
    "Reshape",
    "SelfAttention",
    "TrainConfig",
    "TrainedModel",
    "build_aen",
    "build_cnn",
    "build_lstm",
    "build_mlp",
    "build_spec",
    "build_trf",
    "forward",
    "gradient_check",
    "gradients",
    "load_checkpoint",
    "loss",
    "loss_gradient",
    "predict_batches",
    "save_checkpoint",
    "train",
]
