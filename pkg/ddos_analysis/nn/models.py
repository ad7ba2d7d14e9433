import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np

from ddos_analysis.exceptions import ConfigurationError, ShapeError
from ddos_analysis.features import ArchitectureKind
from ddos_analysis.nn.layers import Dense, Layer, make_layer
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)

DROPOUT_RATE = 0.3
L2_FACTOR = 0.3
ENCODER_WIDTHS = (256, 128, 64, 32, 16)


class ModelKind(str, Enum):
    MLP = "MLP"
    CNN = "CNN"
    LSTM = "LSTM"
    TRF = "TRF"
    AEN = "AEN"

    @classmethod
    def parse(cls, value: Union[str, "ModelKind"]) -> "ModelKind":
        try:
            return cls(str(getattr(value, "value", value)).upper())
        except ValueError as exc:
            raise ConfigurationError(f"Unknown model {value!r}, choose from {[k.value for k in cls]}") from exc


@dataclass(frozen=True)
class Regularization:
    dropout_rate: float = 0.0
    l2_factor: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.dropout_rate < 1:
            raise ConfigurationError(f"Dropout rate must lie in [0, 1), not {self.dropout_rate}")
        if self.l2_factor < 0:
            raise ConfigurationError(f"L2 factor must be non-negative, not {self.l2_factor}")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    options: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "options": self.options}


@dataclass(frozen=True)
class ModelSpec:
    """
    Architecture of one network.

    Attributes:
        kind (ModelKind): model family.
        arch (ArchitectureKind): detector architecture the model serves.
        input_shape (Tuple[int, int]): ``(n_t, F)``.
        layers (Tuple[LayerSpec, ...]): layers in order.
        regularization (Regularization): dropout rate and L2 factor.
        objective (str): ``bce`` for detectors, ``mse`` for the autoencoder.
        frozen (int): number of leading layers excluded from training.
    """

    kind: ModelKind
    arch: ArchitectureKind
    input_shape: Tuple[int, int]
    layers: Tuple[LayerSpec, ...]
    regularization: Regularization = Regularization()
    objective: str = "bce"
    frozen: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "arch": self.arch.value,
            "input_shape": list(self.input_shape),
            "layers": [layer.to_dict() for layer in self.layers],
            "regularization": {"dropout_rate": self.regularization.dropout_rate, "l2_factor": self.regularization.l2_factor},
            "objective": self.objective,
            "frozen": self.frozen,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "ModelSpec":
        return cls(
            kind=ModelKind.parse(record["kind"]),
            arch=ArchitectureKind.parse(record["arch"]),
            input_shape=tuple(record["input_shape"]),
            layers=tuple(LayerSpec(layer["kind"], dict(layer["options"])) for layer in record["layers"]),
            regularization=Regularization(**record["regularization"]),
            objective=record["objective"],
            frozen=int(record["frozen"]),
        )


def _check_input_shape(input_shape: Tuple[int, int]) -> Tuple[int, int]:
    if len(input_shape) != 2 or min(input_shape) < 1:
        raise ShapeError(f"Input shape must be (n_t, F) with positive sizes, not {input_shape}")
    return int(input_shape[0]), int(input_shape[1])


def _regularization(arch: ArchitectureKind, dropout: bool, l2: bool) -> Regularization:
    if not ArchitectureKind.parse(arch).with_correlation:
        return Regularization()
    return Regularization(dropout_rate=DROPOUT_RATE if dropout else 0.0, l2_factor=L2_FACTOR if l2 else 0.0)


def _output_layer() -> LayerSpec:
    return LayerSpec("dense", {"units": 1, "activation": "sigmoid", "zero_kernel": True})


def build_mlp(arch: ArchitectureKind, input_shape: Tuple[int, int]) -> ModelSpec:
    """
    Flattened window, dense layer of 5 ReLU units, dropout 0.3 for WC architectures, sigmoid output.
    """
    arch = ArchitectureKind.parse(arch)
    input_shape = _check_input_shape(input_shape)
    regularization = _regularization(arch, dropout=True, l2=False)
    layers = [LayerSpec("flatten"), LayerSpec("dense", {"units": 5, "activation": "relu"})]
    if regularization.dropout_rate:
        layers.append(LayerSpec("dropout", {"rate": regularization.dropout_rate}))
    layers.append(_output_layer())
    return ModelSpec(ModelKind.MLP, arch, input_shape, tuple(layers), regularization)


def build_cnn(arch: ArchitectureKind, input_shape: Tuple[int, int]) -> ModelSpec:
    """
    Conv1D with 5 filters of size 3, dropout 0.3 for WC architectures, max pooling of 2, sigmoid output.

    Raises:
        ShapeError: window shorter than the kernel.
    """
    arch = ArchitectureKind.parse(arch)
    input_shape = _check_input_shape(input_shape)
    if input_shape[0] < 3:
        raise ShapeError(f"CNN needs windows of at least 3 timesteps, not {input_shape[0]}")
    regularization = _regularization(arch, dropout=True, l2=False)
    layers = [LayerSpec("conv1d", {"filters": 5, "kernel_size": 3, "activation": "relu"})]
    if regularization.dropout_rate:
        layers.append(LayerSpec("dropout", {"rate": regularization.dropout_rate}))
    layers += [LayerSpec("maxpool1d", {"pool_size": 2}), LayerSpec("flatten"), _output_layer()]
    return ModelSpec(ModelKind.CNN, arch, input_shape, tuple(layers), regularization)


def build_lstm(arch: ArchitectureKind, input_shape: Tuple[int, int]) -> ModelSpec:
    """
    LSTM with 4 units returning its last hidden state, L2 0.3 on its weights for WC architectures, sigmoid output.
    """
    arch = ArchitectureKind.parse(arch)
    input_shape = _check_input_shape(input_shape)
    regularization = _regularization(arch, dropout=False, l2=True)
    layers = (LayerSpec("lstm", {"units": 4, "l2": regularization.l2_factor > 0}), _output_layer())
    return ModelSpec(ModelKind.LSTM, arch, input_shape, layers, regularization)


def build_trf(arch: ArchitectureKind, input_shape: Tuple[int, int]) -> ModelSpec:
    """
    One-head self-attention with query/key width 1, global average pooling, sigmoid output.
    """
    arch = ArchitectureKind.parse(arch)
    input_shape = _check_input_shape(input_shape)
    regularization = _regularization(arch, dropout=False, l2=True)
    layers = (
        LayerSpec("attention", {"key_dim": 1, "l2": regularization.l2_factor > 0}),
        LayerSpec("gap1d"),
        _output_layer(),
    )
    return ModelSpec(ModelKind.TRF, arch, input_shape, layers, regularization)


def _encoder() -> List[LayerSpec]:
    layers = [LayerSpec("flatten")]
    for width in ENCODER_WIDTHS:
        layers += [LayerSpec("dense", {"units": width, "activation": "relu"}), LayerSpec("batchnorm")]
    return layers


def build_aen(input_shape: Tuple[int, int], arch: ArchitectureKind = ArchitectureKind.MM_WC) -> Tuple[ModelSpec, ModelSpec]:
    """
    Autoencoder and the classifier that reuses its encoder.

    The autoencoder reconstructs the window through dense layers of 256,
    128, 64, 32 and 16 units and back, each followed by batch normalization.
    The classifier stacks a frozen copy of the encoder, a dense layer of 8
    ReLU units and a sigmoid output.

    Returns:
        Tuple[ModelSpec, ModelSpec]: autoencoder and classifier.
    """
    arch = ArchitectureKind.parse(arch)
    input_shape = _check_input_shape(input_shape)
    encoder = _encoder()
    decoder = []
    for width in reversed(ENCODER_WIDTHS):
        decoder += [LayerSpec("dense", {"units": width, "activation": "relu"}), LayerSpec("batchnorm")]
    decoder += [
        LayerSpec("dense", {"units": input_shape[0] * input_shape[1], "activation": "linear"}),
        LayerSpec("reshape", {"target_shape": list(input_shape)}),
    ]
    autoencoder = ModelSpec(ModelKind.AEN, arch, input_shape, tuple(encoder + decoder), objective="mse")
    head = [LayerSpec("dense", {"units": 8, "activation": "relu"}), _output_layer()]
    classifier = ModelSpec(ModelKind.AEN, arch, input_shape, tuple(encoder + head), frozen=len(encoder))
    return autoencoder, classifier


def build_spec(kind: Union[ModelKind, str], arch: ArchitectureKind, input_shape: Tuple[int, int]) -> ModelSpec:
    """
    Detector spec of a model family; for AEN the classifier spec.
    """
    kind = ModelKind.parse(kind)
    if kind is ModelKind.AEN:
        return build_aen(input_shape, arch)[1]
    builders = {ModelKind.MLP: build_mlp, ModelKind.CNN: build_cnn, ModelKind.LSTM: build_lstm, ModelKind.TRF: build_trf}
    return builders[kind](arch, input_shape)


class Model:
    """
    Network instantiated from a :class:`ModelSpec` with seeded initial weights.
    """

    def __init__(self, spec: ModelSpec, seed: int = 0) -> None:
        self.spec = spec
        self.seed = int(seed)
        rng = make_rng(seed, "init", spec.kind.value, spec.objective)
        self.layers: List[Layer] = [make_layer(layer.kind, dict(layer.options)) for layer in spec.layers]
        shape = tuple(spec.input_shape)
        for index, layer in enumerate(self.layers):
            shape = layer.build(shape, rng)
            layer.trainable = index >= spec.frozen
        self.output_shape = shape

    def forward(self, x: np.ndarray, training: bool = False, rng: Union[np.random.Generator, None] = None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[1:] != tuple(self.spec.input_shape):
            raise ShapeError(f"Batch of shape {x.shape} does not match the input shape {tuple(self.spec.input_shape)}")
        for layer in self.layers:
            x = layer.forward(x, training=training and layer.trainable, rng=rng)
        return x

    def backward(self, dy: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def named_parameters(self, trainable_only: bool = False) -> Iterator[Tuple[str, Layer, str]]:
        """
        ``(qualified name, layer, parameter name)`` in a fixed order.
        """
        for index, layer in enumerate(self.layers):
            if trainable_only and not layer.trainable:
                continue
            for name in layer.params:
                yield f"{index}.{layer.kind}.{name}", layer, name

    def parameter_count(self, trainable_only: bool = False) -> int:
        return int(sum(layer.params[name].size for _, layer, name in self.named_parameters(trainable_only)))

    def l2_penalty(self) -> float:
        factor = self.spec.regularization.l2_factor
        if factor == 0:
            return 0.0
        return factor * float(sum(np.sum(layer.params[name] ** 2) for layer in self.layers for name in layer.regularized))

    def add_l2_gradients(self) -> None:
        factor = self.spec.regularization.l2_factor
        if factor == 0:
            return
        for layer in self.layers:
            for name in layer.regularized:
                layer.grads[name] = layer.grads[name] + 2.0 * factor * layer.params[name]

    @property
    def output_layer(self) -> Dense:
        return self.layers[-1]

    def set_output_bias(self, value: float) -> None:
        self.output_layer.params["bias"][...] = value

    def copy_from(self, other: "Model", count: int) -> None:
        """
        Copy parameters and state of the first ``count`` layers of ``other``.
        """
        for mine, theirs in zip(self.layers[:count], other.layers[:count]):
            if mine.kind != theirs.kind:
                raise ShapeError(f"Cannot copy a {theirs.kind} layer into a {mine.kind} layer")
            for name, value in theirs.params.items():
                mine.params[name] = value.copy()
            for name, value in theirs.state().items():
                setattr(mine, name, value.copy())
