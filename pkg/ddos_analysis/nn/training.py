import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from ddos_analysis.exceptions import ConfigurationError, DegenerateClassError, ShapeError
from ddos_analysis.features import TrainingView, class_weights
from ddos_analysis.nn.models import Model, ModelKind, ModelSpec, build_aen
from ddos_analysis.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

CLAMP = 1e-12
OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class TrainConfig:
    """
    Mini-batch training settings.

    Attributes:
        epochs (int): passes over the training view.
        batch_size (int): samples per update.
        learning_rate (float): step size.
        optimizer (str): ``adam`` or ``sgd``.
        seed (int): seed of initialization, shuffling and dropout.
        class_weights (Tuple[float, float], optional): ``(w_n, w_p)``, taken from the view when omitted.
        autoencoder_epochs (int, optional): epochs of the AEN reconstruction phase, ``epochs`` when omitted.
    """

    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    class_weights: Union[Tuple[float, float], None] = None
    autoencoder_epochs: Union[int, None] = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, not {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, not {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be positive, not {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"Unknown optimizer {self.optimizer!r}, choose from {OPTIMIZERS}")
        if self.class_weights is not None:
            object.__setattr__(self, "class_weights", tuple(float(w) for w in self.class_weights))

    def to_dict(self) -> dict:
        record = asdict(self)
        record["class_weights"] = list(self.class_weights) if self.class_weights is not None else None
        return record


class Optimizer:
    """
    Adam (beta1 0.9, beta2 0.999, eps 1e-8) or plain SGD over a model's trainable parameters.
    """

    def __init__(self, kind: str, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> None:
        self.kind = kind
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.epsilon = beta1, beta2, epsilon
        self.step_count = 0
        self.moments: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}

    def step(self, model: Model) -> None:
        self.step_count += 1
        for key, layer, name in model.named_parameters(trainable_only=True):
            grad = layer.grads[name]
            if self.kind == "sgd":
                layer.params[name] -= self.learning_rate * grad
                continue
            m, v = self.moments.get(key, (np.zeros_like(grad), np.zeros_like(grad)))
            m = self.beta1 * m + (1 - self.beta1) * grad
            v = self.beta2 * v + (1 - self.beta2) * grad**2
            self.moments[key] = (m, v)
            m_hat = m / (1 - self.beta1**self.step_count)
            v_hat = v / (1 - self.beta2**self.step_count)
            layer.params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def forward(model: Model, batch: np.ndarray, training: bool = False, rng: Union[np.random.Generator, None] = None) -> np.ndarray:
    """
    Attack probabilities of a batch of windows.

    Dropout is active and batch normalization uses batch statistics only
    when ``training``.

    Returns:
        np.ndarray: ``(batch,)`` probabilities in (0, 1).

    Raises:
        ShapeError: batch shape does not match the model.
    """
    if model.spec.objective != "bce":
        raise ShapeError("forward() returns probabilities, the model is an autoencoder")
    return model.forward(batch, training=training, rng=rng)[:, 0]


def loss(
    predictions: np.ndarray,
    labels: np.ndarray,
    weights: Tuple[float, float] = (1.0, 1.0),
    model: Union[Model, None] = None,
    l2_factor: Union[float, None] = None,
) -> float:
    """
    Class-weighted binary cross-entropy plus the L2 penalty.

    ``mean(-[w_p y ln p + w_n (1 - y) ln(1 - p)])`` with ``p`` clamped to
    ``[1e-12, 1 - 1e-12]``, plus ``l2_factor`` times the sum of squared
    regularized weights of ``model``. ``l2_factor`` defaults to the model's.
    """
    p = np.clip(np.asarray(predictions, dtype=np.float64), CLAMP, 1 - CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    w_n, w_p = weights
    value = float(np.mean(-(w_p * y * np.log(p) + w_n * (1 - y) * np.log(1 - p))))
    if model is not None:
        factor = model.spec.regularization.l2_factor if l2_factor is None else l2_factor
        if factor:
            value += factor * float(sum(np.sum(layer.params[name] ** 2) for layer in model.layers for name in layer.regularized))
    return value


def loss_gradient(predictions: np.ndarray, labels: np.ndarray, weights: Tuple[float, float]) -> np.ndarray:
    """
    Derivative of the mean weighted cross-entropy with respect to the predictions.

    Zero where the clamp is active, the clamped loss being flat there.
    """
    p = np.clip(predictions, CLAMP, 1 - CLAMP)
    w_n, w_p = weights
    inside = (predictions > CLAMP) & (predictions < 1 - CLAMP)
    return np.where(inside, -(w_p * labels / p - w_n * (1 - labels) / (1 - p)) / labels.shape[0], 0.0)


def reconstruction_loss(reconstruction: np.ndarray, batch: np.ndarray) -> float:
    return float(np.mean((reconstruction - batch) ** 2))


def objective(model: Model, batch: np.ndarray, labels: Union[np.ndarray, None], weights: Tuple[float, float], training: bool, rng) -> float:
    """
    Training objective of a model on a batch: weighted cross-entropy or reconstruction error, plus L2.
    """
    output = model.forward(batch, training=training, rng=rng)
    if model.spec.objective == "mse":
        return reconstruction_loss(output, batch) + model.l2_penalty()
    return loss(output[:, 0], labels, weights, model)


def gradients(
    model: Model,
    batch: np.ndarray,
    labels: Union[np.ndarray, None],
    weights: Tuple[float, float] = (1.0, 1.0),
    rng: Union[np.random.Generator, None] = None,
    training: bool = True,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Objective value and analytic gradients of every trainable parameter.

    Returns:
        Tuple[float, Dict[str, np.ndarray]]: objective and gradients keyed by qualified parameter name.
    """
    batch = np.asarray(batch, dtype=np.float64)
    output = model.forward(batch, training=training, rng=rng)
    if model.spec.objective == "mse":
        value = reconstruction_loss(output, batch)
        d_output = 2.0 * (output - batch) / batch.size
    else:
        labels = np.asarray(labels, dtype=np.float64)
        value = loss(output[:, 0], labels, weights)
        d_output = loss_gradient(output[:, 0], labels, weights)[:, None]
    model.backward(d_output)
    model.add_l2_gradients()
    value += model.l2_penalty()
    grads = {key: layer.grads[name] for key, layer, name in model.named_parameters(trainable_only=True)}
    return value, grads


@dataclass
class TrainedModel:
    """
    Trained network with its settings and loss history.

    Attributes:
        model (Model): network with the final-epoch parameters.
        config (TrainConfig): training settings.
        weights (Tuple[float, float]): class weights used by the loss.
        initial_bias (float): output bias before training.
        history (pd.DataFrame): EPOCH, LOSS, VAL_LOSS.
        autoencoder_loss (List[float]): per-epoch reconstruction loss of the AEN autoencoder.
    """

    model: Model
    config: TrainConfig
    weights: Tuple[float, float]
    initial_bias: float
    history: pd.DataFrame
    autoencoder_loss: List[float] = field(default_factory=list)

    @property
    def spec(self) -> ModelSpec:
        return self.model.spec

    def predict(self, samples: np.ndarray, batch_size: int = 1024) -> np.ndarray:
        """
        Inference-mode probabilities, computed in chunks.
        """
        return predict_batches(self.model, samples, batch_size)

    def evaluate_loss(self, view: TrainingView) -> float:
        return loss(self.predict(view.samples), view.labels, self.weights, self.model)


def predict_batches(model: Model, samples: np.ndarray, batch_size: int = 1024) -> np.ndarray:
    """
    Inference-mode probabilities of many windows, computed in chunks.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] == 0:
        return np.empty(0)
    return np.concatenate([forward(model, samples[i : i + batch_size]) for i in range(0, samples.shape[0], batch_size)])


def _run_epochs(
    model: Model,
    samples: np.ndarray,
    labels: Union[np.ndarray, None],
    weights: Tuple[float, float],
    epochs: int,
    config: TrainConfig,
    stream: str,
    validation: Union[TrainingView, None] = None,
) -> Tuple[List[float], List[float]]:
    rng = make_rng(config.seed, "train", stream)
    optimizer = Optimizer(config.optimizer, config.learning_rate)
    losses, val_losses = [], []
    for epoch in range(epochs):
        order = rng.permutation(samples.shape[0])
        total = 0.0
        for start in range(0, order.size, config.batch_size):
            index = order[start : start + config.batch_size]
            value, _ = gradients(model, samples[index], None if labels is None else labels[index], weights, rng)
            optimizer.step(model)
            total += value * index.size
        losses.append(total / order.size)
        if validation is not None and len(validation):
            val_losses.append(loss(predict_batches(model, validation.samples), validation.labels, weights, model))
        else:
            val_losses.append(float("nan"))
        logger.debug("%s epoch %d loss %.6f val %.6f", stream, epoch + 1, losses[-1], val_losses[-1])
    return losses, val_losses


def _training_weights(view: TrainingView, config: TrainConfig) -> Tuple[Tuple[float, float], float]:
    if view.positives == 0 or view.negatives == 0:
        if config.class_weights is None:
            raise DegenerateClassError(f"Training view needs both classes, got pos={view.positives}, neg={view.negatives}")
        # half a pseudo-sample per class keeps the bias finite
        b_0 = math.log((view.positives + 0.5) / (view.negatives + 0.5))
        logger.warning("single-class training view, initial bias %.3f", b_0)
        return config.class_weights, b_0
    w_n, w_p, b_0 = class_weights(view.positives, view.negatives)
    if view.initial_bias is not None:
        b_0 = view.initial_bias
    if config.class_weights is not None:
        return config.class_weights, b_0
    if view.class_weights is not None:
        return tuple(view.class_weights), b_0
    return (w_n, w_p), b_0


def train(
    spec: ModelSpec,
    view: TrainingView,
    config: TrainConfig = TrainConfig(),
    validation: Union[TrainingView, None] = None,
    benign: Union[TrainingView, None] = None,
) -> TrainedModel:
    """
    Train a detector on a training view.

    The output bias starts at ``b_0`` so the initial prediction equals the
    positive rate. Mini-batches are drawn from a seeded permutation every
    epoch. For AEN specs the autoencoder is first trained to reconstruct
    benign windows (``benign``, or the negative windows of ``view``), then
    its encoder is copied and frozen and the classifier head is trained.

    Args:
        spec (ModelSpec): detector architecture.
        view (TrainingView): training windows.
        config (TrainConfig): training settings.
        validation (TrainingView, optional): windows for the per-epoch validation loss.
        benign (TrainingView, optional): attack-free windows for the AEN reconstruction phase.

    Returns:
        TrainedModel: final-epoch parameters and loss history.

    Raises:
        DegenerateClassError: empty training view, or a single class without explicit class weights.
    """
    if len(view) == 0:
        raise DegenerateClassError("Training view is empty")
    weights, b_0 = _training_weights(view, config)
    model = Model(spec, seed=derive_seed(config.seed, "init"))
    model.set_output_bias(b_0)
    autoencoder_loss = []
    if spec.kind is ModelKind.AEN:
        autoencoder = Model(build_aen(tuple(spec.input_shape), spec.arch)[0], seed=derive_seed(config.seed, "init-autoencoder"))
        clean = benign.samples if benign is not None else view.samples[~view.labels]
        autoencoder_loss, _ = _run_epochs(
            autoencoder, clean, None, weights, config.autoencoder_epochs or config.epochs, config, "autoencoder"
        )
        model.copy_from(autoencoder, spec.frozen)

    losses, val_losses = _run_epochs(model, view.samples, view.labels, weights, config.epochs, config, "detector", validation)
    frame = pd.DataFrame({"EPOCH": np.arange(1, config.epochs + 1), "LOSS": losses, "VAL_LOSS": val_losses})
    logger.info("trained %s/%s on %d windows, final loss %.5f", spec.kind.value, spec.arch.value, len(view), losses[-1])
    return TrainedModel(model, config, tuple(weights), float(b_0), frame, autoencoder_loss)

