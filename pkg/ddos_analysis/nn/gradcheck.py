import logging
from typing import Dict, Tuple, Union

import numpy as np

from ddos_analysis.nn.models import Model
from ddos_analysis.nn.training import gradients, objective
from ddos_analysis.utils.seeding import make_rng

logger = logging.getLogger(__name__)

STEP = 1e-5
MAX_COORDINATES = 25
# below this gradient norm differences are compared in absolute terms
NORM_FLOOR = 1e-4
# estimates at h and h/10 that disagree by more than this straddle a ReLU or max kink
KINK_TOLERANCE = 1e-6


def _state_snapshot(model: Model) -> list:
    return [{name: value.copy() for name, value in layer.state().items()} for layer in model.layers]


def _restore_state(model: Model, snapshot: list) -> None:
    for layer, state in zip(model.layers, snapshot):
        for name, value in state.items():
            setattr(layer, name, value.copy())


def gradient_check(
    model: Model,
    batch: np.ndarray,
    labels: Union[np.ndarray, None] = None,
    weights: Tuple[float, float] = (1.0, 1.0),
    seed: int = 0,
    step: float = STEP,
    training: bool = True,
    max_coordinates: int = MAX_COORDINATES,
) -> Dict[str, float]:
    """
    Compare analytic gradients with central finite differences.

    Every trainable tensor is checked on all of its coordinates, or on
    ``max_coordinates`` randomly chosen ones for larger tensors. Dropout
    masks are redrawn from the same seed for every evaluation, so the
    objective is a fixed function of the parameters. A coordinate whose
    estimate moves between ``step`` and ``step / 10`` sits next to a kink of
    a ReLU or max pooling and is estimated again with ``step / 100``.

    Args:
        model (Model): network to check; parameters and state are restored afterwards.
        batch (np.ndarray): input windows.
        labels (np.ndarray, optional): targets, unused by autoencoders.
        weights (Tuple[float, float]): class weights of the loss.
        seed (int): seed of dropout masks and coordinate sampling.
        step (float): finite-difference step ``h``.
        training (bool): check the training-mode objective.
        max_coordinates (int): coordinates sampled per tensor.

    Returns:
        Dict[str, float]: relative error ``|g_a - g_n| / max(|g_a| + |g_n|, floor)`` per tensor.
    """
    snapshot = _state_snapshot(model)

    def evaluate() -> float:
        _restore_state(model, snapshot)
        return objective(model, batch, labels, weights, training, make_rng(seed, "gradcheck-dropout"))

    _restore_state(model, snapshot)
    _, analytic = gradients(model, batch, labels, weights, make_rng(seed, "gradcheck-dropout"), training=training)
    analytic = {key: grad.copy() for key, grad in analytic.items()}
    pick = make_rng(seed, "gradcheck-coordinates")

    def central(values: np.ndarray, index: int, h: float) -> float:
        original = values.flat[index]
        values.flat[index] = original + h
        upper = evaluate()
        values.flat[index] = original - h
        lower = evaluate()
        values.flat[index] = original
        return (upper - lower) / (2 * h)

    errors = {}
    for key, layer, name in model.named_parameters(trainable_only=True):
        values = layer.params[name]
        size = values.size
        coordinates = np.arange(size) if size <= max_coordinates else np.sort(pick.choice(size, max_coordinates, replace=False))
        numeric = np.empty(coordinates.size)
        for j, index in enumerate(coordinates):
            coarse = central(values, index, step)
            fine = central(values, index, step / 10)
            if abs(coarse - fine) > KINK_TOLERANCE * max(abs(coarse), abs(fine)) + 1e-9:
                coarse = central(values, index, step / 100)
            numeric[j] = coarse
        exact = analytic[key].flat[coordinates]
        scale = max(np.linalg.norm(exact) + np.linalg.norm(numeric), NORM_FLOOR)
        errors[key] = float(np.linalg.norm(exact - numeric) / scale)
    _restore_state(model, snapshot)
    worst = max(errors, key=errors.get) if errors else None
    logger.debug("gradient check worst tensor %s: %.3e", worst, errors.get(worst, 0.0))
    return errors
