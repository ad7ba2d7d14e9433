import json
import logging
import os
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from ddos_analysis.exceptions import PipelineError
from ddos_analysis.nn.models import Model, ModelSpec
from ddos_analysis.nn.training import TrainConfig, TrainedModel
from ddos_analysis.utils.files import atomic_write

logger = logging.getLogger(__name__)

MAGIC = b"DDOSCKPT"
BLOB_DTYPE = np.dtype("<f8")


def _tensors(model: Model):
    for index, layer in enumerate(model.layers):
        for name in layer.params:
            yield f"{index}.{name}", layer.params[name]
        for name, value in layer.state().items():
            yield f"{index}.{name}", value


def save_checkpoint(trained: TrainedModel, path: Union[str, os.PathLike]) -> Path:
    """
    Write a trained model as a JSON header followed by a little-endian float64 blob.

    The file starts with ``DDOSCKPT``, the header length as a little-endian
    uint64 and the UTF-8 header. The header records the model spec, training
    settings, class weights, history and the name and shape of every tensor
    (parameters and batch-normalization running statistics) in blob order.
    """
    path = Path(path)
    tensors = list(_tensors(trained.model))
    header = {
        "spec": trained.spec.to_dict(),
        "seed": trained.model.seed,
        "config": trained.config.to_dict(),
        "weights": list(trained.weights),
        "initial_bias": trained.initial_bias,
        "history": trained.history.to_dict(orient="list"),
        "autoencoder_loss": list(trained.autoencoder_loss),
        "tensors": [{"name": name, "shape": list(value.shape)} for name, value in tensors],
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    with atomic_write(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(np.array([len(encoded)], dtype="<u8").tobytes())
        handle.write(encoded)
        for _, value in tensors:
            handle.write(np.ascontiguousarray(value, dtype=BLOB_DTYPE).tobytes())
    logger.debug("wrote checkpoint %s with %d tensors", path, len(tensors))
    return path


def load_checkpoint(path: Union[str, os.PathLike]) -> TrainedModel:
    """
    Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        PipelineError: not a checkpoint, truncated blob or tensor shapes that do not match the model spec.
    """
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise PipelineError(f"{path} is not a model checkpoint")
    offset = len(MAGIC)
    length = int(np.frombuffer(data, dtype="<u8", count=1, offset=offset)[0])
    offset += 8
    header = json.loads(data[offset : offset + length].decode("utf-8"))
    offset += length

    spec = ModelSpec.from_dict(header["spec"])
    model = Model(spec, seed=header["seed"])
    targets = dict(_tensors(model))
    for entry in header["tensors"]:
        name, shape = entry["name"], tuple(entry["shape"])
        count = int(np.prod(shape))
        if name not in targets or targets[name].shape != shape:
            raise PipelineError(f"{path}: tensor {name} {shape} does not fit the model")
        if offset + count * BLOB_DTYPE.itemsize > len(data):
            raise PipelineError(f"{path}: truncated parameter blob")
        values = np.frombuffer(data, dtype=BLOB_DTYPE, count=count, offset=offset).reshape(shape)
        targets[name][...] = values
        offset += count * BLOB_DTYPE.itemsize

    config = header["config"]
    if config.get("class_weights") is not None:
        config["class_weights"] = tuple(config["class_weights"])
    return TrainedModel(
        model=model,
        config=TrainConfig(**config),
        weights=tuple(header["weights"]),
        initial_bias=header["initial_bias"],
        history=pd.DataFrame(header["history"]),
        autoencoder_loss=list(header["autoencoder_loss"]),
    )
