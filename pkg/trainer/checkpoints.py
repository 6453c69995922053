"""
Checkpoint directories.

    manifest.txt        mode, K, names, network spec, loss weights, epoch,
                        tensor names/shapes and file hashes (key=value)
    component_<i>.npz   parameters of component i (encoder, decoder, discriminator)
    state.pt            optimizer states and the shuffling generator (resume only)
"""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from pydantic import ValidationError

from errors import CheckpointError, DataError
from losses import LossWeights
from model import CassModel, NetworkSpec, build_model
from storage import dump_kv, load_arrays, load_kv, save_arrays, sha256_file

logger = logging.getLogger(__name__)

FORMAT = "cass-checkpoint"
FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.txt"
STATE_NAME = "state.pt"


@dataclass
class TrainingState:
    epoch: int = 0
    ae_optimizers: list[dict] = field(default_factory=list)
    disc_optimizers: list[dict | None] = field(default_factory=list)
    generator: torch.Tensor | None = None


def _dtype_code(model: CassModel) -> str:
    dtype = next(model.parameters()).dtype
    return "<f8" if dtype == torch.float64 else "<f4"


def checkpoint_save(model: CassModel, path: Path, state: TrainingState | None = None) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    dtype = _dtype_code(model)
    tensors, hashes = {}, {}
    for i, component in enumerate(model.components):
        arrays = {name: p.detach().cpu().numpy() for name, p in component.named_parameters()}
        file = save_arrays(path / f"component_{i}.npz", arrays, dtype=dtype)
        tensors[f"component_{i}"] = [[name, list(a.shape)] for name, a in arrays.items()]
        hashes[f"component_{i}"] = sha256_file(file)

    if state is not None:
        tmp = path / f"{STATE_NAME}.tmp"
        torch.save(
            {
                "epoch": state.epoch,
                "ae": state.ae_optimizers,
                "disc": state.disc_optimizers,
                "generator": state.generator,
            },
            tmp,
        )
        os.replace(tmp, path / STATE_NAME)
        hashes["state"] = sha256_file(path / STATE_NAME)

    manifest = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "mode": model.mode.value,
        "k": model.k,
        "names": model.names,
        "dtype": dtype,
        "epoch": state.epoch if state is not None else None,
        "spec": model.spec.model_dump(),
        "weights": model.loss_weights.model_dump(),
        "tensors": tensors,
        "sha256": hashes,
    }
    # manifest last, so a half-written checkpoint never looks complete
    tmp = path / f"{MANIFEST_NAME}.tmp"
    dump_kv(manifest, tmp, header="CASS checkpoint")
    os.replace(tmp, path / MANIFEST_NAME)
    logger.info(f"Checkpoint saved: {path}")
    return path


def _read_manifest(path: Path) -> dict:
    try:
        manifest = load_kv(path / MANIFEST_NAME)
    except DataError as e:
        raise CheckpointError(f"no checkpoint at {path}: {e}") from e
    if manifest.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a checkpoint directory")
    return manifest


def _verify(path: Path, manifest: dict, key: str, file: Path) -> None:
    expected = manifest.get("sha256", {}).get(key)
    if not file.is_file():
        raise CheckpointError(f"missing checkpoint file {file}")
    if expected is not None and sha256_file(file) != expected:
        raise CheckpointError(f"checkpoint file {file} does not match its manifest hash")


def checkpoint_load(path: Path) -> CassModel:
    """Rebuild the model from a checkpoint directory; parameters are restored bit for bit."""
    path = Path(path)
    manifest = _read_manifest(path)
    try:
        spec = NetworkSpec(**manifest["spec"])
        weights = LossWeights(**manifest.get("weights", {}))
        k = int(manifest["k"])
        model = build_model(spec, k, manifest["mode"], weights, seed=0, names=manifest.get("names"))
    except (KeyError, TypeError, ValidationError) as e:
        raise CheckpointError(f"checkpoint manifest at {path} is incomplete: {e}") from e

    if manifest.get("dtype") == "<f8":
        model = model.double()
    for i, component in enumerate(model.components):
        file = path / f"component_{i}.npz"
        _verify(path, manifest, f"component_{i}", file)
        try:
            arrays = load_arrays(file)
        except DataError as e:
            raise CheckpointError(str(e)) from e
        params = dict(component.named_parameters())
        if set(arrays) != set(params):
            raise CheckpointError(f"{file} holds {sorted(set(arrays) ^ set(params))} unexpectedly")
        with torch.no_grad():
            for name, p in params.items():
                value = arrays[name]
                if tuple(value.shape) != tuple(p.shape):
                    raise CheckpointError(f"{file}: {name} has shape {value.shape}, expected {tuple(p.shape)}")
                p.copy_(torch.from_numpy(np.ascontiguousarray(value)))
    return model


def checkpoint_epoch(path: Path) -> int:
    return int(_read_manifest(Path(path)).get("epoch") or 0)


def load_training_state(path: Path) -> TrainingState:
    path = Path(path)
    manifest = _read_manifest(path)
    file = path / STATE_NAME
    _verify(path, manifest, "state", file)
    try:
        raw = torch.load(file, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointError(f"cannot read training state {file}: {e}") from e
    return TrainingState(
        epoch=int(raw["epoch"]),
        ae_optimizers=list(raw["ae"]),
        disc_optimizers=list(raw["disc"]),
        generator=raw["generator"],
    )
