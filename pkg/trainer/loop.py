"""
Alternating AE / discriminator training for all K components.
"""
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field

import config
from errors import ArgumentError, ConfigurationError, NumericError
from evaluation.metrics import mean_relative_error
from losses import Batch, ae_objective, disc_objective, disc_objective_cross
from model import CassModel, Mode, separate
from trainer.checkpoints import TrainingState, checkpoint_save
from trainer.data import SpectralData, SpectralSplit

logger = logging.getLogger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
LOG_COLUMNS = ["epoch", "component", "test_l2", "ae_loss", "disc_loss", "seconds"]


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lr_ae: float = Field(default=1e-5, gt=0)
    lr_disc: float = Field(default=1e-6, gt=0)
    batch_size: int = Field(default=50, ge=1)
    epochs: int = Field(default=500, ge=0)
    seed: int = 0
    mode: Literal["baseline", "cass", "cass_cross"] = "cass"
    eval_every: int = Field(default=1, ge=1)
    checkpoint_every: int = Field(default=0, ge=0)  # 0 = only at the end
    eval_batch_size: int = Field(default_factory=lambda: config.EVAL_BATCH, ge=1)
    # >1 runs the K per-component updates of each minibatch on a thread pool
    component_workers: int = Field(default=1, ge=1)


@dataclass
class EpochLog:
    epoch: int
    test_l2: list[float] | None
    ae_loss: list[float]
    disc_loss: list[float] | None
    seconds: float = 0.0

    def same_as(self, other: "EpochLog") -> bool:
        """Equality ignoring wall time."""
        return (self.epoch, self.test_l2, self.ae_loss, self.disc_loss) == (
            other.epoch, other.test_l2, other.ae_loss, other.disc_loss
        )

    def rows(self) -> list[dict]:
        return [
            {
                "epoch": self.epoch,
                "component": i,
                "test_l2": None if self.test_l2 is None else self.test_l2[i],
                "ae_loss": self.ae_loss[i],
                "disc_loss": None if self.disc_loss is None else self.disc_loss[i],
                "seconds": self.seconds,
            }
            for i in range(len(self.ae_loss))
        ]


@dataclass
class TrainResult:
    model: CassModel
    logs: list[EpochLog] = field(default_factory=list)


# ----- EpochLog CSV -----

def _cell(value) -> str:
    return "" if value is None else repr(value)


def append_epoch_log(path: Path, log: EpochLog) -> None:
    path = Path(path)
    new = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(LOG_COLUMNS)
        for row in log.rows():
            writer.writerow([_cell(row[c]) for c in LOG_COLUMNS])


def write_epoch_logs(path: Path, logs: Iterable[EpochLog]) -> Path:
    path = Path(path)
    if path.exists():
        path.unlink()
    for log in logs:
        append_epoch_log(path, log)
    return path


def read_epoch_logs(path: Path) -> list[EpochLog]:
    by_epoch: dict[int, dict[int, dict]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            by_epoch.setdefault(int(row["epoch"]), {})[int(row["component"])] = row

    def column(rows, name):
        values = [rows[i][name] for i in sorted(rows)]
        return None if any(v == "" for v in values) else [float(v) for v in values]

    logs = []
    for epoch in sorted(by_epoch):
        rows = by_epoch[epoch]
        first = rows[min(rows)]
        logs.append(EpochLog(
            epoch=epoch,
            test_l2=column(rows, "test_l2"),
            ae_loss=column(rows, "ae_loss"),
            disc_loss=column(rows, "disc_loss"),
            seconds=float(first["seconds"]),
        ))
    return logs


# ----- Steps -----

def make_optimizer(params, lr: float) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=lr, betas=ADAM_BETAS, eps=ADAM_EPS)


def update_step(params: list[torch.nn.Parameter], grads: Iterable[torch.Tensor], optimizer: torch.optim.Optimizer) -> None:
    """One adaptive-moment step of ``optimizer`` using externally computed gradients."""
    grads = list(grads)
    if len(grads) != len(params):
        raise ArgumentError(f"{len(grads)} gradients for {len(params)} parameters")
    for p, g in zip(params, grads):
        if g.shape != p.shape:
            raise ArgumentError(f"gradient shape {tuple(g.shape)} does not match parameter {tuple(p.shape)}")
        p.grad = g.detach().clone()
    optimizer.step()
    for p in params:
        p.grad = None


def _check_finite(loss: torch.Tensor, epoch: int, batch: int, what: str) -> float:
    value = float(loss)
    if not math.isfinite(value):
        raise NumericError(f"non-finite {what} loss ({value}) at epoch {epoch}, batch {batch}")
    return value


# ----- Evaluation -----

def evaluate_epoch(model: CassModel, split: SpectralSplit, batch_size: int | None = None) -> list[float]:
    """Mean relative L2 error of AE_i(X) against X_i over the split, per component.

    Records where X_i is silent are skipped (see ``mean_relative_error``).
    """
    if len(split) == 0:
        raise ArgumentError("test split is empty")
    preds = separate(model, split.mixture, batch_size).cpu().double().numpy()
    targets = split.targets.cpu().double().numpy()
    return [
        mean_relative_error(zip(preds[:, i], targets[:, i]), 2, label=f"component {i}")
        for i in range(model.k)
    ]


# ----- Training -----

def train(
    model: CassModel,
    data: SpectralData,
    cfg: TrainConfig,
    state: TrainingState | None = None,
    checkpoint_dir: Path | None = None,
    log_path: Path | None = None,
) -> TrainResult:
    if Mode(cfg.mode) != model.mode:
        raise ConfigurationError(f"train config mode {cfg.mode} does not match model mode {model.mode.value}")
    if data.k != model.k:
        raise ArgumentError(f"data has {data.k} components, model has {model.k}")
    if tuple(data.input_shape) != tuple(model.spec.input_shape):
        raise ArgumentError(f"data spectrograms are {data.input_shape}, model expects {model.spec.input_shape}")

    device = torch.device(config.DEVICE)
    model.to(device)
    dtype = next(model.parameters()).dtype
    train_split = SpectralSplit(data.train.mixture.to(device, dtype), data.train.targets.to(device, dtype))
    test_split = SpectralSplit(data.test.mixture.to(device, dtype), data.test.targets.to(device, dtype))

    adversarial = model.mode != Mode.BASELINE
    cross = model.mode == Mode.CASS_CROSS
    cross_active = cross and any(
        w != 0 for i in range(model.k) for w in model.loss_weights.cross_weights_for(i, model.k).values()
    )
    ae_opts = [make_optimizer(c.ae_parameters(), cfg.lr_ae) for c in model.components]
    disc_opts = [make_optimizer(c.disc_parameters(), cfg.lr_disc) if adversarial else None for c in model.components]
    generator = torch.Generator().manual_seed(cfg.seed)

    start_epoch = 0
    if state is not None:
        start_epoch = state.epoch
        for opt, saved in zip(ae_opts, state.ae_optimizers):
            opt.load_state_dict(saved)
        for opt, saved in zip(disc_opts, state.disc_optimizers):
            if opt is not None and saved is not None:
                opt.load_state_dict(saved)
        if state.generator is not None:
            generator.set_state(state.generator)
        logger.info(f"Resuming {model.mode.value} training after epoch {start_epoch}")

    def snapshot(epoch: int) -> TrainingState:
        return TrainingState(
            epoch=epoch,
            ae_optimizers=[o.state_dict() for o in ae_opts],
            disc_optimizers=[o.state_dict() if o is not None else None for o in disc_opts],
            generator=generator.get_state(),
        )

    def component_step(i: int, batch: Batch, cross_outputs: torch.Tensor | None, epoch: int, b: int):
        """AE_i then D_i update; touches no other component's parameters."""
        obj = ae_objective(model, i, batch)
        ae_value = _check_finite(obj.loss, epoch, b, f"ae[{i}]")
        update_step(obj.params, obj.grads, ae_opts[i])
        if not adversarial:
            return ae_value, 0.0
        if cross:
            obj = disc_objective_cross(model, i, batch, cross_outputs=cross_outputs)
        else:
            obj = disc_objective(model, i, batch)
        disc_value = _check_finite(obj.loss, epoch, b, f"discriminator[{i}]")
        update_step(obj.params, obj.grads, disc_opts[i])
        return ae_value, disc_value

    n = len(train_split)
    result = TrainResult(model)
    model.train()
    workers = min(cfg.component_workers, model.k)
    if workers > 1:
        logger.info(f"Updating {model.k} components on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext() as pool:
        for epoch in range(start_epoch + 1, cfg.epochs + 1):
            started = time.perf_counter()
            ae_sums = [0.0] * model.k
            disc_sums = [0.0] * model.k
            batches = 0
            order = torch.randperm(n, generator=generator).to(device)
            for b, first in enumerate(range(0, n, cfg.batch_size)):
                idx = order[first:first + cfg.batch_size]
                batch = Batch(train_split.mixture[idx], train_split.targets[idx])
                # AE_j outputs at the start of the minibatch feed every cross term
                cross_outputs = separate(model, batch.mixture, cfg.eval_batch_size) if cross_active else None
                step = partial(component_step, batch=batch, cross_outputs=cross_outputs, epoch=epoch, b=b)
                values = list(pool.map(step, range(model.k))) if pool is not None else [step(i) for i in range(model.k)]
                for i, (ae_value, disc_value) in enumerate(values):
                    ae_sums[i] += ae_value
                    disc_sums[i] += disc_value
                batches += 1

            test_l2 = None
            if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
                test_l2 = evaluate_epoch(model, test_split, cfg.eval_batch_size)
            log = EpochLog(
                epoch=epoch,
                test_l2=test_l2,
                ae_loss=[s / batches for s in ae_sums],
                disc_loss=[s / batches for s in disc_sums] if adversarial else None,
                seconds=time.perf_counter() - started,
            )
            result.logs.append(log)
            if log_path is not None:
                append_epoch_log(log_path, log)

            l2_text = "-" if test_l2 is None else ", ".join(f"{e:.5f}" for e in test_l2)
            disc_text = "-" if log.disc_loss is None else f"{np.mean(log.disc_loss):.5f}"
            logger.info(
                f"Epoch {epoch}/{cfg.epochs}: test_l2=[{l2_text}] ae={np.mean(log.ae_loss):.5f} "
                f"disc={disc_text} ({log.seconds:.1f}s)"
            )

            if checkpoint_dir is not None and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
                checkpoint_save(model, checkpoint_dir, snapshot(epoch))

    if checkpoint_dir is not None:
        checkpoint_save(model, checkpoint_dir, snapshot(max(cfg.epochs, start_epoch)))
    return result
