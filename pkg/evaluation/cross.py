"""
How each discriminator judges the other components' AE outputs.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

import config
from errors import ArgumentError, ConfigurationError, DataError
from model import CassModel, Mode, separate
from storage import load_arrays, save_arrays
from trainer.data import SpectralSplit

logger = logging.getLogger(__name__)

FAKE_THRESHOLD = 0.5


@dataclass(frozen=True)
class CrossAnalysisRecord:
    source: int  # j, whose AE produced the samples
    judge: int  # i, whose discriminator scored them
    outputs: np.ndarray  # D_i(AE_j(X)) per test sample
    threshold: float = FAKE_THRESHOLD

    @property
    def fraction_fake(self) -> float:
        return float(np.mean(self.outputs < self.threshold)) if self.outputs.size else 0.0


def judge_outputs(model: CassModel, judge: int, samples: torch.Tensor, batch_size: int | None = None) -> np.ndarray:
    """D_judge over [N, F, T] samples, in fixed-size chunks."""
    batch_size = batch_size or config.EVAL_BATCH
    component = model.component(judge)
    was_training = model.training
    model.eval()
    with torch.no_grad():
        chunks = [component.discriminate(samples[s:s + batch_size]) for s in range(0, samples.shape[0], batch_size)]
    model.train(was_training)
    return torch.cat(chunks).cpu().double().numpy()


def cross_discriminator_analysis(
    model: CassModel,
    split: SpectralSplit,
    threshold: float = FAKE_THRESHOLD,
    batch_size: int | None = None,
) -> list[CrossAnalysisRecord]:
    """One record per ordered pair j -> i (j != i), ordered by source then judge."""
    if model.mode == Mode.BASELINE:
        raise ConfigurationError("baseline models have no trained discriminators to analyse")
    if len(split) == 0:
        raise ArgumentError("test split is empty")
    outputs = separate(model, split.mixture, batch_size)
    records = []
    for j in range(model.k):
        for i in range(model.k):
            if i == j:
                continue
            scores = judge_outputs(model, i, outputs[:, j], batch_size)
            record = CrossAnalysisRecord(j, i, scores, threshold)
            logger.info(
                f"D[{model.names[i]}] on AE[{model.names[j]}]: mean={scores.mean():.4f} "
                f"fake={record.fraction_fake:.2%}"
            )
            records.append(record)
    return records


def save_cross_records(records: list[CrossAnalysisRecord], path: Path) -> Path:
    return save_arrays(path, {f"{r.source}_to_{r.judge}": r.outputs for r in records})


def load_cross_records(path: Path, threshold: float = FAKE_THRESHOLD) -> list[CrossAnalysisRecord]:
    records = []
    for key, outputs in load_arrays(path).items():
        try:
            source, judge = (int(part) for part in key.split("_to_"))
        except ValueError as e:
            raise DataError(f"unexpected entry {key!r} in {path}") from e
        records.append(CrossAnalysisRecord(source, judge, outputs, threshold))
    return sorted(records, key=lambda r: (r.source, r.judge))
