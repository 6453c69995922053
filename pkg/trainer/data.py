"""
Spectrogram tensors for training and evaluation, built from a Dataset.
"""
import logging
from dataclasses import dataclass

import numpy as np
import torch

from errors import DataError
from spectro import NormalizationSpec, NormalizationState, SpectralRecord, StftConfig, fit_normalization, preprocess
from synthgen import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralSplit:
    mixture: torch.Tensor  # [N, F, T]
    targets: torch.Tensor  # [N, K, F, T]
    records: tuple[SpectralRecord, ...] = ()

    def __len__(self) -> int:
        return self.mixture.shape[0]

    @classmethod
    def from_records(cls, records: list[SpectralRecord], dtype: torch.dtype = torch.float32) -> "SpectralSplit":
        if not records:
            raise DataError("cannot build a split from zero records")
        mixture = torch.from_numpy(np.stack([r.mixture for r in records])).to(dtype)
        targets = torch.from_numpy(np.stack([r.components for r in records])).to(dtype)
        return cls(mixture, targets, tuple(records))

    def subset(self, indices) -> "SpectralSplit":
        indices = list(indices)
        records = tuple(self.records[i] for i in indices) if self.records else ()
        return SpectralSplit(self.mixture[indices], self.targets[indices], records)

    def to(self, device) -> "SpectralSplit":
        return SpectralSplit(self.mixture.to(device), self.targets.to(device), self.records)


@dataclass(frozen=True)
class SpectralData:
    train: SpectralSplit
    test: SpectralSplit
    names: tuple[str, ...]
    state: NormalizationState | None = None

    @property
    def k(self) -> int:
        return self.train.targets.shape[1]

    @property
    def input_shape(self) -> tuple[int, int]:
        return tuple(self.train.mixture.shape[1:])


def prepare_data(
    dataset: Dataset,
    cfg: StftConfig,
    norm: NormalizationSpec,
    dtype: torch.dtype = torch.float32,
) -> SpectralData:
    """STFT every record; dataset-scope normalization is fitted on the train split only."""
    if not dataset.train or not dataset.test:
        raise DataError(f"dataset needs nonempty train and test splits, got {len(dataset.train)}/{len(dataset.test)}")
    state = None
    if norm.scope == "dataset":
        state = fit_normalization(dataset.subset("train"), cfg, norm)
        logger.info(f"Fitted {norm.kind} normalization on {len(dataset.train)} train records: scale={state.scale:.6g}")
    train = [preprocess(e, cfg, norm, state) for e in dataset.subset("train")]
    test = [preprocess(e, cfg, norm, state) for e in dataset.subset("test")]
    return SpectralData(
        train=SpectralSplit.from_records(train, dtype),
        test=SpectralSplit.from_records(test, dtype),
        names=tuple(dataset.names),
        state=state,
    )
