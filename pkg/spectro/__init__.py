"""
STFT analysis/synthesis and the spectrogram features the networks train on.
"""
from spectro.features import (
    NormalizationSpec,
    NormalizationState,
    SpectralRecord,
    fit_normalization,
    postprocess,
    preprocess,
    reconstruct_record,
)
from spectro.transform import Spectrogram, StftConfig, istft, stft

__all__ = [
    "NormalizationSpec",
    "NormalizationState",
    "SpectralRecord",
    "Spectrogram",
    "StftConfig",
    "fit_normalization",
    "istft",
    "postprocess",
    "preprocess",
    "reconstruct_record",
    "stft",
]
