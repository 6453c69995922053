"""
Model-ready spectral records: normalized magnitudes in, waveforms out.
Networks only see magnitudes; reconstruction borrows the mixture phase.
"""
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from errors import ArgumentError
from spectro.transform import Spectrogram, StftConfig, istft, stft
from synthgen.waveforms import MixtureExample, Waveform


class NormalizationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["peak", "none"] = "peak"
    scope: Literal["dataset", "example"] = "dataset"


@dataclass(frozen=True)
class NormalizationState:
    scale: float = 1.0

    def normalize(self, magnitude: np.ndarray) -> np.ndarray:
        return magnitude / self.scale

    def denormalize(self, magnitude: np.ndarray) -> np.ndarray:
        return magnitude * self.scale


@dataclass(frozen=True)
class SpectralRecord:
    mixture: np.ndarray  # normalized magnitude [F, T]
    components: np.ndarray  # normalized magnitudes [K, F, T]
    mixture_phase: np.ndarray
    state: NormalizationState
    config: StftConfig
    example: MixtureExample

    @property
    def source_length(self) -> int:
        return len(self.example.mixture)

    @property
    def sample_rate(self) -> float:
        return self.example.sample_rate


def fit_normalization(
    examples: Sequence[MixtureExample], cfg: StftConfig, spec: NormalizationSpec,
) -> NormalizationState:
    """Single pass over the mixtures; the peak magnitude becomes the scale."""
    if spec.kind == "none":
        return NormalizationState(1.0)
    peak = 0.0
    for example in examples:
        peak = max(peak, float(stft(example.mixture, cfg).magnitude.max()))
    return NormalizationState(peak if peak > 0 else 1.0)


def preprocess(
    example: MixtureExample,
    cfg: StftConfig,
    norm: NormalizationSpec,
    state: NormalizationState | None = None,
) -> SpectralRecord:
    """STFT the mixture and components; without a fitted state, normalize by this example alone."""
    mixture = stft(example.mixture, cfg)
    components = [stft(c, cfg).magnitude for c in example.components]
    if state is None:
        state = fit_normalization([example], cfg, norm)
    return SpectralRecord(
        mixture=state.normalize(mixture.magnitude),
        components=state.normalize(np.stack(components)),
        mixture_phase=mixture.phase,
        state=state,
        config=cfg,
        example=example,
    )


def postprocess(
    component_magnitude: np.ndarray,
    mixture_phase: np.ndarray,
    cfg: StftConfig,
    state: NormalizationState,
    source_length: int,
    sample_rate: float,
) -> Waveform:
    magnitude = np.asarray(component_magnitude, dtype=np.float64)
    phase = np.asarray(mixture_phase, dtype=np.float64)
    if magnitude.shape != phase.shape:
        raise ArgumentError(f"magnitude {magnitude.shape} does not match phase {phase.shape}")
    magnitude = np.maximum(state.denormalize(magnitude), 0.0)
    return istft(Spectrogram(magnitude, phase, cfg, source_length, sample_rate))


def reconstruct_record(record: SpectralRecord, magnitudes: np.ndarray) -> list[Waveform]:
    """Invert K normalized component magnitudes with the record's mixture phase."""
    return [
        postprocess(m, record.mixture_phase, record.config, record.state, record.source_length, record.sample_rate)
        for m in magnitudes
    ]
