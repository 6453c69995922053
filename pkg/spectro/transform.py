"""
Short-time Fourier analysis and weighted overlap-add synthesis.

Frames are ``window_length`` samples long, windowed, and zero-padded to
``fft_size`` before the real FFT. With ``padding="cola"`` the signal is first
padded by ``window_length - hop_length`` zeros on both sides (and up to a
whole hop at the end), so every source sample sits under full overlap and
``istft(stft(x))`` reproduces ``x``.
"""
from dataclasses import dataclass
from typing import Literal

import librosa
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import check_COLA, get_window

from errors import ArgumentError, ConfigurationError
from synthgen.waveforms import Waveform


class StftConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    window_length: int = Field(default=256, gt=0)
    hop_length: int = Field(default=64, gt=0)
    fft_size: int = Field(default=256, gt=0)
    window_kind: str = "hann"
    padding: Literal["cola", "none"] = "cola"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.hop_length <= self.window_length <= self.fft_size:
            raise ValueError(
                f"need hop_length <= window_length <= fft_size, got "
                f"{self.hop_length}, {self.window_length}, {self.fft_size}"
            )
        get_window(self.window_kind, self.window_length, fftbins=True)
        return self

    @property
    def window(self) -> np.ndarray:
        """Periodic (DFT-even) window of ``window_length`` samples."""
        return get_window(self.window_kind, self.window_length, fftbins=True).astype(np.float64)

    @property
    def freq_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def is_cola(self) -> bool:
        return bool(check_COLA(self.window, self.window_length, self.window_length - self.hop_length))

    @property
    def edge_padding(self) -> int:
        return self.window_length - self.hop_length if self.padding == "cola" else 0

    def padded_length(self, length: int) -> int:
        if self.padding == "none":
            return length
        total = length + 2 * self.edge_padding
        return total + (-(total - self.window_length)) % self.hop_length

    def frame_count(self, length: int) -> int:
        return 1 + (self.padded_length(length) - self.window_length) // self.hop_length


@dataclass(frozen=True)
class Spectrogram:
    magnitude: np.ndarray  # [freq_bins, frames], nonnegative
    phase: np.ndarray  # radians, same shape
    config: StftConfig
    source_length: int
    sample_rate: float

    def __post_init__(self):
        magnitude = np.asarray(self.magnitude, dtype=np.float64)
        phase = np.asarray(self.phase, dtype=np.float64)
        if magnitude.shape != phase.shape or magnitude.ndim != 2:
            raise ArgumentError(f"magnitude {magnitude.shape} and phase {phase.shape} must be equal 2-D shapes")
        if magnitude.shape[0] != self.config.freq_bins:
            raise ArgumentError(f"expected {self.config.freq_bins} frequency bins, got {magnitude.shape[0]}")
        if not (np.all(np.isfinite(magnitude)) and np.all(np.isfinite(phase))):
            raise ArgumentError("spectrogram contains non-finite values")
        if np.any(magnitude < 0):
            raise ArgumentError("spectrogram magnitude must be nonnegative")
        object.__setattr__(self, "magnitude", magnitude)
        object.__setattr__(self, "phase", phase)

    @property
    def frames(self) -> int:
        return self.magnitude.shape[1]

    def complex(self) -> np.ndarray:
        return self.magnitude * np.exp(1j * self.phase)


def stft(w: Waveform, cfg: StftConfig) -> Spectrogram:
    """Magnitude and phase of the windowed DFT frames of ``w``."""
    if len(w) < cfg.window_length:
        raise ArgumentError(f"waveform of {len(w)} samples is shorter than the {cfg.window_length}-sample window")
    x = w.samples
    if cfg.padding == "cola":
        pad = cfg.edge_padding
        x = np.pad(x, (pad, cfg.padded_length(len(w)) - len(w) - pad))
    frames = librosa.util.frame(np.ascontiguousarray(x), frame_length=cfg.window_length, hop_length=cfg.hop_length)
    spectrum = np.fft.rfft(frames * cfg.window[:, None], n=cfg.fft_size, axis=0)
    return Spectrogram(np.abs(spectrum), np.angle(spectrum), cfg, len(w), w.sample_rate)


def istft(s: Spectrogram) -> Waveform:
    """Weighted overlap-add inverse, trimmed back to the source length."""
    cfg = s.config
    if not cfg.is_cola:
        raise ConfigurationError(
            f"{cfg.window_kind} window of {cfg.window_length} with hop {cfg.hop_length} "
            f"violates the constant-overlap-add condition"
        )
    win, n_fft = cfg.window_length, cfg.fft_size
    # librosa centres the window inside each fft_size frame, ours starts at sample 0
    shift = (n_fft - win) // 2
    spectrum = s.complex()
    if shift:
        spectrum = spectrum * np.exp(-2j * np.pi * np.arange(cfg.freq_bins) * shift / n_fft)[:, None]
    y = librosa.istft(
        spectrum,
        hop_length=cfg.hop_length,
        win_length=win,
        n_fft=n_fft,
        window=cfg.window,
        center=False,
        length=shift + cfg.padded_length(s.source_length),
    )
    start = shift + cfg.edge_padding
    return Waveform(y[start:start + s.source_length], s.sample_rate)
