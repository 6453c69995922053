"""
Sampled signals and the template generators behind the synthetic corpora:
ECG beat trains, respiratory drift, PPG heartbeat/respiratory pairs and
harmonic instrument tones.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from errors import ArgumentError

# (offset from R peak [s at a 1 s period], width [s], relative height); P and T scale with sqrt(period)
ECG_TEMPLATE = (
    ("P", -0.16, 0.025, 0.12),
    ("QRS", 0.0, 0.012, 1.0),
    ("T", 0.26, 0.045, 0.28),
)

# Systolic peak and dicrotic wave of a resting PPG pulse, same convention as above
PPG_TEMPLATE = (
    ("systolic", 0.0, 0.09, 1.0),
    ("dicrotic", 0.30, 0.12, 0.45),
)


@dataclass(frozen=True)
class Waveform:
    """A sampled 1-D signal."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ArgumentError(f"waveform must be 1-D with at least one sample, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ArgumentError("waveform contains non-finite samples")
        if not self.sample_rate > 0:
            raise ArgumentError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def scaled(self, factor: float) -> "Waveform":
        return Waveform(self.samples * factor, self.sample_rate)

    def segment(self, start: int, length: int) -> "Waveform":
        return Waveform(self.samples[start:start + length], self.sample_rate)


@dataclass(frozen=True)
class MixtureExample:
    """One record: the observed mixture and its K ground-truth components."""

    mixture: Waveform
    components: tuple[Waveform, ...]
    names: tuple[str, ...] = ()
    noise: Waveform | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        components = tuple(self.components)
        if len(components) < 2:
            raise ArgumentError(f"a mixture needs at least 2 components, got {len(components)}")
        _check_compatible([self.mixture, *components] + ([self.noise] if self.noise is not None else []))
        names = tuple(self.names) or tuple(f"component{i}" for i in range(len(components)))
        if len(names) != len(components):
            raise ArgumentError(f"{len(names)} names given for {len(components)} components")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "names", names)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def sample_rate(self) -> float:
        return self.mixture.sample_rate

    def residual(self) -> np.ndarray:
        """mixture − Σ components − noise; zero for synthetic records."""
        rest = self.mixture.samples - np.sum([c.samples for c in self.components], axis=0)
        if self.noise is not None:
            rest = rest - self.noise.samples
        return rest


def _check_compatible(waves: Sequence[Waveform]) -> None:
    first = waves[0]
    for w in waves[1:]:
        if len(w) != len(first):
            raise ArgumentError(f"waveform lengths differ: {len(first)} vs {len(w)}")
        if w.sample_rate != first.sample_rate:
            raise ArgumentError(f"sample rates differ: {first.sample_rate} vs {w.sample_rate}")


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ArgumentError(f"{name} must be positive, got {value}")


def _sample_count(duration: float, sample_rate: float) -> int:
    n = int(round(duration * sample_rate))
    if n < 1:
        raise ArgumentError(f"duration {duration} s at {sample_rate} Hz yields no samples")
    return n


def _pulse_train(
    template, period: float, first_peak: float, n: int, sample_rate: float, shape_scale: float,
) -> np.ndarray:
    t = np.arange(n) / sample_rate
    duration = n / sample_rate
    beats = np.arange(-1, math.ceil((duration - first_peak) / period) + 2)
    centers = first_peak + period * beats
    signal = np.zeros(n)
    for name, offset, width, height in template:
        if name == "QRS":
            mu, sigma = centers, width
        else:
            mu, sigma = centers + offset * shape_scale, width * shape_scale
        z = (t[:, None] - mu[None, :]) / sigma
        signal += height * np.exp(-0.5 * z * z).sum(axis=1)
    return signal


def gen_ecg_beat_train(
    bpm: float, duration: float, sample_rate: float, amplitude: float, seed: int,
) -> Waveform:
    """Periodic P-QRS-T beat train with R peaks of height ``amplitude``.

    The seed only fixes where the first R peak falls, somewhere in the middle
    half of the first period.
    """
    _check_positive(bpm=bpm, duration=duration, sample_rate=sample_rate)
    n = _sample_count(duration, sample_rate)
    period = 60.0 / bpm
    rng = np.random.default_rng(seed)
    first_peak = rng.uniform(0.25, 0.75) * period
    train = _pulse_train(ECG_TEMPLATE, period, first_peak, n, sample_rate, math.sqrt(period))
    return Waveform(amplitude * train, sample_rate)


def gen_respiratory_noise(freq: float, amplitude: float, duration: float, sample_rate: float) -> Waveform:
    _check_positive(freq=freq, duration=duration, sample_rate=sample_rate)
    n = _sample_count(duration, sample_rate)
    t = np.arange(n) / sample_rate
    return Waveform(amplitude * np.sin(2 * np.pi * freq * t), sample_rate)


def gen_ppg_pair(
    heart_bpm: float, resp_freq: float, duration: float, sample_rate: float, seed: int,
) -> tuple[Waveform, Waveform]:
    """Resting PPG split into its heartbeat pulse train and respiratory wave.

    The heartbeat part is zero-mean (the AC component of the pulse); the
    respiratory part is a sinusoid with a weaker second harmonic.
    """
    _check_positive(heart_bpm=heart_bpm, resp_freq=resp_freq, duration=duration, sample_rate=sample_rate)
    n = _sample_count(duration, sample_rate)
    rng = np.random.default_rng(seed)
    period = 60.0 / heart_bpm
    first_peak = rng.uniform(0.0, period)
    phase, phase2 = rng.uniform(0.0, 2 * np.pi, size=2)

    pulses = _pulse_train(PPG_TEMPLATE, period, first_peak, n, sample_rate, math.sqrt(period))
    heartbeat = pulses - pulses.mean()

    t = np.arange(n) / sample_rate
    respiratory = np.sin(2 * np.pi * resp_freq * t + phase) + 0.25 * np.sin(4 * np.pi * resp_freq * t + phase2)
    return Waveform(heartbeat, sample_rate), Waveform(respiratory, sample_rate)


def gen_harmonic_tone(fundamental: float, n_harmonics: int, duration: float, sample_rate: float) -> Waveform:
    """Sum of harmonics with 1/h amplitudes; harmonics at or above Nyquist are left out."""
    _check_positive(fundamental=fundamental, duration=duration, sample_rate=sample_rate)
    if int(n_harmonics) != n_harmonics or n_harmonics < 1:
        raise ArgumentError(f"n_harmonics must be a positive integer, got {n_harmonics}")
    nyquist = sample_rate / 2
    if fundamental >= nyquist:
        raise ArgumentError(f"fundamental {fundamental} Hz is not below Nyquist ({nyquist} Hz)")
    n = _sample_count(duration, sample_rate)
    t = np.arange(n) / sample_rate
    tone = np.zeros(n)
    for h in range(1, int(n_harmonics) + 1):
        if h * fundamental >= nyquist:
            break
        tone += np.sin(2 * np.pi * h * fundamental * t) / h
    return Waveform(tone, sample_rate)


def mix(components: Sequence[Waveform], noise: Waveform | None = None) -> Waveform:
    """Additive mixture: elementwise sum of the components (and noise, if any)."""
    if not components:
        raise ArgumentError("mix needs at least one component")
    waves = list(components) + ([noise] if noise is not None else [])
    _check_compatible(waves)
    total = waves[0].samples.copy()
    for w in waves[1:]:
        total = total + w.samples
    return Waveform(total, waves[0].sample_rate)
