"""
Seeded dataset builders (ECG, PPG, harmonic stand-in, audio stems) and the
on-disk dataset layout.

Seed splitting: record ``r`` of a dataset seeded with ``s`` draws its
parameters from ``default_rng(SeedSequence(s, spawn_key=(r,)))``. Records
therefore do not depend on ``n`` or on which worker generated them.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import ArgumentError, DataError
from storage import dump_kv, load_arrays, load_kv, save_arrays, sha256_file
from synthgen.waveforms import (
    MixtureExample,
    Waveform,
    gen_ecg_beat_train,
    gen_harmonic_tone,
    gen_ppg_pair,
    gen_respiratory_noise,
    mix,
)

logger = logging.getLogger(__name__)

ECG_NAMES = ("maternal", "fetal")
PPG_NAMES = ("heartbeat", "respiratory")
HARMONIC_NAMES = ("bass", "sax")

MANIFEST_NAME = "manifest.txt"


class EcgParams(BaseModel):
    """Parameters of one synthetic abdominal ECG record."""

    model_config = ConfigDict(frozen=True)

    maternal_bpm: float = Field(ge=80, le=90)
    fetal_bpm: float = Field(ge=120, le=160)
    amplitude_ratio: float = Field(ge=2, le=10)  # maternal peak ÷ fetal peak
    noise_freq: float = Field(gt=0)
    noise_amp: float = Field(ge=0)
    duration: float = Field(default=2.0, gt=0)
    sample_rate: float = Field(default=500.0, gt=0)
    seed: int = 0


class EcgParamRanges(BaseModel):
    """Uniform sampling ranges for EcgParams; must stay inside the physiological bounds."""

    model_config = ConfigDict(frozen=True)

    maternal_bpm: tuple[float, float] = (80.0, 90.0)
    fetal_bpm: tuple[float, float] = (120.0, 160.0)
    amplitude_ratio: tuple[float, float] = (2.0, 10.0)
    noise_freq: tuple[float, float] = (0.15, 0.4)
    noise_amp_fraction: tuple[float, float] = (0.0, 0.5)  # × fetal amplitude

    @model_validator(mode="after")
    def _within_bounds(self):
        bounds = {"maternal_bpm": (80, 90), "fetal_bpm": (120, 160), "amplitude_ratio": (2, 10)}
        for name, (lo, hi) in bounds.items():
            a, b = getattr(self, name)
            if not lo <= a <= b <= hi:
                raise ValueError(f"{name} range ({a}, {b}) must lie within [{lo}, {hi}]")
        return self


def record_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _uniform(rng: np.random.Generator, bounds: Sequence[float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def sample_ecg_params(
    rng: np.random.Generator, ranges: EcgParamRanges, duration: float, sample_rate: float,
) -> EcgParams:
    ratio = _uniform(rng, ranges.amplitude_ratio)
    return EcgParams(
        maternal_bpm=_uniform(rng, ranges.maternal_bpm),
        fetal_bpm=_uniform(rng, ranges.fetal_bpm),
        amplitude_ratio=ratio,
        noise_freq=_uniform(rng, ranges.noise_freq),
        noise_amp=_uniform(rng, ranges.noise_amp_fraction) / ratio,
        duration=duration,
        sample_rate=sample_rate,
        seed=int(rng.integers(2**31 - 1)),
    )


def make_ecg_example(params: EcgParams) -> MixtureExample:
    """Maternal + fetal beat trains; respiratory noise enters the mixture only."""
    maternal_seed, fetal_seed = (int(s) for s in np.random.SeedSequence(params.seed).generate_state(2))
    maternal = gen_ecg_beat_train(params.maternal_bpm, params.duration, params.sample_rate, 1.0, maternal_seed)
    fetal = gen_ecg_beat_train(
        params.fetal_bpm, params.duration, params.sample_rate, 1.0 / params.amplitude_ratio, fetal_seed,
    )
    noise = gen_respiratory_noise(params.noise_freq, params.noise_amp, params.duration, params.sample_rate)
    return MixtureExample(
        mixture=mix([maternal, fetal], noise),
        components=(maternal, fetal),
        names=ECG_NAMES,
        noise=noise,
        meta=params.model_dump(),
    )


def _ecg_record(job: tuple) -> MixtureExample:
    seed, index, ranges, duration, sample_rate = job
    return make_ecg_example(sample_ecg_params(record_rng(seed, index), ranges, duration, sample_rate))


def _ppg_record(job: tuple) -> MixtureExample:
    seed, index, duration, sample_rate, heart_bpm, resp_freq, resp_amp = job
    rng = record_rng(seed, index)
    bpm = _uniform(rng, heart_bpm)
    freq = _uniform(rng, resp_freq)
    amp = _uniform(rng, resp_amp)
    pair_seed = int(rng.integers(2**31 - 1))
    heartbeat, respiratory = gen_ppg_pair(bpm, freq, duration, sample_rate, pair_seed)
    respiratory = respiratory.scaled(amp)
    return MixtureExample(
        mixture=mix([heartbeat, respiratory]),
        components=(heartbeat, respiratory),
        names=PPG_NAMES,
        meta={"heart_bpm": bpm, "resp_freq": freq, "resp_amp": amp, "seed": pair_seed},
    )


def _note_sequence(
    rng: np.random.Generator, n: int, sample_rate: float, notes: int, f0_range, n_harmonics: int, level: float,
) -> tuple[np.ndarray, list[float]]:
    out = np.zeros(n)
    bounds = np.linspace(0, n, notes + 1).astype(int)
    fundamentals = []
    for start, stop in zip(bounds[:-1], bounds[1:]):
        length = stop - start
        if length < 1:
            continue
        f0 = _uniform(rng, f0_range)
        fundamentals.append(f0)
        tone = gen_harmonic_tone(f0, n_harmonics, length / sample_rate, sample_rate).samples
        t = np.arange(length) / sample_rate
        envelope = np.minimum(1.0, t / 0.005) * np.exp(-t / 0.15)
        out[start:stop] = level * tone * envelope
    return out, fundamentals


def _harmonic_record(job: tuple) -> MixtureExample:
    seed, index, duration, sample_rate, notes = job
    rng = record_rng(seed, index)
    n = int(round(duration * sample_rate))
    bass, bass_f0 = _note_sequence(rng, n, sample_rate, notes, (41.0, 110.0), 8, 1.0)
    sax_level = _uniform(rng, (0.5, 1.0))
    sax, sax_f0 = _note_sequence(rng, n, sample_rate, notes, (138.0, 440.0), 5, sax_level)
    components = (Waveform(bass, sample_rate), Waveform(sax, sample_rate))
    return MixtureExample(
        mixture=mix(components),
        components=components,
        names=HARMONIC_NAMES,
        meta={"bass_f0": bass_f0, "sax_f0": sax_f0, "sax_level": sax_level},
    )


def _generate(worker: Callable[[tuple], MixtureExample], jobs: list[tuple], workers: int) -> list[MixtureExample]:
    if workers <= 1 or len(jobs) < 2:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _check_count(n: int) -> None:
    if int(n) != n or n < 1:
        raise ArgumentError(f"dataset size must be a positive integer, got {n}")


def make_ecg_dataset(
    n: int,
    seed: int,
    ranges: EcgParamRanges | None = None,
    duration: float = 2.0,
    sample_rate: float = 500.0,
    workers: int = 1,
) -> list[MixtureExample]:
    _check_count(n)
    ranges = ranges or EcgParamRanges()
    jobs = [(seed, r, ranges, duration, sample_rate) for r in range(n)]
    return _generate(_ecg_record, jobs, workers)


def make_ppg_dataset(
    n: int,
    seed: int,
    duration: float = 8.0,
    sample_rate: float = 125.0,
    heart_bpm: tuple[float, float] = (60.0, 100.0),
    resp_freq: tuple[float, float] = (0.15, 0.4),
    resp_amp: tuple[float, float] = (0.5, 1.5),
    workers: int = 1,
) -> list[MixtureExample]:
    _check_count(n)
    jobs = [(seed, r, duration, sample_rate, heart_bpm, resp_freq, resp_amp) for r in range(n)]
    return _generate(_ppg_record, jobs, workers)


def make_harmonic_dataset(
    n: int, seed: int, duration: float = 1.0, sample_rate: float = 8000.0, notes: int = 4, workers: int = 1,
) -> list[MixtureExample]:
    _check_count(n)
    jobs = [(seed, r, duration, sample_rate, notes) for r in range(n)]
    return _generate(_harmonic_record, jobs, workers)


def split(n: int, seed: int, test_fraction: float = 0.2) -> tuple[list[int], list[int]]:
    """Deterministic train/test split of record indices."""
    if not 0 <= test_fraction < 1:
        raise ArgumentError(f"test_fraction must be in [0, 1), got {test_fraction}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    order = rng.permutation(n)
    n_test = int(round(n * test_fraction)) if n > 1 else 0
    if test_fraction > 0 and n > 1:
        n_test = min(max(n_test, 1), n - 1)
    return sorted(int(i) for i in order[n_test:]), sorted(int(i) for i in order[:n_test])


# ----- Dataset directories -----


@dataclass
class Dataset:
    kind: str
    examples: list[MixtureExample]
    seed: int
    train: list[int]
    test: list[int]
    generator: dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.examples[0].k

    @property
    def names(self) -> tuple[str, ...]:
        return self.examples[0].names

    @property
    def sample_rate(self) -> float:
        return self.examples[0].sample_rate

    def subset(self, which: str) -> list[MixtureExample]:
        indices = {"train": self.train, "test": self.test}[which]
        return [self.examples[i] for i in indices]


def save_dataset(dataset: Dataset, directory: Path) -> Path:
    """Write manifest.txt plus one records/NNNNN.npz per example; returns the manifest path."""
    directory = Path(directory)
    for index, example in enumerate(dataset.examples):
        arrays = {
            "mixture": example.mixture.samples,
            "components": np.stack([c.samples for c in example.components]),
        }
        if example.noise is not None:
            arrays["noise"] = example.noise.samples
        save_arrays(directory / "records" / f"{index:05d}.npz", arrays)

    manifest = {
        "kind": dataset.kind,
        "k": dataset.k,
        "n": len(dataset.examples),
        "names": list(dataset.names),
        "sample_rate": dataset.sample_rate,
        "seed": dataset.seed,
        "split": {"train": dataset.train, "test": dataset.test},
        "generator": dataset.generator,
        "record": {f"{i:05d}": _plain(ex.meta) for i, ex in enumerate(dataset.examples)},
    }
    path = dump_kv(manifest, directory / MANIFEST_NAME, header="CASS dataset manifest")
    logger.info(f"Saved {len(dataset.examples)} {dataset.kind} records to {directory}")
    return path


def _plain(meta: dict[str, Any]) -> dict[str, Any]:
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in meta.items()}


def manifest_hash(directory: Path) -> str:
    return sha256_file(Path(directory) / MANIFEST_NAME)


def load_dataset(directory: Path) -> Dataset:
    directory = Path(directory)
    if not (directory / MANIFEST_NAME).is_file():
        raise DataError(f"no dataset found at {directory} (missing {MANIFEST_NAME})")
    manifest = load_kv(directory / MANIFEST_NAME)
    names = tuple(manifest["names"])
    sample_rate = float(manifest["sample_rate"])
    records = manifest.get("record", {})
    examples = []
    for index in range(int(manifest["n"])):
        key = f"{index:05d}"
        arrays = load_arrays(directory / "records" / f"{key}.npz")
        noise = arrays.get("noise")
        examples.append(MixtureExample(
            mixture=Waveform(arrays["mixture"], sample_rate),
            components=tuple(Waveform(row, sample_rate) for row in arrays["components"]),
            names=names,
            noise=Waveform(noise, sample_rate) if noise is not None else None,
            meta=records.get(key, {}),
        ))
    split_info = manifest.get("split", {})
    return Dataset(
        kind=manifest["kind"],
        examples=examples,
        seed=int(manifest["seed"]),
        train=list(split_info.get("train", [])),
        test=list(split_info.get("test", [])),
        generator=manifest.get("generator", {}),
    )
