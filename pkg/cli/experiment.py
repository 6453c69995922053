"""
Experiment configuration files.

One ``dotted.key=value`` per line, ``#`` comments. Values are JSON scalars
(``0.9``, ``true``, ``"text"``), bare strings (``cass_cross``) or
single-quoted JSON lists/objects (``'[16, 32, 64, 64]'``). Sections:

    dataset.*        kind, size, seed, test_fraction, duration, sample_rate,
                     workers, ranges.* (ECG), stem_paths/mixture_path/segment_length (audio)
    stft.*           window_length, hop_length, fft_size, window_kind, padding
    normalization.*  kind (peak|none), scope (dataset|example)
    network.*        latent_dim, channel_schedule, block_count, nonlinearity, discriminator_head
    train.*          lr_ae, lr_disc, batch_size, epochs, seed, mode, eval_every, checkpoint_every,
                     eval_batch_size, component_workers
    weights.*        alpha, beta, cross_weight, cross_weights.<j>, cross_matrix
    evaluation.*     domains, last_k, threshold
    output_dir       root for dataset and run directories

Missing keys take their defaults.
"""
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import ConfigurationError, UsageError
from losses import LossWeights
from model import NetworkSpec
from spectro import NormalizationSpec, StftConfig
from storage import dumps_kv, loads_kv, sha256_text
from synthgen import (
    Dataset,
    EcgParamRanges,
    ingest_audio_stems,
    make_ecg_dataset,
    make_harmonic_dataset,
    make_ppg_dataset,
    split,
)
from trainer import TrainConfig

# kind -> (duration s, sample rate Hz) when the config leaves them unset
DATASET_DEFAULTS = {"ecg": (2.0, 500.0), "ppg": (8.0, 125.0), "harmonic": (1.0, 8000.0)}
# kind -> stft frame sizes when the config sets none of them; other kinds take StftConfig's own
STFT_DEFAULTS = {
    "audio": {"window_length": 1024, "hop_length": 256, "fft_size": 1024},
    "harmonic": {"window_length": 1024, "hop_length": 256, "fft_size": 1024},
}


class DatasetConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["ecg", "ppg", "audio", "harmonic"] = "ecg"
    size: int = Field(default=100, ge=2)  # ignored for audio: stems decide the count
    seed: int = 0
    test_fraction: float = Field(default=0.2, gt=0, lt=1)
    duration: float | None = Field(default=None, gt=0)
    sample_rate: float | None = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)
    ranges: EcgParamRanges = EcgParamRanges()
    stem_paths: list[str] = Field(default_factory=list)
    mixture_path: str | None = None
    segment_length: int = Field(default=22050, ge=1)

    @model_validator(mode="after")
    def _stems(self):
        if self.kind == "audio" and len(self.stem_paths) < 2:
            raise ValueError("audio datasets need at least two dataset.stem_paths")
        return self


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    domains: tuple[Literal["spectrogram", "waveform"], ...] = ("spectrogram", "waveform")
    last_k: int = Field(default=200, ge=1)
    threshold: float = Field(default=0.5, gt=0, lt=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: DatasetConfig = DatasetConfig()
    stft: StftConfig = StftConfig()
    normalization: NormalizationSpec = NormalizationSpec()
    network: NetworkSpec = NetworkSpec()
    train: TrainConfig = Field(default_factory=TrainConfig)
    weights: LossWeights = LossWeights()
    evaluation: EvaluationConfig = EvaluationConfig()
    output_dir: str | None = None

    @model_validator(mode="before")
    @classmethod
    def _stft_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        dataset = data.get("dataset")
        kind = dataset.get("kind") if isinstance(dataset, dict) else getattr(dataset, "kind", None)
        stft = data.get("stft") or {}
        if kind not in STFT_DEFAULTS or not isinstance(stft, dict) or any(key in stft for key in STFT_DEFAULTS[kind]):
            return data
        return {**data, "stft": {**STFT_DEFAULTS[kind], **stft}}

    def with_seed(self, seed: int | None) -> "ExperimentConfig":
        """Override train.seed only; the dataset seed stays as configured."""
        if seed is None:
            return self
        return self.model_copy(update={"train": self.train.model_copy(update={"seed": seed})})


def _validated(nested: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(nested)
    except ValidationError as e:
        raise ConfigurationError(f"invalid experiment config: {e}") from e


def parse_config(text: str) -> ExperimentConfig:
    return _validated(loads_kv(text))


def load_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))


def serialize_config(cfg: ExperimentConfig) -> str:
    return dumps_kv(cfg.model_dump(mode="json"), header="CASS experiment config")


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of everything but the output location."""
    return sha256_text(serialize_config(cfg.model_copy(update={"output_dir": None})))


def dataset_hash(cfg: ExperimentConfig) -> str:
    return sha256_text(dumps_kv({"dataset": cfg.dataset.model_dump(mode="json")}))


# ----- Dataset construction -----

def build_dataset(cfg: DatasetConfig) -> Dataset:
    if cfg.kind == "audio":
        examples = ingest_audio_stems(
            [Path(p) for p in cfg.stem_paths],
            Path(cfg.mixture_path) if cfg.mixture_path else None,
            cfg.segment_length,
        )
    else:
        duration, sample_rate = DATASET_DEFAULTS[cfg.kind]
        duration = cfg.duration or duration
        sample_rate = cfg.sample_rate or sample_rate
        if cfg.kind == "ecg":
            examples = make_ecg_dataset(cfg.size, cfg.seed, cfg.ranges, duration, sample_rate, workers=cfg.workers)
        elif cfg.kind == "ppg":
            examples = make_ppg_dataset(cfg.size, cfg.seed, duration, sample_rate, workers=cfg.workers)
        else:
            examples = make_harmonic_dataset(cfg.size, cfg.seed, duration, sample_rate, workers=cfg.workers)
    train, test = split(len(examples), cfg.seed, cfg.test_fraction)
    return Dataset(
        kind=cfg.kind,
        examples=examples,
        seed=cfg.seed,
        train=train,
        test=test,
        generator=cfg.model_dump(mode="json"),
    )
