import os
import tempfile
from pathlib import Path

# point the registry and output roots at a scratch dir before config is imported
_SCRATCH = Path(tempfile.mkdtemp(prefix="cass-tests-"))
os.environ["CASS_DATA_DIR"] = str(_SCRATCH / "data")
os.environ["CASS_OUTPUT_DIR"] = str(_SCRATCH / "runs")
os.environ["DATABASE_URL"] = f"sqlite:///{_SCRATCH / 'data' / 'registry.db'}"
os.environ["CASS_DEVICE"] = "cpu"
os.environ["CASS_EVAL_BATCH"] = "64"

import numpy as np  # noqa: E402
import pytest  # noqa: E402
import torch  # noqa: E402

from losses import Batch  # noqa: E402
from model import NetworkSpec, build_model  # noqa: E402
from spectro import NormalizationSpec, StftConfig  # noqa: E402
from synthgen import Dataset, make_ecg_dataset, split  # noqa: E402
from trainer import TrainConfig, prepare_data  # noqa: E402

TINY_CONFIG = """\
# tiny ECG experiment used by the CLI tests
dataset.kind=ecg
dataset.size=6
dataset.seed=0
dataset.duration=0.5
dataset.sample_rate=128
dataset.test_fraction=0.34
stft.window_length=32
stft.hop_length=8
stft.fft_size=32
network.latent_dim=4
network.channel_schedule='[2]'
network.block_count=1
network.nonlinearity=elu
train.epochs=2
train.batch_size=4
train.lr_ae=0.001
train.lr_disc=0.0001
train.mode=cass
evaluation.last_k=1
"""


@pytest.fixture
def small_stft():
    return StftConfig(window_length=32, hop_length=8, fft_size=32)


@pytest.fixture
def tiny_dataset():
    """Six half-second ECG records at 128 Hz, four for training."""
    examples = make_ecg_dataset(6, seed=0, duration=0.5, sample_rate=128.0)
    train, test = split(len(examples), 0, 0.34)
    return Dataset(kind="ecg", examples=examples, seed=0, train=train, test=test)


@pytest.fixture
def tiny_data(tiny_dataset, small_stft):
    return prepare_data(tiny_dataset, small_stft, NormalizationSpec())


@pytest.fixture
def tiny_spec(tiny_data):
    return NetworkSpec(
        input_shape=tiny_data.input_shape, latent_dim=4, channel_schedule=(2,), block_count=1, nonlinearity="elu",
    )


@pytest.fixture
def tiny_train_config():
    return TrainConfig(lr_ae=1e-3, lr_disc=1e-4, batch_size=4, epochs=2, seed=0, mode="cass")


@pytest.fixture
def toy_spec():
    """Under 500 parameters per component, smooth activations."""
    return NetworkSpec(input_shape=(4, 4), latent_dim=2, channel_schedule=(2,), block_count=1, nonlinearity="tanh")


@pytest.fixture
def toy_model(toy_spec):
    return build_model(toy_spec, 2, "cass_cross", seed=0).double()


@pytest.fixture
def toy_batch():
    gen = torch.Generator().manual_seed(1)
    mixture = torch.rand(3, 4, 4, generator=gen, dtype=torch.float64)
    targets = torch.rand(3, 2, 4, 4, generator=gen, dtype=torch.float64)
    return Batch(mixture, targets)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiment.txt"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return path


@pytest.fixture
def write_config(tmp_path):
    """Write TINY_CONFIG with extra/overriding lines appended."""

    def _write(name: str, *lines: str) -> Path:
        path = tmp_path / name
        path.write_text(TINY_CONFIG + "\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
