import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from errors import ArgumentError, ConfigurationError
from spectro import NormalizationSpec, StftConfig, fit_normalization, istft, postprocess, preprocess, stft
from synthgen import Waveform, make_ecg_dataset

COLA_GRID = [
    (256, 64, 256),
    (256, 128, 256),
    (128, 32, 128),
    (64, 16, 128),
    (512, 128, 512),
    (32, 8, 32),
]


def _rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("window,hop,fft", COLA_GRID)
def test_round_trip_on_random_signals(window, hop, fft, rng):
    cfg = StftConfig(window_length=window, hop_length=hop, fft_size=fft)
    assert cfg.is_cola
    for length in (window, 1000, 1777):
        x = Waveform(rng.standard_normal(length), 100.0)
        assert _rel_l2(istft(stft(x, cfg)).samples, x.samples) < 1e-6


def test_round_trip_on_ecg_mixture():
    cfg = StftConfig()
    mixture = make_ecg_dataset(1, seed=0)[0].mixture
    assert _rel_l2(istft(stft(mixture, cfg)).samples, mixture.samples) < 1e-6


def test_frame_formula_without_padding():
    cfg = StftConfig(window_length=256, hop_length=64, fft_size=256, padding="none")
    s = stft(Waveform(np.zeros(1024), 500.0), cfg)
    assert s.magnitude.shape == (129, 13)
    assert cfg.frame_count(1024) == 13
    assert not s.magnitude.any()


def test_cola_padding_frame_count():
    cfg = StftConfig()
    s = stft(Waveform(np.ones(1000), 500.0), cfg)
    assert s.frames == cfg.frame_count(1000)
    assert s.frames == 1 + (cfg.padded_length(1000) - 256) // 64


def test_short_input_and_bad_config():
    with pytest.raises(ArgumentError):
        stft(Waveform(np.ones(100), 500.0), StftConfig())
    with pytest.raises(ValueError):
        StftConfig(window_length=256, hop_length=300, fft_size=256)
    non_cola = StftConfig(window_length=256, hop_length=200, fft_size=256)
    assert not non_cola.is_cola
    s = stft(Waveform(np.ones(1000), 500.0), non_cola)
    with pytest.raises(ConfigurationError):
        istft(s)


def test_bin_centered_sinusoid_has_one_dominant_row():
    fs, fft = 256.0, 256
    cfg = StftConfig(window_length=256, hop_length=64, fft_size=fft, padding="none")
    t = np.arange(2048) / fs
    s = stft(Waveform(np.sin(2 * np.pi * 16 * fs / fft * t), fs), cfg)
    assert np.all(np.argmax(s.magnitude, axis=0) == 16)


def test_zero_spectrogram_inverts_to_zero():
    cfg = StftConfig()
    s = stft(Waveform(np.zeros(600), 500.0), cfg)
    assert not istft(s).samples.any()


def test_linearity_on_complex_frames(rng):
    cfg = StftConfig(window_length=128, hop_length=32, fft_size=256)
    x, y = rng.standard_normal(900), rng.standard_normal(900)
    a, b = 1.7, -0.4
    lhs = stft(Waveform(a * x + b * y, 1.0), cfg).complex()
    rhs = a * stft(Waveform(x, 1.0), cfg).complex() + b * stft(Waveform(y, 1.0), cfg).complex()
    assert np.abs(lhs - rhs).max() < 1e-9


def test_parseval_ratio_is_constant(rng):
    cfg = StftConfig(window_length=128, hop_length=32, fft_size=128, padding="none")
    weights = np.full(cfg.freq_bins, 2.0)
    weights[0] = weights[-1] = 1.0
    ratios = []
    for _ in range(5):
        x = rng.standard_normal(1000)
        frames = sliding_window_view(x, cfg.window_length)[::cfg.hop_length].T * cfg.window[:, None]
        spectral = np.sum(weights[:, None] * stft(Waveform(x, 1.0), cfg).magnitude ** 2)
        ratios.append(spectral / (cfg.fft_size * np.sum(frames ** 2)))
    assert np.ptp(ratios) < 1e-6
    assert abs(ratios[0] - 1.0) < 1e-9


# ----- Features -----

def test_preprocess_normalization_inverse_pair():
    cfg = StftConfig()
    example = make_ecg_dataset(1, seed=3)[0]
    record = preprocess(example, cfg, NormalizationSpec(kind="peak", scope="example"))
    assert record.components.shape[0] == example.k
    assert record.mixture.max() == pytest.approx(1.0)
    raw = stft(example.mixture, cfg).magnitude
    assert np.abs(record.state.denormalize(record.state.normalize(raw)) - raw).max() < 1e-9
    assert np.abs(record.state.denormalize(record.mixture) - raw).max() < 1e-9


def test_dataset_scope_normalization_bounds_train_mixtures():
    cfg = StftConfig()
    examples = make_ecg_dataset(4, seed=1)
    state = fit_normalization(examples, cfg, NormalizationSpec())
    peaks = [preprocess(e, cfg, NormalizationSpec(), state).mixture.max() for e in examples]
    assert max(peaks) == pytest.approx(1.0)
    assert all(p <= 1.0 for p in peaks)
    assert fit_normalization(examples, cfg, NormalizationSpec(kind="none")).scale == 1.0


def test_postprocess_with_true_phase_recovers_component():
    cfg = StftConfig()
    example = make_ecg_dataset(1, seed=5)[0]
    record = preprocess(example, cfg, NormalizationSpec(scope="example"))
    for i, component in enumerate(example.components):
        phase = stft(component, cfg).phase
        out = postprocess(record.components[i], phase, cfg, record.state, len(component), component.sample_rate)
        assert _rel_l2(out.samples, component.samples) < 1e-6


def test_postprocess_with_mixture_phase_is_bounded():
    cfg = StftConfig()
    example = make_ecg_dataset(1, seed=5)[0]
    record = preprocess(example, cfg, NormalizationSpec(scope="example"))
    maternal = example.components[0]
    out = postprocess(
        record.components[0], record.mixture_phase, cfg, record.state, len(maternal), maternal.sample_rate,
    )
    assert np.all(np.isfinite(out.samples))
    assert _rel_l2(out.samples, maternal.samples) < 1.0


def test_postprocess_zero_and_mismatch():
    cfg = StftConfig()
    example = make_ecg_dataset(1, seed=5)[0]
    record = preprocess(example, cfg, NormalizationSpec())
    zero = postprocess(np.zeros_like(record.mixture), record.mixture_phase, cfg, record.state, 1000, 500.0)
    assert not zero.samples.any()
    with pytest.raises(ArgumentError):
        postprocess(record.mixture[:, :-1], record.mixture_phase, cfg, record.state, 1000, 500.0)
