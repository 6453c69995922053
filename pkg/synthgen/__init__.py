"""
Synthetic ECG/PPG/harmonic mixture corpora, audio stem ingestion and dataset storage.
"""
from synthgen.audio import ingest_audio_stems
from synthgen.datasets import (
    Dataset,
    EcgParamRanges,
    EcgParams,
    load_dataset,
    make_ecg_dataset,
    make_ecg_example,
    make_harmonic_dataset,
    make_ppg_dataset,
    manifest_hash,
    save_dataset,
    split,
)
from synthgen.waveforms import (
    MixtureExample,
    Waveform,
    gen_ecg_beat_train,
    gen_harmonic_tone,
    gen_ppg_pair,
    gen_respiratory_noise,
    mix,
)

__all__ = [
    "Dataset",
    "EcgParamRanges",
    "EcgParams",
    "MixtureExample",
    "Waveform",
    "gen_ecg_beat_train",
    "gen_harmonic_tone",
    "gen_ppg_pair",
    "gen_respiratory_noise",
    "ingest_audio_stems",
    "load_dataset",
    "make_ecg_dataset",
    "make_ecg_example",
    "make_harmonic_dataset",
    "make_ppg_dataset",
    "manifest_hash",
    "mix",
    "save_dataset",
    "split",
]
