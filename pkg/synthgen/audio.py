"""
Ingestion of real instrument stems (e.g. a bass and a saxophone track of a
chamber recording) into fixed-length mixture examples.
"""
import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import soundfile as sf

from errors import ArgumentError, AudioReadError, NoSegmentsError, SampleRateMismatchError
from synthgen.waveforms import MixtureExample, Waveform, mix

logger = logging.getLogger(__name__)


def read_mono(path: Path) -> tuple[np.ndarray, float]:
    """Read a single-channel PCM file as float64 samples in [-1, 1]."""
    path = Path(path)
    try:
        data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    except (RuntimeError, OSError, ValueError, TypeError) as e:
        raise AudioReadError(path, str(e)) from e
    if data.shape[1] != 1:
        raise AudioReadError(path, f"expected single-channel audio, found {data.shape[1]} channels")
    if data.shape[0] == 0:
        raise AudioReadError(path, "file contains no samples")
    return data[:, 0], float(rate)


def ingest_audio_stems(
    stem_paths: Sequence[Path],
    mixture_path: Path | None = None,
    segment_length: int = 22050,
    names: Sequence[str] | None = None,
) -> list[MixtureExample]:
    """Cut stems (and optionally a recorded ensemble) into aligned fixed-length examples.

    Without ``mixture_path`` the mixture is the stem sum. Stems of different
    length are truncated to the shortest one.
    """
    if len(stem_paths) < 2:
        raise ArgumentError(f"need at least 2 stems, got {len(stem_paths)}")
    if segment_length < 1:
        raise ArgumentError(f"segment_length must be positive, got {segment_length}")
    names = tuple(names) if names else tuple(Path(p).stem for p in stem_paths)

    stems = [read_mono(p) for p in stem_paths]
    recorded = read_mono(mixture_path) if mixture_path is not None else None
    rate = stems[0][1]
    sources = list(zip(stem_paths, stems)) + ([(mixture_path, recorded)] if recorded is not None else [])
    for path, (_, other_rate) in sources:
        if other_rate != rate:
            raise SampleRateMismatchError(
                f"{path} is sampled at {other_rate:g} Hz but {stem_paths[0]} at {rate:g} Hz"
            )

    usable = min(len(samples) for _, (samples, _) in sources)
    count = usable // segment_length
    if count == 0:
        raise NoSegmentsError(
            f"shortest input has {usable} samples, fewer than one segment of {segment_length}"
        )
    if any(len(samples) != usable for _, (samples, _) in sources):
        logger.warning(f"Stems differ in length; truncating to {usable} samples")

    examples = []
    silent = 0
    for s in range(count):
        start = s * segment_length
        components = tuple(Waveform(samples[start:start + segment_length], rate) for samples, _ in stems)
        silent += any(not np.any(c.samples) for c in components)
        if recorded is not None:
            mixture = Waveform(recorded[0][start:start + segment_length], rate)
        else:
            mixture = mix(components)
        examples.append(MixtureExample(
            mixture=mixture,
            components=components,
            names=names,
            meta={"segment": s, "offset": start, "recorded_mixture": recorded is not None},
        ))
    if silent:
        logger.warning(f"{silent} of {count} segments have a silent stem; their errors are left out of the averages")
    logger.info(f"Ingested {count} segments of {segment_length} samples from {len(stems)} stems")
    return examples
