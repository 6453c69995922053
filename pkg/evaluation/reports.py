"""
Error reports over a test split and their text/CSV tables.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from errors import ArgumentError, DataError
from evaluation.metrics import NORMS, mean_relative_error
from model import CassModel, Mode, separate
from spectro import reconstruct_record
from storage import dump_kv, load_kv
from trainer.data import SpectralSplit

logger = logging.getLogger(__name__)

Domain = Literal["spectrogram", "waveform"]
MODE_ORDER = {m.value: n for n, m in enumerate(Mode)}
TABLE_COLUMNS = ["model", "L1", "L2", "Linf"]


@dataclass(frozen=True)
class ErrorRow:
    component: int
    name: str
    l1: float
    l2: float
    linf: float

    @property
    def values(self) -> tuple[float, float, float]:
        return self.l1, self.l2, self.linf


@dataclass(frozen=True)
class ErrorReport:
    rows: tuple[ErrorRow, ...]
    domain: Domain
    mode: str
    dataset_id: str = ""
    seed: int = 0

    def row(self, component: int) -> ErrorRow:
        return self.rows[component]


def _waveform_pairs(split: SpectralSplit, predictions: np.ndarray) -> list[list[tuple[np.ndarray, np.ndarray]]]:
    """Per record, (reconstructed, true) samples for every component."""
    pairs = []
    for record, magnitudes in zip(split.records, predictions):
        recon = reconstruct_record(record, magnitudes)
        pairs.append([(w.samples, truth.samples) for w, truth in zip(recon, record.example.components)])
    return pairs


def evaluate_report(
    model: CassModel,
    split: SpectralSplit,
    domain: Domain = "spectrogram",
    predictions: np.ndarray | None = None,
    dataset_id: str = "",
    seed: int = 0,
    batch_size: int | None = None,
) -> ErrorReport:
    """Mean relative L1/L2/Linf error per component over the split.

    ``predictions`` ([N, K, F, T] normalized magnitudes) replaces the model's
    own outputs when given. The waveform domain inverts them with each
    record's mixture phase and compares against the true component signals.
    """
    if len(split) == 0:
        raise ArgumentError("test split is empty")
    if domain not in ("spectrogram", "waveform"):
        raise ArgumentError(f"unknown domain {domain!r}")
    if domain == "waveform" and len(split.records) != len(split):
        raise ArgumentError("waveform-domain evaluation needs the split's spectral records")
    if predictions is None:
        predictions = separate(model, split.mixture, batch_size).cpu().double().numpy()
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = split.targets.cpu().double().numpy()
    if predictions.shape != targets.shape:
        raise ArgumentError(f"predictions {predictions.shape} do not match targets {targets.shape}")

    if domain == "waveform":
        pairs = _waveform_pairs(split, predictions)
    else:
        pairs = [list(zip(p, t)) for p, t in zip(predictions, targets)]

    rows = []
    for i in range(model.k):
        component_pairs = [pairs[n][i] for n in range(len(split))]
        label = f"{domain} component {i}"
        l1, l2, linf = (mean_relative_error(component_pairs, p, label) for p in NORMS)
        if not all(math.isfinite(v) for v in (l1, l2, linf)):
            logger.warning(f"Non-finite {domain} error for component {i}")
        rows.append(ErrorRow(i, model.names[i], l1, l2, linf))
    return ErrorReport(tuple(rows), domain, model.mode.value, dataset_id, seed)


# ----- Persistence -----

def save_report(report: ErrorReport, path: Path) -> Path:
    return dump_kv(
        {
            "domain": report.domain,
            "mode": report.mode,
            "dataset_id": report.dataset_id,
            "seed": report.seed,
            "k": len(report.rows),
            "rows": {
                str(r.component): {"name": r.name, "l1": r.l1, "l2": r.l2, "linf": r.linf} for r in report.rows
            },
        },
        path,
        header="relative p-norm errors",
    )


def load_report(path: Path) -> ErrorReport:
    raw = load_kv(path)
    try:
        rows = tuple(
            ErrorRow(i, str(raw["rows"][str(i)]["name"]), *(float(raw["rows"][str(i)][c]) for c in ("l1", "l2", "linf")))
            for i in range(int(raw["k"]))
        )
        return ErrorReport(rows, raw["domain"], raw["mode"], str(raw.get("dataset_id", "")), int(raw.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed error report {path}: {e}") from e


# ----- Tables -----

def table_rows(reports: ErrorReport | Sequence[ErrorReport]) -> list[tuple[str, float, float, float]]:
    """Rows ordered by component index, then mode."""
    if isinstance(reports, ErrorReport):
        reports = [reports]
    entries = [(row.component, MODE_ORDER.get(r.mode, len(MODE_ORDER)), r.mode, row) for r in reports for row in r.rows]
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return [(f"{row.name} ({mode})", *row.values) for _, _, mode, row in entries]


def render_table(reports: ErrorReport | Sequence[ErrorReport], format: Literal["text", "csv"] = "text") -> str:
    rows = table_rows(reports)
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for label, *values in rows:
            writer.writerow([label, *(repr(v) for v in values)])
        return buffer.getvalue()
    if format != "text":
        raise ArgumentError(f"unknown table format {format!r}")
    width = max([len(TABLE_COLUMNS[0])] + [len(r[0]) for r in rows])
    lines = [f"{TABLE_COLUMNS[0]:<{width}}  " + "  ".join(f"{c:>10}" for c in TABLE_COLUMNS[1:])]
    lines.append("-" * len(lines[0]))
    for label, *values in rows:
        lines.append(f"{label:<{width}}  " + "  ".join(f"{v:>10.6f}" for v in values))
    return "\n".join(lines) + "\n"


def parse_table_csv(text: str) -> list[tuple[str, float, float, float]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != TABLE_COLUMNS:
        raise DataError(f"unexpected table header {header}")
    return [(label, float(a), float(b), float(c)) for label, a, b, c in reader]
