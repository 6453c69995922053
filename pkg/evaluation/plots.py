"""
Training-curve and discriminator-output figures (PNG, Agg backend).
"""
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from errors import ArgumentError  # noqa: E402
from evaluation.cross import CrossAnalysisRecord  # noqa: E402

if TYPE_CHECKING:
    from trainer.loop import EpochLog

logger = logging.getLogger(__name__)

PNG_METADATA = {"Software": None}


def _curve(logs: Sequence["EpochLog"], component: int) -> tuple[np.ndarray, np.ndarray]:
    points = [(log.epoch, log.test_l2[component]) for log in logs if log.test_l2 is not None]
    epochs = np.array([p[0] for p in points], dtype=int)
    errors = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        raise ArgumentError(f"cannot take the log of nonpositive or non-finite test errors (component {component})")
    return epochs, errors


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100, metadata=PNG_METADATA)
    plt.close(fig)
    return path


def plot_error_curves(
    logs_by_run: Mapping[str, Sequence["EpochLog"]],
    out_dir: Path,
    names: Sequence[str],
    last_k: int = 200,
) -> list[Path]:
    """Log test error per epoch, one figure per component with every run overlaid, plus a last-k zoom."""
    if not logs_by_run or any(len(logs) == 0 for logs in logs_by_run.values()):
        raise ArgumentError("need at least one run with at least one epoch")
    out_dir = Path(out_dir)
    curves = {run: [_curve(logs, i) for i in range(len(names))] for run, logs in logs_by_run.items()}
    paths = []
    for i, name in enumerate(names):
        for zoom in (False, True):
            fig, ax = plt.subplots(figsize=(7, 4))
            for run in sorted(curves):
                epochs, errors = curves[run][i]
                if zoom:
                    epochs, errors = epochs[-last_k:], errors[-last_k:]
                ax.plot(epochs, np.log(errors), label=run)
            ax.set_xlabel("epoch")
            ax.set_ylabel("log test error (L2)")
            ax.set_title(f"{name}" + (f": last {last_k} epochs" if zoom else ""))
            ax.legend()
            fig.tight_layout()
            file = f"curves_{name}_last{last_k}.png" if zoom else f"curves_{name}.png"
            paths.append(_save(fig, out_dir / file))
    logger.info(f"Wrote {len(paths)} curve figures to {out_dir}")
    return paths


def plot_discriminator_outputs(
    records: Sequence[CrossAnalysisRecord],
    out_dir: Path,
    names: Sequence[str] | None = None,
) -> list[Path]:
    """Scatter of D_i(AE_j(X)) against sample index, one figure per pair j -> i."""
    if not records:
        raise ArgumentError("no cross-analysis records to plot")
    out_dir = Path(out_dir)
    paths = []
    for record in records:
        src = names[record.source] if names else str(record.source)
        judge = names[record.judge] if names else str(record.judge)
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.scatter(np.arange(record.outputs.size), record.outputs, s=8)
        ax.axhline(record.threshold, color="grey", linestyle="--", linewidth=1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("sample")
        ax.set_ylabel(f"D[{judge}] output")
        ax.set_title(f"{src} AE outputs judged by {judge} discriminator ({record.fraction_fake:.0%} fake)")
        fig.tight_layout()
        paths.append(_save(fig, out_dir / f"cross_{record.source}_to_{record.judge}.png"))
    return paths
