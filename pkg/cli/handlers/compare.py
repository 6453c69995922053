"""
compare: overlay the training curves of several runs and merge their error tables.
"""
import logging
from pathlib import Path

import config
from cli.experiment import load_config
from cli.runs import CONFIG_NAME, EPOCH_LOG, register_artifacts, registered_run, resolve_context, write_run_manifest
from errors import DataError, UsageError
from evaluation import load_report, plot_error_curves, render_table
from storage import load_kv, sha256_text
from trainer import read_epoch_logs
from trainer.checkpoints import MANIFEST_NAME as CHECKPOINT_MANIFEST

logger = logging.getLogger(__name__)


def _run_dir(item: str, seed: int | None, out: Path | None) -> Path:
    path = Path(item)
    if path.is_dir():
        return path
    if path.is_file():
        return resolve_context(path, seed, out).run_dir
    raise UsageError(f"{item} is neither a run directory nor a config file")


def _label(run_dir: Path, mode: str, modes: list[str]) -> str:
    return mode if modes.count(mode) == 1 else f"{mode}:{run_dir.name}"


def cmd_compare(args) -> int:
    run_dirs = [_run_dir(item, args.seed, args.out) for item in args.runs]
    if len(set(run_dirs)) != len(run_dirs):
        raise UsageError("the same run was given twice")

    configs = []
    for run_dir in run_dirs:
        if not (run_dir / EPOCH_LOG).is_file():
            raise DataError(f"no {EPOCH_LOG} in {run_dir}; train it first")
        configs.append(load_config(run_dir / CONFIG_NAME))
    modes = [c.train.mode for c in configs]
    names = list(load_kv(run_dirs[0] / "checkpoint" / CHECKPOINT_MANIFEST)["names"])

    logs_by_run = {}
    for run_dir, mode in zip(run_dirs, modes):
        logs = read_epoch_logs(run_dir / EPOCH_LOG)
        if not logs or len(logs[0].ae_loss) != len(names):
            raise DataError(f"{run_dir} has a different number of components")
        logs_by_run[_label(run_dir, mode, modes)] = logs
    shortest = min(len(logs) for logs in logs_by_run.values())
    if any(len(logs) != shortest for logs in logs_by_run.values()):
        logger.warning(f"Runs have different epoch counts; truncating all curves to {shortest} epochs")
        logs_by_run = {label: logs[:shortest] for label, logs in logs_by_run.items()}

    out_root = Path(args.out) if args.out else config.OUTPUT_DIR
    key = sha256_text("\n".join(sorted(str(d.resolve()) for d in run_dirs)))[:12]
    out_dir = out_root / f"compare-{key}"
    out_dir.mkdir(parents=True, exist_ok=True)

    with registered_run(out_dir.name, "compare", out_dir) as run_id:
        last_k = configs[0].evaluation.last_k
        artifacts = [("curve", p) for p in plot_error_curves(logs_by_run, out_dir, names, last_k=last_k)]
        for domain in configs[0].evaluation.domains:
            reports = [
                load_report(d / "eval" / f"report_{domain}.txt")
                for d in run_dirs if (d / "eval" / f"report_{domain}.txt").is_file()
            ]
            if len(reports) != len(run_dirs):
                logger.warning(f"{len(run_dirs) - len(reports)} run(s) lack a {domain} report; run eval on them")
            if not reports:
                continue
            for fmt, suffix in (("text", "txt"), ("csv", "csv")):
                path = out_dir / f"errors_{domain}.{suffix}"
                path.write_text(render_table(reports, fmt), encoding="utf-8")
                artifacts.append(("table", path))
        write_run_manifest(out_dir, "compare", artifacts, inputs={"runs": [d.name for d in run_dirs]})
        register_artifacts(run_id, out_dir, artifacts)
    print(out_dir)
    return 0
