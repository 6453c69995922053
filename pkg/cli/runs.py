"""
Run directories, reproducibility manifests and registry bookkeeping shared by the commands.
"""
import logging
import subprocess
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import config
from cli.experiment import ExperimentConfig, config_hash, dataset_hash, load_config, serialize_config
from database.registry import finish_run, record_artifacts, register_run
from storage import dump_kv, load_kv, sha256_file

logger = logging.getLogger(__name__)

RUN_MANIFEST = "run_manifest.txt"
CONFIG_NAME = "config.txt"
CHECKPOINT_DIR = "checkpoint"
EPOCH_LOG = "epoch_log.csv"


@dataclass(frozen=True)
class RunContext:
    cfg: ExperimentConfig
    out_root: Path
    config_hash: str

    @property
    def seed(self) -> int:
        return self.cfg.train.seed

    @property
    def run_name(self) -> str:
        return f"{self.config_hash[:12]}-s{self.seed}"

    @property
    def run_dir(self) -> Path:
        return self.out_root / self.run_name

    @property
    def dataset_dir(self) -> Path:
        return self.out_root / "datasets" / f"{self.cfg.dataset.kind}-{dataset_hash(self.cfg)[:12]}"

    @property
    def checkpoint_dir(self) -> Path:
        return self.run_dir / CHECKPOINT_DIR


def resolve_context(config_path: Path, seed: int | None = None, out: Path | None = None) -> RunContext:
    cfg = load_config(config_path).with_seed(seed)
    out_root = Path(out) if out else Path(cfg.output_dir) if cfg.output_dir else config.OUTPUT_DIR
    return RunContext(cfg, out_root, config_hash(cfg))


def write_config(ctx: RunContext) -> Path:
    path = ctx.run_dir / CONFIG_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_config(ctx.cfg), encoding="utf-8")
    return path


def git_revision() -> str:
    """Best effort; ``unknown`` outside a git checkout."""
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], cwd=config.BASE_DIR, capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def write_run_manifest(
    directory: Path,
    command: str,
    artifacts: list[tuple[str, Path]],
    config_hash_: str | None = None,
    seed: int | None = None,
    inputs: dict | None = None,
) -> Path:
    """Merge this command's inputs and artifact hashes into ``run_manifest.txt``."""
    directory = Path(directory)
    path = directory / RUN_MANIFEST
    manifest = load_kv(path) if path.is_file() else {}
    manifest.update({
        "config_hash": config_hash_ or manifest.get("config_hash"),
        "seed": seed if seed is not None else manifest.get("seed"),
        "version": config.VERSION,
        "git_rev": git_revision(),
    })
    commands = manifest.setdefault("commands", {})
    commands[command.replace("-", "_")] = {
        "inputs": inputs or {},
        "artifacts": [[Path(p).relative_to(directory).as_posix(), sha256_file(p)] for _, p in artifacts],
    }
    return dump_kv(manifest, path, header="CASS run manifest")


@contextmanager
def registered_run(name: str, command: str, out_dir: Path, **fields):
    """Registry row for the duration of a command; marked failed if the command raises."""
    run_id = register_run(name, command, out_dir, **fields)
    try:
        yield run_id
    except BaseException:
        finish_run(run_id, status="failed")
        raise
    finish_run(run_id)


def register_artifacts(run_id: int, directory: Path, artifacts: list[tuple[str, Path]]) -> None:
    record_artifacts(run_id, directory, [(kind, path, sha256_file(path)) for kind, path in artifacts])
