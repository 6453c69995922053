"""
train: fit one model (mode taken from train.mode) on the configured dataset.
"""
import logging
import shutil

from pydantic import ValidationError

from cli.runs import (
    EPOCH_LOG,
    RunContext,
    register_artifacts,
    registered_run,
    resolve_context,
    write_config,
    write_run_manifest,
)
from database.registry import record_epochs
from errors import ConfigurationError, UsageError
from model import build_model
from synthgen import load_dataset
from trainer import (
    checkpoint_load,
    load_training_state,
    prepare_data,
    read_epoch_logs,
    train,
    write_epoch_logs,
)
from trainer.checkpoints import MANIFEST_NAME as CHECKPOINT_MANIFEST

logger = logging.getLogger(__name__)


def load_spectral_data(ctx: RunContext):
    dataset = load_dataset(ctx.dataset_dir)
    return dataset, prepare_data(dataset, ctx.cfg.stft, ctx.cfg.normalization)


def cmd_train(args) -> int:
    ctx = resolve_context(args.config, args.seed, args.out)
    cfg = ctx.cfg
    run_dir = ctx.run_dir
    log_path = run_dir / EPOCH_LOG
    has_checkpoint = (ctx.checkpoint_dir / CHECKPOINT_MANIFEST).is_file()

    if run_dir.exists() and not (args.resume or args.force):
        raise UsageError(f"run directory {run_dir} already exists; pass --resume to continue or --force to overwrite")
    if args.force and not args.resume and run_dir.exists():
        logger.warning(f"Overwriting {run_dir}")
        shutil.rmtree(run_dir)
        has_checkpoint = False

    dataset, data = load_spectral_data(ctx)
    try:
        spec = cfg.network.with_input_shape(data.input_shape)
    except ValidationError as e:
        raise ConfigurationError(f"network does not fit {data.input_shape} spectrograms: {e}") from e

    state = None
    if args.resume and has_checkpoint:
        model = checkpoint_load(ctx.checkpoint_dir)
        state = load_training_state(ctx.checkpoint_dir)
        if log_path.is_file():
            # drop rows written after the checkpoint
            write_epoch_logs(log_path, [log for log in read_epoch_logs(log_path) if log.epoch <= state.epoch])
    else:
        if args.resume:
            logger.warning(f"No checkpoint under {run_dir}; starting from scratch")
        if log_path.is_file():
            log_path.unlink()
        model = build_model(spec, data.k, cfg.train.mode, cfg.weights, seed=cfg.train.seed, names=list(data.names))

    with registered_run(ctx.run_name, "train", run_dir, config_hash=ctx.config_hash, seed=ctx.seed,
                        mode=cfg.train.mode, dataset_kind=dataset.kind) as run_id:
        config_path = write_config(ctx)
        train(model, data, cfg.train, state=state, checkpoint_dir=ctx.checkpoint_dir, log_path=log_path)
        logs = read_epoch_logs(log_path) if log_path.is_file() else []
        record_epochs(run_id, [row for log in logs for row in log.rows()])

        artifacts = [("config", config_path), ("log", log_path)] if log_path.is_file() else [("config", config_path)]
        artifacts += [("checkpoint", p) for p in sorted(ctx.checkpoint_dir.iterdir()) if p.is_file()]
        write_run_manifest(run_dir, "train", artifacts, ctx.config_hash, ctx.seed,
                           inputs={"dataset": ctx.dataset_dir.name, "resumed_from": state.epoch if state else 0})
        register_artifacts(run_id, run_dir, artifacts)
    print(run_dir)
    return 0
