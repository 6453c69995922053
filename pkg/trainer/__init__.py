"""
Training loop, per-epoch logs and checkpoints.
"""
from trainer.data import SpectralData, SpectralSplit, prepare_data
from trainer.checkpoints import (
    TrainingState,
    checkpoint_epoch,
    checkpoint_load,
    checkpoint_save,
    load_training_state,
)
from trainer.loop import (
    EpochLog,
    TrainConfig,
    TrainResult,
    append_epoch_log,
    evaluate_epoch,
    make_optimizer,
    read_epoch_logs,
    train,
    update_step,
    write_epoch_logs,
)

__all__ = [
    "EpochLog",
    "SpectralData",
    "SpectralSplit",
    "TrainConfig",
    "TrainResult",
    "TrainingState",
    "append_epoch_log",
    "checkpoint_epoch",
    "checkpoint_load",
    "checkpoint_save",
    "evaluate_epoch",
    "load_training_state",
    "make_optimizer",
    "prepare_data",
    "read_epoch_logs",
    "train",
    "update_step",
    "write_epoch_logs",
]
