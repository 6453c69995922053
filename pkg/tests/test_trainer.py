import math
from dataclasses import replace
from types import SimpleNamespace

import pytest
import torch

import trainer.loop
from errors import ArgumentError, CheckpointError, ConfigurationError, NumericError
from losses import LossWeights
from model import build_model
from storage import load_kv
from trainer import (
    EpochLog,
    SpectralSplit,
    TrainConfig,
    checkpoint_epoch,
    checkpoint_load,
    checkpoint_save,
    evaluate_epoch,
    load_training_state,
    make_optimizer,
    read_epoch_logs,
    train,
    update_step,
    write_epoch_logs,
)
from trainer.checkpoints import MANIFEST_NAME


def _params_equal(a, b) -> bool:
    return all(torch.equal(p, q) for p, q in zip(a.parameters(), b.parameters()))


def _logs_equal(a, b) -> bool:
    return len(a) == len(b) and all(x.same_as(y) for x, y in zip(a, b))


# ----- update_step -----

def _scalar():
    return torch.nn.Parameter(torch.zeros(1, dtype=torch.float64))


def test_update_step_zero_gradient_keeps_parameters():
    p = _scalar()
    opt = make_optimizer([p], 1e-3)
    for _ in range(3):
        update_step([p], [torch.zeros(1, dtype=torch.float64)], opt)
    assert float(p) == 0.0


def test_update_step_first_displacement_is_lr():
    p = _scalar()
    update_step([p], [torch.ones(1, dtype=torch.float64)], make_optimizer([p], 1e-3))
    assert float(p) == pytest.approx(-1e-3, abs=1e-9)


def test_update_step_grad_then_negated_returns_near_start():
    lr = 1e-3
    p = _scalar()
    opt = make_optimizer([p], lr)
    update_step([p], [torch.ones(1, dtype=torch.float64)], opt)
    update_step([p], [-torch.ones(1, dtype=torch.float64)], opt)
    assert abs(float(p)) <= 10 * lr
    assert p.grad is None


def test_update_step_shape_checks():
    p = _scalar()
    opt = make_optimizer([p], 1e-3)
    with pytest.raises(ArgumentError):
        update_step([p], [], opt)
    with pytest.raises(ArgumentError):
        update_step([p], [torch.ones(2, dtype=torch.float64)], opt)


# ----- evaluate_epoch -----

def _fixed_predictions(monkeypatch, values):
    monkeypatch.setattr(trainer.loop, "separate", lambda model, x, batch_size=None: values)


def test_evaluate_epoch_hand_value(monkeypatch):
    split = SpectralSplit(torch.zeros(1, 1, 2), torch.tensor([[[[1.0, 2.0]], [[1.0, 2.0]]]]))
    _fixed_predictions(monkeypatch, torch.ones(1, 2, 1, 2))
    errors = evaluate_epoch(SimpleNamespace(k=2), split)
    assert errors == pytest.approx([1 / math.sqrt(5)] * 2, abs=1e-9)


def test_evaluate_epoch_perfect_and_zero(monkeypatch):
    targets = torch.rand(3, 2, 4, 5) + 0.1
    split = SpectralSplit(torch.zeros(3, 4, 5), targets)
    _fixed_predictions(monkeypatch, targets.clone())
    assert evaluate_epoch(SimpleNamespace(k=2), split) == [0.0, 0.0]
    _fixed_predictions(monkeypatch, torch.zeros_like(targets))
    assert evaluate_epoch(SimpleNamespace(k=2), split) == pytest.approx([1.0, 1.0], abs=1e-12)


def test_training_survives_silent_test_component(tiny_data, tiny_spec, caplog):
    targets = tiny_data.test.targets.clone()
    targets[0, 1] = 0.0
    data = replace(tiny_data, test=SpectralSplit(tiny_data.test.mixture, targets, tiny_data.test.records))
    cfg = TrainConfig(lr_ae=1e-3, lr_disc=1e-4, batch_size=4, epochs=1, seed=0, mode="cass")
    with caplog.at_level("WARNING", logger="evaluation.metrics"):
        logs = train(build_model(tiny_spec, 2, "cass", seed=0), data, cfg).logs
    assert len(logs) == 1 and all(math.isfinite(e) for e in logs[0].test_l2)
    assert f"Skipped 1 of {len(targets)} zero-norm references in the L2 error for component 1" in caplog.text


# ----- Training -----

def test_training_is_deterministic(tiny_data, tiny_spec, tiny_train_config):
    a = build_model(tiny_spec, 2, "cass", seed=0)
    b = build_model(tiny_spec, 2, "cass", seed=0)
    logs_a = train(a, tiny_data, tiny_train_config).logs
    logs_b = train(b, tiny_data, tiny_train_config).logs
    assert _logs_equal(logs_a, logs_b)
    assert _params_equal(a, b)
    assert len(logs_a) == 2 and all(len(log.test_l2) == 2 and len(log.disc_loss) == 2 for log in logs_a)
    assert all(e >= 0 for log in logs_a for e in log.test_l2)


def test_zero_weight_cross_mode_reproduces_cass(tiny_data, tiny_spec, tiny_train_config):
    cass = build_model(tiny_spec, 2, "cass", seed=3)
    cross = build_model(tiny_spec, 2, "cass_cross", LossWeights(cross_weight=0.0), seed=3)
    logs_cass = train(cass, tiny_data, tiny_train_config).logs
    logs_cross = train(cross, tiny_data, tiny_train_config.model_copy(update={"mode": "cass_cross"})).logs
    assert _logs_equal(logs_cass, logs_cross)
    assert _params_equal(cass, cross)


def test_cross_mode_changes_discriminators(tiny_data, tiny_spec, tiny_train_config):
    cass = build_model(tiny_spec, 2, "cass", seed=3)
    cross = build_model(tiny_spec, 2, "cass_cross", LossWeights(cross_weight=0.5), seed=3)
    train(cass, tiny_data, tiny_train_config)
    train(cross, tiny_data, tiny_train_config.model_copy(update={"mode": "cass_cross"}))
    assert not all(
        torch.equal(p, q)
        for p, q in zip(cass.component(0).disc_parameters(), cross.component(0).disc_parameters())
    )


def test_baseline_components_are_independent(tiny_data, tiny_spec, tiny_train_config):
    cfg = tiny_train_config.model_copy(update={"mode": "baseline"})
    a = build_model(tiny_spec, 2, "baseline", seed=0)
    b = build_model(tiny_spec, 2, "baseline", seed=0)
    with torch.no_grad():
        for p in b.component(1).parameters():
            p.mul_(-0.5)
    logs = train(a, tiny_data, cfg).logs
    train(b, tiny_data, cfg)
    assert all(torch.equal(p, q) for p, q in zip(a.component(0).parameters(), b.component(0).parameters()))
    assert not all(torch.equal(p, q) for p, q in zip(a.component(1).parameters(), b.component(1).parameters()))
    assert all(log.disc_loss is None for log in logs)


@pytest.mark.parametrize("mode", ["baseline", "cass_cross"])
def test_parallel_component_updates_match_serial(tiny_data, tiny_spec, tiny_train_config, mode):
    cfg = tiny_train_config.model_copy(update={"mode": mode})
    weights = LossWeights(cross_weight=0.5)
    serial = build_model(tiny_spec, 2, mode, weights, seed=5)
    threaded = build_model(tiny_spec, 2, mode, weights, seed=5)
    logs_serial = train(serial, tiny_data, cfg).logs
    logs_threaded = train(threaded, tiny_data, cfg.model_copy(update={"component_workers": 2})).logs
    for a, b in zip(logs_serial, logs_threaded):
        assert a.ae_loss == pytest.approx(b.ae_loss, rel=1e-5)
        assert a.test_l2 == pytest.approx(b.test_l2, rel=1e-5)
    for p, q in zip(serial.parameters(), threaded.parameters()):
        assert torch.allclose(p, q, rtol=1e-5, atol=1e-7)


def test_ae_loss_drops_on_tiny_overfit(tiny_data, tiny_spec):
    cfg = TrainConfig(lr_ae=1e-3, batch_size=4, epochs=30, seed=0, mode="baseline", eval_every=30)
    model = build_model(tiny_spec, 2, "baseline", seed=1)
    logs = train(model, tiny_data, cfg).logs
    assert all(logs[-1].ae_loss[i] < logs[0].ae_loss[i] for i in range(2))
    assert logs[0].test_l2 is None and logs[-1].test_l2 is not None


def test_train_rejects_mismatches(tiny_data, tiny_spec, tiny_train_config):
    model = build_model(tiny_spec, 2, "baseline", seed=0)
    with pytest.raises(ConfigurationError):
        train(model, tiny_data, tiny_train_config)
    wrong_k = build_model(tiny_spec, 3, "cass", seed=0)
    with pytest.raises(ArgumentError):
        train(wrong_k, tiny_data, tiny_train_config)


def test_non_finite_loss_aborts_with_location(tiny_data, tiny_spec, tiny_train_config):
    model = build_model(tiny_spec, 2, "cass", seed=0)
    with torch.no_grad():
        model.component(1).encoder.head.bias.fill_(float("nan"))
    with pytest.raises(NumericError, match=r"ae\[1\].*epoch 1, batch 0"):
        train(model, tiny_data, tiny_train_config)


# ----- EpochLog CSV -----

def test_epoch_log_csv_round_trip(tmp_path, tiny_data, tiny_spec, tiny_train_config):
    path = tmp_path / "log.csv"
    model = build_model(tiny_spec, 2, "cass", seed=0)
    logs = train(model, tiny_data, tiny_train_config, log_path=path).logs
    back = read_epoch_logs(path)
    assert _logs_equal(logs, back)
    assert [log.seconds for log in back] == [log.seconds for log in logs]
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "epoch,component,test_l2,ae_loss,disc_loss,seconds"
    assert len(lines) - 1 == 2 * 2


def test_epoch_log_missing_values(tmp_path):
    logs = [EpochLog(1, None, [0.5, 0.25], None, 1.0), EpochLog(2, [0.1, 0.2], [0.4, 0.2], None, 2.0)]
    path = write_epoch_logs(tmp_path / "l.csv", logs)
    assert _logs_equal(read_epoch_logs(path), logs)


# ----- Checkpoints -----

def test_checkpoint_round_trip_is_exact(tmp_path, tiny_data, tiny_spec, tiny_train_config):
    weights = LossWeights(alpha=0.8, beta=0.2, cross_weight=0.05)
    model = build_model(tiny_spec, 2, "cass_cross", weights, seed=2, names=["maternal", "fetal"])
    train(model, tiny_data, tiny_train_config.model_copy(update={"mode": "cass_cross", "epochs": 1}))
    checkpoint_save(model, tmp_path / "ck")
    loaded = checkpoint_load(tmp_path / "ck")
    assert _params_equal(model, loaded)
    assert loaded.mode == model.mode and loaded.loss_weights == weights and loaded.names == ["maternal", "fetal"]
    x = tiny_data.test.mixture
    for a, b in zip(model.components, loaded.components):
        with torch.no_grad():
            assert torch.equal(a.reconstruct(x), b.reconstruct(x))
            assert torch.equal(a.discriminate(x), b.discriminate(x))

    manifest = load_kv(tmp_path / "ck" / MANIFEST_NAME)
    assert manifest["mode"] == "cass_cross"
    assert manifest["weights"]["alpha"] == 0.8 and manifest["weights"]["cross_weight"] == 0.05
    assert manifest["spec"]["latent_dim"] == 4
    assert ["encoder.head.weight", [4, 374]] in manifest["tensors"]["component_0"]


def test_checkpoint_float64_round_trip(tmp_path, toy_model):
    checkpoint_save(toy_model, tmp_path / "ck")
    loaded = checkpoint_load(tmp_path / "ck")
    assert next(loaded.parameters()).dtype == torch.float64
    assert _params_equal(toy_model, loaded)


def test_corrupt_checkpoint_is_rejected(tmp_path, toy_model):
    path = checkpoint_save(toy_model, tmp_path / "ck")
    data = bytearray((path / "component_1.npz").read_bytes())
    data[-40] ^= 0xFF
    (path / "component_1.npz").write_bytes(bytes(data))
    with pytest.raises(CheckpointError):
        checkpoint_load(path)
    with pytest.raises(CheckpointError):
        checkpoint_load(tmp_path / "nothing-here")
    (path / MANIFEST_NAME).write_text("format=other\n", encoding="utf-8")
    with pytest.raises(CheckpointError):
        checkpoint_load(path)


def test_resume_continues_bit_for_bit(tmp_path, tiny_data, tiny_spec):
    cfg = TrainConfig(lr_ae=1e-3, lr_disc=1e-4, batch_size=2, epochs=4, seed=5, mode="cass", checkpoint_every=2)
    straight = build_model(tiny_spec, 2, "cass", seed=1)
    full_logs = train(straight, tiny_data, cfg).logs

    interrupted = build_model(tiny_spec, 2, "cass", seed=1)
    train(interrupted, tiny_data, cfg.model_copy(update={"epochs": 2}), checkpoint_dir=tmp_path / "ck")
    assert checkpoint_epoch(tmp_path / "ck") == 2
    state = load_training_state(tmp_path / "ck")
    resumed = checkpoint_load(tmp_path / "ck")
    rest = train(resumed, tiny_data, cfg, state=state).logs

    assert [log.epoch for log in rest] == [3, 4]
    assert _logs_equal(full_logs[2:], rest)
    assert _params_equal(straight, resumed)


def test_periodic_checkpoints(tmp_path, tiny_data, tiny_spec, tiny_train_config):
    model = build_model(tiny_spec, 2, "cass", seed=0)
    train(model, tiny_data, tiny_train_config.model_copy(update={"checkpoint_every": 1}), checkpoint_dir=tmp_path)
    assert checkpoint_epoch(tmp_path) == 2
    state = load_training_state(tmp_path)
    assert state.epoch == 2
    assert len(state.ae_optimizers) == len(state.disc_optimizers) == 2
    assert state.generator.dtype == torch.uint8
