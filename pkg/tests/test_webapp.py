import pytest
from fastapi.testclient import TestClient

from database import SessionLocal
from database.models import Artifact
from database.registry import finish_run, record_artifacts, record_epochs, record_errors, register_run
from evaluation import ErrorRow
from trainer import EpochLog
from webapp.main import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture
def run(tmp_path):
    """A finished cass run with two epochs, one error table and one artifact file."""
    run_dir = tmp_path / "abc123-s0"
    run_dir.mkdir()
    table = run_dir / "errors_spectrogram.csv"
    table.write_text("model,L1,L2,Linf\nmaternal (cass),0.1,0.2,0.3\n", encoding="utf-8")

    run_id = register_run("abc123-s0", "train", run_dir, config_hash="abc123", seed=0, mode="cass",
                          dataset_kind="ecg")
    logs = [EpochLog(1, None, [0.5, 0.4], [1.3, 1.2], 0.1), EpochLog(2, [0.3, 0.6], [0.4, 0.3], [1.2, 1.1], 0.1)]
    record_epochs(run_id, [row for log in logs for row in log.rows()])
    record_errors(run_id, "spectrogram", "cass",
                  [ErrorRow(0, "maternal", 0.1, 0.2, 0.3), ErrorRow(1, "fetal", 0.4, 0.5, 0.6)])
    record_artifacts(run_id, run_dir, [("table", table, None)])
    finish_run(run_id)
    return run_id, run_dir


def test_index_lists_runs(client, run):
    response = client.get("/")
    assert response.status_code == 200
    assert "abc123-s0" in response.text


def test_run_listing_and_detail(client, run):
    run_id, _ = run
    ids = [r["id"] for r in client.get("/api/runs").json()]
    assert run_id in ids
    assert ids == sorted(ids, reverse=True)
    detail = client.get(f"/api/runs/{run_id}").json()
    assert detail["mode"] == "cass" and detail["status"] == "finished" and detail["seed"] == 0


def test_epochs_and_errors(client, run):
    run_id, _ = run
    epochs = client.get(f"/api/runs/{run_id}/epochs").json()
    assert [(e["epoch"], e["component"]) for e in epochs] == [(1, 0), (1, 1), (2, 0), (2, 1)]
    assert epochs[0]["test_l2"] is None and epochs[3]["test_l2"] == 0.6
    errors = client.get(f"/api/runs/{run_id}/errors").json()
    assert [e["component_name"] for e in errors] == ["maternal", "fetal"]
    assert errors[1]["linf"] == 0.6


def test_artifact_download(client, run):
    run_id, run_dir = run
    artifacts = client.get(f"/api/runs/{run_id}/artifacts").json()
    assert [a["path"] for a in artifacts] == ["errors_spectrogram.csv"]
    response = client.get(f"/api/runs/{run_id}/artifacts/{artifacts[0]['id']}")
    assert response.status_code == 200
    assert response.text == (run_dir / "errors_spectrogram.csv").read_text(encoding="utf-8")


def test_missing_things_are_404(client, run):
    run_id, run_dir = run
    assert client.get("/api/runs/999999").status_code == 404
    assert client.get("/api/runs/999999/epochs").status_code == 404
    assert client.get(f"/api/runs/{run_id}/artifacts/999999").status_code == 404

    (run_dir.parent / "secret.txt").write_text("outside", encoding="utf-8")
    db = SessionLocal()
    try:
        escaping = Artifact(run_id=run_id, kind="table", path="../secret.txt")
        gone = Artifact(run_id=run_id, kind="table", path="deleted.csv")
        db.add_all([escaping, gone])
        db.commit()
        ids = escaping.id, gone.id
    finally:
        db.close()
    for artifact_id in ids:
        assert client.get(f"/api/runs/{run_id}/artifacts/{artifact_id}").status_code == 404
