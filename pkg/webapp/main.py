"""
FastAPI results browser: read-only views over the run registry and the
artifacts each run wrote to its directory.
"""
import html
from contextlib import asynccontextmanager
from datetime import datetime
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException
from fastapi.responses import FileResponse, HTMLResponse
from pydantic import BaseModel, ConfigDict
from sqlalchemy import select

from config import VERSION
from database import get_db, init_db
from database.models import Artifact, EpochRecord, ErrorRecord, Run


@asynccontextmanager
async def lifespan(_app: FastAPI):
    init_db()
    yield


app = FastAPI(title="CASS results browser", version=VERSION, lifespan=lifespan)


# ----- API models -----


class RunItem(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    name: str
    command: str
    config_hash: str | None = None
    seed: int | None = None
    mode: str | None = None
    dataset_kind: str | None = None
    status: str
    created_at: datetime | None = None
    finished_at: datetime | None = None


class EpochItem(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    epoch: int
    component: int
    test_l2: float | None = None
    ae_loss: float
    disc_loss: float | None = None
    seconds: float | None = None


class ErrorItem(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    component: int
    component_name: str
    domain: str
    mode: str | None = None
    l1: float
    l2: float
    linf: float


class ArtifactItem(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    kind: str
    path: str
    sha256: str | None = None


def _run_or_404(db, run_id: int) -> Run:
    run = db.get(Run, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run


# ----- Pages -----


@app.get("/", response_class=HTMLResponse)
async def index(db=Depends(get_db)):
    """Plain list of runs, newest first."""
    runs = db.execute(select(Run).order_by(Run.id.desc())).scalars().all()
    rows = "\n".join(
        f"<tr><td>{r.id}</td><td>{html.escape(r.name)}</td><td>{html.escape(r.command)}</td>"
        f"<td>{html.escape(r.mode or '')}</td><td>{r.seed if r.seed is not None else ''}</td>"
        f"<td>{html.escape(r.status or '')}</td>"
        f"<td><a href=\"/api/runs/{r.id}/artifacts\">artifacts</a></td></tr>"
        for r in runs
    )
    return (
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>CASS runs</title></head><body>"
        "<h1>Runs</h1><table border=\"1\" cellpadding=\"4\">"
        "<tr><th>id</th><th>name</th><th>command</th><th>mode</th><th>seed</th><th>status</th><th></th></tr>"
        f"{rows}</table></body></html>"
    )


# ----- API -----


@app.get("/api/runs", response_model=list[RunItem])
async def list_runs(db=Depends(get_db)):
    return db.execute(select(Run).order_by(Run.id.desc())).scalars().all()


@app.get("/api/runs/{run_id}", response_model=RunItem)
async def get_run(run_id: int, db=Depends(get_db)):
    return _run_or_404(db, run_id)


@app.get("/api/runs/{run_id}/epochs", response_model=list[EpochItem])
async def get_epochs(run_id: int, db=Depends(get_db)):
    _run_or_404(db, run_id)
    return db.execute(
        select(EpochRecord)
        .where(EpochRecord.run_id == run_id)
        .order_by(EpochRecord.epoch, EpochRecord.component)
    ).scalars().all()


@app.get("/api/runs/{run_id}/errors", response_model=list[ErrorItem])
async def get_errors(run_id: int, db=Depends(get_db)):
    _run_or_404(db, run_id)
    return db.execute(
        select(ErrorRecord)
        .where(ErrorRecord.run_id == run_id)
        .order_by(ErrorRecord.domain, ErrorRecord.component, ErrorRecord.id)
    ).scalars().all()


@app.get("/api/runs/{run_id}/artifacts", response_model=list[ArtifactItem])
async def get_artifacts(run_id: int, db=Depends(get_db)):
    _run_or_404(db, run_id)
    return db.execute(select(Artifact).where(Artifact.run_id == run_id).order_by(Artifact.id)).scalars().all()


@app.get("/api/runs/{run_id}/artifacts/{artifact_id}")
async def get_artifact_file(run_id: int, artifact_id: int, db=Depends(get_db)):
    run = _run_or_404(db, run_id)
    artifact = db.get(Artifact, artifact_id)
    if not artifact or artifact.run_id != run.id:
        raise HTTPException(status_code=404, detail="Artifact not found")
    root = Path(run.out_dir).resolve()
    path = (root / artifact.path).resolve()
    if not path.is_relative_to(root) or not path.is_file():
        raise HTTPException(status_code=404, detail="Artifact file not found")
    return FileResponse(path)
