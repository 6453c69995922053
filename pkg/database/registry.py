"""
Write side of the run registry, used by the CLI commands.
"""
import logging
from datetime import datetime
from pathlib import Path
from typing import Iterable

from sqlalchemy import select

from database import SessionLocal, init_db
from database.models import Artifact, EpochRecord, ErrorRecord, Run

logger = logging.getLogger(__name__)


def register_run(
    name: str,
    command: str,
    out_dir: Path,
    config_hash: str | None = None,
    seed: int | None = None,
    mode: str | None = None,
    dataset_kind: str | None = None,
) -> int:
    init_db()
    db = SessionLocal()
    try:
        run = Run(
            name=name,
            command=command,
            out_dir=str(Path(out_dir).resolve()),
            config_hash=config_hash,
            seed=seed,
            mode=mode,
            dataset_kind=dataset_kind,
            status="running",
        )
        db.add(run)
        db.commit()
        logger.debug(f"Registered run {run.id}: {command} {name}")
        return run.id
    finally:
        db.close()


def finish_run(run_id: int, status: str = "finished") -> None:
    db = SessionLocal()
    try:
        run = db.get(Run, run_id)
        if run is None:
            logger.warning(f"Run {run_id} not in registry")
            return
        run.status = status
        run.finished_at = datetime.utcnow()
        db.commit()
    finally:
        db.close()


def record_epochs(run_id: int, rows: Iterable[dict]) -> int:
    """Store EpochLog rows (epoch, component, test_l2, ae_loss, disc_loss, seconds)."""
    db = SessionLocal()
    try:
        db.query(EpochRecord).filter(EpochRecord.run_id == run_id).delete()
        count = 0
        for row in rows:
            db.add(EpochRecord(run_id=run_id, **row))
            count += 1
        db.commit()
        return count
    finally:
        db.close()


def record_errors(run_id: int, domain: str, mode: str, rows: Iterable) -> None:
    db = SessionLocal()
    try:
        for row in rows:
            db.add(ErrorRecord(
                run_id=run_id,
                component=row.component,
                component_name=row.name,
                domain=domain,
                mode=mode,
                l1=row.l1,
                l2=row.l2,
                linf=row.linf,
            ))
        db.commit()
    finally:
        db.close()


def record_artifacts(run_id: int, run_dir: Path, artifacts: Iterable[tuple[str, Path, str | None]]) -> None:
    """Register (kind, path, sha256) triples; paths are stored relative to ``run_dir``."""
    run_dir = Path(run_dir).resolve()
    db = SessionLocal()
    try:
        known = set(db.execute(select(Artifact.path).where(Artifact.run_id == run_id)).scalars().all())
        for kind, path, digest in artifacts:
            rel = Path(path).resolve().relative_to(run_dir).as_posix()
            if rel in known:
                continue
            db.add(Artifact(run_id=run_id, kind=kind, path=rel, sha256=digest))
            known.add(rel)
        db.commit()
    finally:
        db.close()
