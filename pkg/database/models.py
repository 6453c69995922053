"""
SQLAlchemy models for the run registry. The files under each run directory
stay authoritative; these rows index them for browsing.
"""
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String
from sqlalchemy.orm import relationship

from database import Base


class Run(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    name = Column(String(255), nullable=False)  # run directory name, e.g. <hash12>-s<seed>
    command = Column(String(32), nullable=False)  # gen-data | train | eval | cross-analysis | compare
    config_hash = Column(String(64), nullable=True)
    seed = Column(Integer, nullable=True)
    mode = Column(String(32), nullable=True)  # baseline | cass | cass_cross
    dataset_kind = Column(String(32), nullable=True)
    out_dir = Column(String(1024), nullable=False)
    status = Column(String(32), default="running")  # running | finished | failed
    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)

    epochs = relationship(
        "EpochRecord", back_populates="run", lazy="selectin",
        order_by="EpochRecord.id", cascade="all, delete-orphan",
    )
    errors = relationship(
        "ErrorRecord", back_populates="run", lazy="selectin",
        order_by="ErrorRecord.id", cascade="all, delete-orphan",
    )
    artifacts = relationship(
        "Artifact", back_populates="run", lazy="selectin",
        order_by="Artifact.id", cascade="all, delete-orphan",
    )


class EpochRecord(Base):
    """One EpochLog row: a component's numbers after one epoch."""
    __tablename__ = "epoch_records"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    epoch = Column(Integer, nullable=False)
    component = Column(Integer, nullable=False)
    test_l2 = Column(Float, nullable=True)  # empty on epochs without evaluation
    ae_loss = Column(Float, nullable=False)
    disc_loss = Column(Float, nullable=True)  # baseline has none
    seconds = Column(Float, nullable=True)

    run = relationship("Run", back_populates="epochs")


class ErrorRecord(Base):
    __tablename__ = "error_records"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    component = Column(Integer, nullable=False)
    component_name = Column(String(64), nullable=False)
    domain = Column(String(16), nullable=False)  # spectrogram | waveform
    mode = Column(String(32), nullable=True)
    l1 = Column(Float, nullable=False)
    l2 = Column(Float, nullable=False)
    linf = Column(Float, nullable=False)

    run = relationship("Run", back_populates="errors")


class Artifact(Base):
    __tablename__ = "artifacts"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    kind = Column(String(32), nullable=False)  # table | curve | scatter | log | checkpoint | manifest | report
    path = Column(String(1024), nullable=False)  # relative to the run directory
    sha256 = Column(String(64), nullable=True)

    run = relationship("Run", back_populates="artifacts")
