"""
Run manifest models: runs, per-trajectory completion records and output files.
"""
from datetime import datetime
import json

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import relationship

from .database import Base

STATUS_RUNNING = "running"
STATUS_COMPLETE = "complete"
STATUS_INCOMPLETE = "incomplete"


class RunRecord(Base):
    """One simulate (or synthetic) invocation keyed by its config hash."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    config_hash = Column(String, unique=True, nullable=False)
    code_version = Column(String, nullable=False)
    master_seed = Column(Integer, nullable=False)
    config_json = Column(Text, nullable=False)
    status = Column(String, default=STATUS_RUNNING)
    created_at = Column(DateTime, default=datetime.now)
    completed_at = Column(DateTime, nullable=True)

    # Relationships
    trajectories = relationship("TrajectoryRecord", back_populates="run", cascade="all, delete-orphan")
    outputs = relationship("OutputFile", back_populates="run", cascade="all, delete-orphan")

    @property
    def config(self) -> dict:
        return json.loads(self.config_json)

    def __repr__(self):
        return f"<RunRecord(id={self.id}, hash='{self.config_hash[:12]}', status='{self.status}')>"


class TrajectoryRecord(Base):
    """Completion record of one trajectory at one monitoring rate."""

    __tablename__ = "trajectories"
    __table_args__ = (UniqueConstraint("run_id", "gamma", "trajectory_id"),)

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    gamma = Column(Float, nullable=False)
    trajectory_id = Column(Integer, nullable=False)
    seed_key = Column(String, nullable=False)
    status = Column(String, default=STATUS_COMPLETE)
    chunk_path = Column(String)
    checksum = Column(String)
    completed_at = Column(DateTime, default=datetime.now)

    # Relationships
    run = relationship("RunRecord", back_populates="trajectories")

    def __repr__(self):
        return f"<TrajectoryRecord(gamma={self.gamma}, id={self.trajectory_id}, status='{self.status}')>"


class OutputFile(Base):
    """Consolidated data file with its checksum."""

    __tablename__ = "output_files"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    path = Column(String, nullable=False)
    kind = Column(String, nullable=False)
    checksum = Column(String, nullable=False)
    n_rows = Column(Integer)

    # Relationships
    run = relationship("RunRecord", back_populates="outputs")

    def __repr__(self):
        return f"<OutputFile(path='{self.path}', kind='{self.kind}')>"
