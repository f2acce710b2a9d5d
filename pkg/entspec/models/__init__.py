"""Run manifest persistence."""
from .database import Base, get_engine, get_session, manifest_path, MANIFEST_NAME
from .manifest import (
    RunRecord, TrajectoryRecord, OutputFile, STATUS_RUNNING, STATUS_COMPLETE, STATUS_INCOMPLETE,
)

__all__ = [
    "Base", "get_engine", "get_session", "manifest_path", "MANIFEST_NAME",
    "RunRecord", "TrajectoryRecord", "OutputFile",
    "STATUS_RUNNING", "STATUS_COMPLETE", "STATUS_INCOMPLETE",
]
