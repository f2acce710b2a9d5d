"""
Database configuration for run manifests.
Every ensemble directory carries its own SQLite manifest.
"""
import os
from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine, Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

MANIFEST_NAME = "manifest.db"

# Create base class for models
Base = declarative_base()


def manifest_path(directory: str) -> str:
    return os.path.join(directory, MANIFEST_NAME)


def get_engine(directory: str) -> Engine:
    """Engine for the manifest of an ensemble directory; creates tables on first use."""
    os.makedirs(directory, exist_ok=True)
    engine = create_engine(f"sqlite:///{manifest_path(directory)}", echo=False, future=True)
    Base.metadata.create_all(engine)
    return engine


@contextmanager
def get_session(engine: Engine) -> Iterator[Session]:
    """Session that commits on success and rolls back on error."""
    session = sessionmaker(bind=engine, expire_on_commit=False)()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
