"""
Provenance headers and checksums for every file entspec writes.

CSV files start with '# key: value' lines followed by a regular CSV table.
"""
import hashlib
import io
import json
from typing import Any, Dict, Tuple

import pandas as pd

from . import __version__


def config_hash(payload: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a config dict."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_checksum(path: str, chunk_size: int = 1 << 20) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_header(metadata: Dict[str, Any]) -> Dict[str, Any]:
    header = {"code_version": __version__}
    header.update(metadata)
    return header


def write_csv(frame: pd.DataFrame, path: str, metadata: Dict[str, Any]) -> str:
    """Write a DataFrame with a provenance header; returns the file checksum."""
    buffer = io.StringIO()
    for key, value in sorted(build_header(metadata).items()):
        buffer.write(f"# {key}: {value}\n")
    frame.to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(buffer.getvalue())
    return file_checksum(path)


def read_header(path: str) -> Dict[str, str]:
    header = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(":")
            header[key.strip()] = value.strip()
    return header


def read_csv(path: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    """Read a provenance CSV; returns (frame, header)."""
    return pd.read_csv(path, comment="#"), read_header(path)
