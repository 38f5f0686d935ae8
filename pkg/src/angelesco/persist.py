"""Deterministic persistence: canonical JSON, content hashes, CSV tables.

Study outputs live under out/<study-id>/ with raw artifacts per degree,
CSV tables, and a manifest tying every table row to raw files by
sha256.  All serialization is byte-deterministic: canonical JSON uses
sorted keys and repr-based floats, CSV uses repr floats.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import sys
from pathlib import Path


def _default(obj):
    raise TypeError(f"not canonically serializable: {type(obj).__name__}")


def _normalize(obj):
    if isinstance(obj, float):
        return float(repr(obj)) if obj == obj else None
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":"),
                      default=_default)


def content_hash(data) -> str:
    if isinstance(data, str):
        data = data.encode()
    elif not isinstance(data, bytes):
        data = canonical_json(data).encode()
    return hashlib.sha256(data).hexdigest()


def study_id(config_doc: dict) -> str:
    return content_hash(config_doc)[:12]


class ArtifactStore:
    """Append-only persisted artifacts keyed by path, hashed on write."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hashes = {}

    def write_json(self, rel: str, doc) -> str:
        text = canonical_json(doc)
        return self._write(rel, text.encode())

    def write_text(self, rel: str, text: str) -> str:
        return self._write(rel, text.encode())

    def write_csv(self, rel: str, header, rows) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(c) for c in row])
        return self._write(rel, buf.getvalue().encode())

    def _write(self, rel: str, data: bytes) -> str:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        h = hashlib.sha256(data).hexdigest()
        self.hashes[rel] = h
        return h

    def manifest(self, config_doc, extra=None) -> dict:
        doc = {
            "study_id": study_id(config_doc),
            "config": _normalize(config_doc),
            "environment": environment_manifest(),
            "artifacts": dict(sorted(self.hashes.items())),
        }
        if extra:
            doc.update(extra)
        return doc

    def finalize(self, config_doc, extra=None):
        doc = self.manifest(config_doc, extra)
        (self.root / "manifest.json").write_text(canonical_json(doc))
        return doc


def _csv_cell(c):
    if isinstance(c, float):
        return repr(c)
    return c


def environment_manifest() -> dict:
    import mpmath
    import numpy
    import scipy

    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }
