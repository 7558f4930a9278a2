"""Staged artifact writing: files appear in the output directory only on success."""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class ArtifactStore:
    """Single writer for one run. Use as a context manager."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.hashes: dict[str, str] = {}
        self._staging: Path | None = None
        self._created = False

    def __enter__(self) -> "ArtifactStore":
        self._created = not self.out_dir.exists()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.out_dir))
        return self

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for name in sorted(self.hashes):
                    dest = self.out_dir / name
                    dest.parent.mkdir(parents=True, exist_ok=True)
                    os.replace(self._staging / name, dest)
        finally:
            shutil.rmtree(self._staging, ignore_errors=True)
            if exc_type is not None and self._created:
                shutil.rmtree(self.out_dir, ignore_errors=True)
        return False

    def write_text(self, name: str, text: str) -> Path:
        data = text.encode("utf-8")
        path = self._staging / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.hashes[name] = sha256_bytes(data)
        return self.out_dir / name

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, dump_json(obj))
