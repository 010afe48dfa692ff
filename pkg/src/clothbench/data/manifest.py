"""Dataset manifest: per-trajectory paths, checksums and split assignment."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .trajectory import ChecksumError, TrajectoryError, sha256_file

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


@dataclass
class ManifestEntry:
    path: str  # relative to the dataset root
    steps_sha256: str
    meta_sha256: str
    steps: int
    success: bool
    seed: int
    split: str = "train"


@dataclass
class DatasetManifest:
    root: Path
    entries: list[ManifestEntry] = field(default_factory=list)
    rejected: int = 0
    config_hash: str = ""
    oracle: str = ""
    task: str = ""

    @property
    def count(self) -> int:
        return len(self.entries)

    def save(self) -> None:
        doc = {
            "format_version": MANIFEST_VERSION,
            "count": self.count,
            "rejected": self.rejected,
            "config_hash": self.config_hash,
            "oracle": self.oracle,
            "task": self.task,
            "trajectories": [vars(e) for e in self.entries],
        }
        (self.root / MANIFEST_NAME).write_text(json.dumps(doc, sort_keys=True, indent=1))

    @classmethod
    def load(cls, root) -> "DatasetManifest":
        root = Path(root)
        doc = json.loads((root / MANIFEST_NAME).read_text())
        if doc.get("format_version") != MANIFEST_VERSION:
            raise TrajectoryError(
                f"unsupported manifest version {doc.get('format_version')}"
            )
        m = cls(
            root=root,
            rejected=doc.get("rejected", 0),
            config_hash=doc.get("config_hash", ""),
            oracle=doc.get("oracle", ""),
            task=doc.get("task", ""),
        )
        m.entries = [ManifestEntry(**e) for e in doc["trajectories"]]
        return m

    def add(self, rel_path: str, steps: int, success: bool, seed: int,
            split: str = "train") -> None:
        tdir = self.root / rel_path
        self.entries.append(
            ManifestEntry(
                path=rel_path,
                steps_sha256=sha256_file(tdir / "steps.bin"),
                meta_sha256=sha256_file(tdir / "meta.json"),
                steps=steps,
                success=success,
                seed=seed,
                split=split,
            )
        )

    def verify(self) -> None:
        """Raise ChecksumError on any mismatch (detects single-bit flips)."""
        for e in self.entries:
            tdir = self.root / e.path
            if sha256_file(tdir / "steps.bin") != e.steps_sha256:
                raise ChecksumError(f"checksum mismatch: {e.path}/steps.bin")
            if sha256_file(tdir / "meta.json") != e.meta_sha256:
                raise ChecksumError(f"checksum mismatch: {e.path}/meta.json")
