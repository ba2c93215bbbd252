"""
Artifact hashing and the pipeline manifest.

Every CLI command records what it wrote in a ``manifest.json`` next to its
output, so a run can be checked for reproducibility by re-hashing files.
"""

from __future__ import annotations

import os
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import PipelineError
from .serialization import canonical_dumps, read_json, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


class IntegrityError(PipelineError):
    """Raised when a manifest entry no longer matches its file"""
    pass


def hash_bytes(data: bytes) -> str:
    """
    Create a SHA-256 digest of raw bytes

    Args:
        data (bytes): Content to hash

    Returns:
        str: Hexadecimal hash string
    """
    hash_obj = hashlib.sha256()
    hash_obj.update(data)
    return hash_obj.hexdigest()


def hash_file(path: str, chunk_size: int = 65536) -> str:
    """Return the SHA-256 hex digest of a file's content"""
    hash_obj = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            hash_obj.update(chunk)
    return hash_obj.hexdigest()


def hash_config(data: Any) -> Optional[str]:
    """Hash a JSON-compatible configuration in its canonical form"""
    if data is None:
        return None
    return hash_bytes(canonical_dumps(data).encode('utf-8'))


@dataclass
class ArtifactEntry:
    path: str
    sha256: str
    command: str
    seed: Optional[int] = None
    config_hash: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            'path': self.path,
            'sha256': self.sha256,
            'command': self.command,
            'seed': self.seed,
            'config_hash': self.config_hash,
        }


@dataclass
class PipelineManifest:
    """Produced artifacts of a pipeline run, keyed by path relative to the manifest"""

    directory: str
    tool_version: str
    artifacts: dict[str, ArtifactEntry] = field(default_factory=dict)

    @property
    def path(self) -> str:
        return os.path.join(self.directory, MANIFEST_NAME)

    @classmethod
    def load(cls, directory: str, tool_version: str) -> PipelineManifest:
        """Load the manifest of `directory`, or start an empty one"""
        manifest = cls(directory=directory, tool_version=tool_version)
        manifest_path = manifest.path
        if os.path.exists(manifest_path):
            data = read_json(manifest_path)
            for item in data.get('artifacts', []):
                entry = ArtifactEntry(**item)
                manifest.artifacts[entry.path] = entry
        return manifest

    def record(
        self,
        artifact_path: str,
        command: str,
        seed: Optional[int] = None,
        config_hash: Optional[str] = None,
    ) -> ArtifactEntry:
        """Hash `artifact_path` and add or replace its entry"""
        relative = os.path.relpath(os.path.abspath(artifact_path), os.path.abspath(self.directory))
        relative = relative.replace(os.sep, '/')
        entry = ArtifactEntry(
            path=relative,
            sha256=hash_file(artifact_path),
            command=command,
            seed=seed,
            config_hash=config_hash,
        )
        self.artifacts[relative] = entry
        logger.debug(f"Recorded {relative} ({entry.sha256[:12]})")
        return entry

    def to_dict(self) -> dict:
        return {
            'tool_version': self.tool_version,
            'artifacts': [self.artifacts[key].to_dict() for key in sorted(self.artifacts)],
        }

    def save(self) -> str:
        os.makedirs(self.directory, exist_ok=True)
        write_json(self.path, self.to_dict())
        return self.path

    def verify(self) -> bool:
        """
        Re-hash every listed artifact

        Returns:
            bool: True when all files exist and match

        Raises:
            IntegrityError: On the first missing or modified artifact
        """
        for key in sorted(self.artifacts):
            entry = self.artifacts[key]
            full_path = os.path.join(self.directory, entry.path)
            if not os.path.exists(full_path):
                raise IntegrityError(f"Manifest artifact missing: {entry.path}")
            actual = hash_file(full_path)
            if actual != entry.sha256:
                raise IntegrityError(f"Manifest hash mismatch for {entry.path}: {actual} != {entry.sha256}")
        return True
