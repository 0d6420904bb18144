"""Run manifests and failure records written next to every command's artifacts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from bdepth import __version__
from bdepth.audit.report import jsonable
from bdepth.core.config import DepthConfig
from bdepth.core.errors import BdepthError
from bdepth.core.novikov import format_ext


def write_json(path: Path, data: Any) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n")


@dataclass
class RunManifest:
    """What a command was run on and with which settings.

    Holds no timestamps or absolute paths so identical runs write identical
    manifests.
    """

    command: str
    inputs: list[str] = field(default_factory=list)
    seed: int = 0
    cutoff: str = "auto"
    tolerance: float = 1e-8
    resolution: int = 200
    output_dir: str = "output"
    artifacts: list[str] = field(default_factory=list)
    version: str = __version__

    @classmethod
    def from_config(cls, command: str, config: DepthConfig, inputs: list[Path] | None = None) -> RunManifest:
        return cls(
            command=command,
            inputs=[str(p) for p in inputs or []],
            seed=config.seed,
            cutoff="auto" if config.cutoff is None else format_ext(config.cutoff),
            tolerance=config.tolerance,
            resolution=config.resolution,
            output_dir=str(config.output_dir),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "cutoff": self.cutoff,
            "tolerance": self.tolerance,
            "resolution": self.resolution,
            "output_dir": self.output_dir,
            "artifacts": sorted(self.artifacts),
            "version": self.version,
        }

    def save(self, path: Path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: Path) -> RunManifest:
        data = json.loads(path.read_text())
        return cls(**data)


def failure_record(manifest: RunManifest, error: BdepthError) -> dict[str, Any]:
    """Machine-readable description of a failed run."""
    return {
        "command": manifest.command,
        "seed": manifest.seed,
        "inputs": manifest.inputs,
        "error": type(error).__name__,
        "message": str(error),
        "details": error.details(),
    }


def write_failure(path: Path, manifest: RunManifest, error: BdepthError) -> None:
    write_json(path, failure_record(manifest, error))
