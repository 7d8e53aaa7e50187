"""Deterministic CSV emission and run manifests.

Output files are pure functions of the manifest: fixed column order,
'.' decimal separator, scientific notation outside [1e-3, 1e6], no
timestamps.  Each run writes a manifest next to its outputs with the
fully resolved parameters, so re-running the manifest reproduces the
CSVs byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["format_value", "write_csv", "RunManifest",
           "write_manifest", "read_manifest", "manifest_path_for"]


def format_value(x) -> str:
    """Render one CSV cell deterministically."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0.0:
        return "0"
    if abs(v) < 1e-3 or abs(v) > 1e6:
        return f"{v:.12e}"
    return f"{v:.12g}"


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


@dataclass(frozen=True)
class RunManifest:
    """Self-describing record of one CLI run."""

    subcommand: str
    parameters: dict
    outputs: list[str] = field(default_factory=list)
    version: str = "0.1.0"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def manifest_path_for(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + ".manifest.json")


def write_manifest(manifest: RunManifest, out_path: str | Path) -> Path:
    path = manifest_path_for(out_path)
    path.write_text(manifest.to_json())
    return path


def read_manifest(path: str | Path) -> RunManifest:
    data = json.loads(Path(path).read_text())
    return RunManifest(
        subcommand=data["subcommand"],
        parameters=data["parameters"],
        outputs=list(data.get("outputs", [])),
        version=data.get("version", "0.1.0"),
    )
