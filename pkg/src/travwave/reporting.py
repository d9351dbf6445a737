"""Deterministic experiment artifacts.

Every run writes CSV tables, a ``key=value`` summary and a ``manifest.json``
into its output directory.  Floats are serialized with ``%.17g`` (full
round-trip precision), writes are atomic (temp file + rename) and nothing
records wall-clock time, so re-running a command with the same configuration
reproduces every artifact bit for bit.  File stems carry a short hash of the
configuration, which keeps runs with different settings side by side in one
directory without clobbering.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Union

Scalar = Union[str, int, float, bool, None]

__all__ = [
    "fmt_scalar",
    "canonical_json",
    "config_hash",
    "write_text_atomic",
    "write_csv",
    "write_summary",
    "sha256_of_file",
    "write_manifest",
]


def fmt_scalar(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def canonical_json(obj) -> str:
    """Stable serialization used for hashing and the manifest."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: Mapping) -> str:
    digest = hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()
    return digest[:10]


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Scalar]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_scalar(v) for v in row))
    write_text_atomic(path, "\n".join(lines) + "\n")


def write_summary(path: Path, entries: Mapping[str, Scalar]) -> None:
    lines = [f"{key}={fmt_scalar(value)}" for key, value in entries.items()]
    write_text_atomic(path, "\n".join(lines) + "\n")


def sha256_of_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(
    out_dir: Path, command: str, config: Mapping, files: Sequence[Path]
) -> Path:
    """Record the command, its configuration and the artifact digests."""
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "outputs": {p.name: sha256_of_file(p) for p in sorted(files)},
    }
    path = out_dir / "manifest.json"
    write_text_atomic(path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path
