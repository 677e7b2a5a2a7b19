"""Run directories: CSV artifacts, the config echo and the run manifest."""

import csv
import hashlib
import io
import json
import os
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import toml

from mcpinns import __version__
from mcpinns.config import RunConfig
from mcpinns.instrumentation import RunStats


def format_value(value: Any) -> str:
    """CSV cell text: floats in round-trip precision, None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def flatten_row(row: dict[str, Any]) -> dict[str, Any]:
    """Expand list-valued entries (velocity) into name1, name2, ... columns."""
    flat: dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            for i, item in enumerate(value, start=1):
                flat[f"{key}{i}"] = item
        else:
            flat[key] = value
    return flat


def config_hash(raw: dict[str, Any]) -> str:
    return hashlib.sha256(toml.dumps(raw).encode()).hexdigest()


class RunDirectory:
    """A private output directory for one CLI run."""

    def __init__(self, root: Path, command: str, run: RunConfig):
        self.root = Path(root)
        self.command = command
        self.run = run
        self.artifacts: list[str] = []
        self.stats = RunStats()
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        path = self.path(name)
        _atomic_write(path, buffer.getvalue())
        self.artifacts.append(name)
        return path

    def write_records(
        self, name: str, records: Sequence[dict[str, Any]], header: Sequence[str] | None = None
    ) -> Path:
        """CSV from dict rows; by default the header follows the first row's keys."""
        flat = [flatten_row(r) for r in records]
        if header is None:
            header = list(flat[0]) if flat else []
        return self.write_csv(name, header, ([r.get(k) for k in header] for r in flat))

    def write_json(self, name: str, data: dict[str, Any]) -> Path:
        path = self.path(name)
        _atomic_write(path, json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
        self.artifacts.append(name)
        return path

    def write_config_echo(self) -> Path:
        path = self.path("config.toml")
        _atomic_write(path, toml.dumps(self.run.raw))
        self.artifacts.append(path.name)
        return path

    def track(self, name: str) -> None:
        self.artifacts.append(name)

    def write_manifest(
        self,
        status: str,
        metrics: dict[str, Any] | None = None,
        error: str | None = None,
    ) -> Path:
        """Write ``manifest.json`` atomically; called once at run end."""
        self.stats.finish()
        manifest = {
            "command": self.command,
            "status": status,
            "version": __version__,
            "seed": self.run.seed,
            "workers": self.run.workers,
            "environment": self.run.environment,
            "config_source": self.run.source,
            "config_hash": config_hash(self.run.raw),
            "config": self.run.raw,
            "stats": self.stats.to_dict(),
            "metrics": metrics or {},
            "artifacts": sorted(set(self.artifacts)),
            "error": error,
        }
        path = self.path("manifest.json")
        _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
        return path
