"""Run manifests and deterministic serialization.

Every CLI run directory is self-describing: manifest.json freezes the
command, the effective configuration, the RNG algorithm identities and the
content digests of all data outputs. Re-running with the same configuration
reproduces the data files byte for byte (timestamps live only in the
manifest). Floats are serialized with 17 significant digits, which
round-trips 64-bit values exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

RNG_IDS = {
    "graph": "python-random-mt19937",
    "ensemble": "numpy-pcg64-seedsequence",
    "chain": "numpy-pcg64-seedsequence",
}


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    rng_algorithms: dict = field(default_factory=lambda: dict(RNG_IDS))
    artifact_version: str = __version__
    started: str = ""
    finished: str = ""
    outputs: list = field(default_factory=list)

    def start(self) -> "RunManifest":
        self.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        return self

    def add_output(self, path) -> None:
        self.outputs.append({"path": Path(path).name, "sha256": sha256_file(path)})

    def finish(self, run_dir) -> Path:
        self.finished = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        out = Path(run_dir) / "manifest.json"
        write_json(out, {
            "command": self.command,
            "config": self.config,
            "rng_algorithms": self.rng_algorithms,
            "artifact_version": self.artifact_version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
        })
        return out


def read_manifest(run_dir) -> dict:
    with open(Path(run_dir) / "manifest.json", "r", encoding="utf-8") as fh:
        return json.load(fh)
