"""CSV, profile and manifest writers.

Output is byte-for-byte reproducible: floats are written with ``repr``,
missing values as empty fields, flags as ``0``/``1``, and the manifest carries
no timestamps.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ExperimentConfig
from .experiments import RECORD_COLUMNS, ExperimentRecord


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "" if math.isnan(value) else repr(value)
    return str(value)


def record_columns(records: Sequence[ExperimentRecord]) -> list[str]:
    """Base columns followed by scenario extras in order of first appearance."""
    columns = list(RECORD_COLUMNS)
    for rec in records:
        for key in rec.extra:
            if key not in columns:
                columns.append(key)
    return columns


def write_table(path: str | os.PathLike, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_records(path: str | os.PathLike, records: Sequence[ExperimentRecord]) -> Path:
    columns = record_columns(records)
    rows = []
    for rec in records:
        values = rec.row()
        rows.append([values.get(col) for col in columns])
    return write_table(path, columns, rows)


def write_profiles(out_dir: str | os.PathLike, stem: str,
                   records: Sequence[ExperimentRecord]) -> list[Path]:
    """Write ``(x, abs_psi)`` and ``(k, abs_A)`` files for every record with profiles."""
    out_dir = Path(out_dir)
    paths = []
    for rec in records:
        if not rec.profiles:
            continue
        tag = f"{stem}_K{rec.K:g}_sigma{rec.sigma:g}_n{rec.n}"
        x, abs_psi = rec.profiles["psi"]
        k, abs_a = rec.profiles["A"]
        paths.append(write_table(out_dir / f"{tag}_psi.csv", ("x", "abs_psi"), zip(x, abs_psi)))
        paths.append(write_table(out_dir / f"{tag}_A.csv", ("k", "abs_A"), zip(k, abs_a)))
    return paths


def file_digest(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(scenario: str, cfg: ExperimentConfig, outputs: Sequence[Path],
                   out_dir: str | os.PathLike, version: str) -> dict:
    out_dir = Path(out_dir)
    body = {
        "scenario": scenario,
        "version": version,
        "config": asdict(cfg),
        "outputs": {str(Path(p).relative_to(out_dir)): file_digest(p) for p in outputs},
    }
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    body["hash"] = hashlib.sha256(canonical.encode()).hexdigest()
    return body


def write_manifest(out_dir: str | os.PathLike, scenario: str, cfg: ExperimentConfig,
                   outputs: Sequence[Path], version: str) -> Path:
    manifest = build_manifest(scenario, cfg, outputs, out_dir, version)
    path = Path(out_dir) / f"{scenario}.manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path
