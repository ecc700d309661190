"""Serialization helpers shared by the CLI and the HTTP service.

Everything here is deterministic: JSON is emitted with sorted keys,
CSV columns have fixed orders, and no artifact contains timestamps or
other volatile fields, so re-running a command yields byte-identical
files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

from .fusion import NoiseParams, Redundant, RepeatUntilSuccess, SchemeConfig, TreeEncoded

# fixed column orders for the two CSV artifacts
RUN_FIELDS = (
    "scheme",
    "size",
    "b_prep",
    "p_fail",
    "p_eras",
    "seed",
    "cycles",
    "time_cap",
    "config_hash",
)
SWEEP_FIELDS = (
    "scheme",
    "m_or_b",
    "p_fail",
    "p_eras",
    "trials",
    "success_rate",
    "mean_timesteps",
    "mean_photons",
)
SWEEP_PIPELINE_FIELDS = (
    "avg_exec_time",
    "shots_succeeded",
    "f_de",
    "f_fus",
    "f_osrp",
)


def canonical_json(doc) -> str:
    """Compact single-line JSON with sorted keys; rejects NaN."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(doc) -> str:
    """Short stable digest of a config document."""
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()[:16]


def write_json(path: str | Path, doc) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# -- scheme / noise documents ----------------------------------------------------


def scheme_to_doc(scheme: SchemeConfig) -> dict:
    if isinstance(scheme, TreeEncoded):
        return {"kind": "tree", "b": scheme.b, "b_prep": scheme.b_prep}
    return {"kind": scheme.name, "m": scheme.m}


def scheme_from_doc(doc: dict) -> SchemeConfig:
    kind = doc.get("kind")
    if kind == "tree":
        return TreeEncoded(b=int(doc["b"]), b_prep=int(doc.get("b_prep", 6)))
    if kind == "rus":
        return RepeatUntilSuccess(m=int(doc["m"]))
    if kind == "redundant":
        return Redundant(m=int(doc["m"]))
    raise ValueError(f"unknown scheme kind {kind!r}")


def noise_to_doc(noise: NoiseParams) -> dict:
    return {"p_fail": noise.p_fail, "p_eras": noise.p_eras, "rng_seed": noise.rng_seed}


def noise_from_doc(doc: dict) -> NoiseParams:
    return NoiseParams(
        p_fail=float(doc["p_fail"]),
        p_eras=float(doc["p_eras"]),
        rng_seed=int(doc.get("rng_seed", 0)),
    )


# -- CSV --------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict], fieldnames: tuple[str, ...] | list[str]) -> str:
    """Render rows with a fixed header; missing keys become empty cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_cell(row.get(name)) for name in fieldnames])
    return buf.getvalue()


def write_csv(path: str | Path, rows: list[dict], fieldnames) -> None:
    Path(path).write_text(rows_to_csv(rows, fieldnames), encoding="utf-8")


def parse_csv(text: str) -> tuple[list[str], list[dict]]:
    """Header plus rows of raw strings, as written by :func:`write_csv`."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV, expected a header row")
    rows = [dict(zip(header, line)) for line in reader]
    return header, rows


def read_csv(path: str | Path) -> tuple[list[str], list[dict]]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def merge_rows(tables: list[tuple[list[str], list[dict]]]) -> tuple[list[str], list[dict]]:
    """Concatenate tables; header is the union in first-seen order."""
    header: list[str] = []
    for table_header, _ in tables:
        for name in table_header:
            if name not in header:
                header.append(name)
    rows = [row for _, table_rows in tables for row in table_rows]
    return header, rows


def summarize_columns(header: list[str], rows: list[dict]) -> dict:
    """Count/mean/min/max for every column whose non-empty cells are numeric."""
    summary: dict[str, dict] = {}
    for name in header:
        values = []
        numeric = True
        for row in rows:
            cell = row.get(name, "")
            if cell == "":
                continue
            try:
                values.append(float(cell))
            except ValueError:
                numeric = False
                break
        if numeric and values:
            summary[name] = {
                "count": len(values),
                "mean": sum(values) / len(values),
                "min": min(values),
                "max": max(values),
            }
    return summary
