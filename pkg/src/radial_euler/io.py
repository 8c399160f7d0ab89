"""Durable outputs: ledger CSV, text snapshots and key = value manifests."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .dynamics import FieldState
from .eos import EosSpec
from .grid import RadialGrid

FLOAT_FMT = "%.16e"


class OutputError(OSError):
    """Raised when an output file cannot be written or read."""


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _fmt(x: float) -> str:
    return FLOAT_FMT % x if np.isfinite(x) else ("nan" if np.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_ledger_csv(ledger, path) -> Path:
    """Header naming every column, then one row per diagnostic time."""
    cols = ledger.columns
    lines = [",".join(cols)]
    for row in ledger.rows:
        lines.append(",".join(_fmt(row.get(c, np.nan)) for c in cols))
    return _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_csv_columns(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [line.strip().split(",") for line in fh if line.strip()]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def write_table_csv(path, columns, rows) -> Path:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(float(v)) if not isinstance(v, str) else v for v in row))
    return _atomic_write(Path(path), "\n".join(lines) + "\n")


def snapshot_path(directory, run_id: str, index: int) -> Path:
    return Path(directory) / f"snap_{run_id}_{index}"


def write_snapshot(state: FieldState, eos: EosSpec, path) -> Path:
    """Plain-text header (t, n, h, eos) and columns r, p, f, g at 17 significant digits."""
    grid = state.grid
    header = [
        f"# t = {state.t!r}",
        f"# n = {grid.n}",
        f"# h = {grid.h!r}",
        f"# eos = {eos.describe()}",
        "# columns = r p f g",
    ]
    cols = np.column_stack([grid.r, state.p, state.f, state.g])
    body = "\n".join(" ".join(FLOAT_FMT % x for x in row) for row in cols)
    return _atomic_write(Path(path), "\n".join(header) + "\n" + body + "\n")


def read_snapshot(path):
    """Returns ``(FieldState, eos descriptor string)``."""
    meta = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    data = np.array([[float(x) for x in line.split()] for line in body]).reshape(-1, 4)
    grid = RadialGrid(int(meta["n"]), float(meta["h"]))
    state = FieldState(float(meta["t"]), data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy(), grid)
    return state, meta.get("eos", "")


def write_manifest(path, entries: dict) -> Path:
    """``key = value`` lines, written to a temporary file and renamed into place."""
    lines = []
    for key, value in entries.items():
        text = str(value).replace("\n", " ")
        lines.append(f"{key} = {text}")
    return _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                key, _, value = line.partition("=")
                out[key.strip()] = value.strip()
    return out
