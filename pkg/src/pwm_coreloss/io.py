"""CSV/JSON/TOML readers and writers for waveforms, loss maps, cores and materials."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import tomli

from .errors import ValidationError
from .loss import LossMapTable, SteinmetzParams
from .magnetics import CoreSpec
from .signal import TimeSeries

LOSS_MAP_HEADER = ("f_hz", "delta_b_T", "energy_density_J_per_m3")


def fmt(x) -> str:
    """Fixed 9-significant-digit text for floats; everything else via ``str``."""
    if isinstance(x, (float, np.floating)):
        if x == 0:
            return "0"
        return f"{float(x):.9g}"
    return str(x)


def rounded(x):
    """Round floats (recursively) to 9 significant digits for JSON output."""
    if isinstance(x, dict):
        return {k: rounded(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [rounded(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt(x)) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rounded(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    return [c.strip() for c in rows[0]], rows[1:]


def write_waveform_csv(path, columns: dict[str, TimeSeries], drop_closing: bool = False) -> None:
    """``time_s`` plus one column per series; ``drop_closing`` omits the repeated last sample."""
    series = list(columns.values())
    first = series[0]
    for s in series[1:]:
        if not first.aligned_with(s):
            raise ValidationError("waveform columns must share one time base")
    n = first.n - 1 if drop_closing else first.n
    t = first.times[:n]
    data = [s.values[:n] for s in series]
    write_csv(path, ("time_s", *columns), (tuple([t[k]] + [d[k] for d in data]) for k in range(n)))


def read_waveform_csv(path, close_period: bool = False, rel_tol: float = 1e-6) -> dict[str, TimeSeries]:
    """Read a ``time_s,<name>...`` file into aligned series.

    Sample times must be uniform: each time may deviate from the fitted grid
    by at most ``rel_tol`` of the total span.  ``close_period`` appends the
    first sample so an open periodic capture becomes the closed layout.
    """
    header, rows = _read_rows(path)
    if not header or header[0] != "time_s" or len(header) < 2:
        raise ValidationError(f"{path}: header must be 'time_s,<name>[,<name>...]'")
    width = len(header)
    for k, r in enumerate(rows, start=2):
        if len(r) != width or any(not c.strip() for c in r):
            raise ValidationError(f"{path}: line {k} has {len(r)} fields, expected {width} (mismatched column lengths)")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric value ({exc})") from None
    if data.shape[0] < 2:
        raise ValidationError(f"{path}: need at least 2 samples")
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        raise ValidationError(f"{path}: time_s must be strictly increasing")
    n = t.size
    dt = (t[-1] - t[0]) / (n - 1)
    grid = t[0] + dt * np.arange(n)
    if np.max(np.abs(t - grid)) > rel_tol * (t[-1] - t[0]):
        raise ValidationError(f"{path}: time_s is not uniformly spaced (tolerance {rel_tol:g} of span)")
    out = {}
    for j, name in enumerate(header[1:], start=1):
        vals = data[:, j]
        if close_period:
            vals = np.append(vals, vals[0])
        out[name] = TimeSeries(float(t[0]), float(dt), vals, _unit_from_name(name))
    return out


def _unit_from_name(name: str) -> str:
    suffix = name.rsplit("_", 1)[-1] if "_" in name else ""
    return suffix if suffix in ("V", "A", "T", "W", "J") else ""


def write_loss_map_csv(path, table: LossMapTable) -> None:
    rows = []
    if table.bias_axis is None:
        for i, f in enumerate(table.f_axis):
            for j, db in enumerate(table.db_axis):
                rows.append((f, db, table.energy[i, j]))
        write_csv(path, LOSS_MAP_HEADER, rows)
        return
    for i, f in enumerate(table.f_axis):
        for j, db in enumerate(table.db_axis):
            for k, bias in enumerate(table.bias_axis):
                rows.append((f, db, table.energy[i, j, k], bias))
    write_csv(path, LOSS_MAP_HEADER + ("b_bias_T",), rows)


def read_loss_map_csv(path, clamp: bool = False) -> LossMapTable:
    header, rows = _read_rows(path)
    if tuple(header[:3]) != LOSS_MAP_HEADER or len(header) not in (3, 4) or (len(header) == 4 and header[3] != "b_bias_T"):
        raise ValidationError(f"{path}: header must be {','.join(LOSS_MAP_HEADER)}[,b_bias_T]")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValidationError(f"{path}: ragged loss map")
    f_axis = np.unique(data[:, 0])
    db_axis = np.unique(data[:, 1])
    axes = [f_axis, db_axis]
    cols = [0, 1]
    if len(header) == 4:
        axes.append(np.unique(data[:, 3]))
        cols.append(3)
    shape = tuple(a.size for a in axes)
    if data.shape[0] != int(np.prod(shape)):
        raise ValidationError(f"{path}: {data.shape[0]} rows do not form a full {'x'.join(map(str, shape))} grid")
    grid = np.full(shape, np.nan)
    for row in data:
        idx = tuple(int(np.searchsorted(ax, row[c])) for ax, c in zip(axes, cols))
        grid[idx] = row[2]
    if np.any(np.isnan(grid)):
        raise ValidationError(f"{path}: loss map has duplicate or missing grid nodes")
    return LossMapTable(f_axis, db_axis, grid, axes[2] if len(axes) == 3 else None, clamp)


def read_mapping(path) -> dict:
    """A flat key/value file, TOML or JSON by suffix."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".json":
        return json.loads(text)
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def core_from_mapping(d: dict, where: str = "core") -> CoreSpec:
    try:
        return CoreSpec(n1=float(d["n1"]), n2=float(d["n2"]), ae=float(d["ae_m2"]), le=float(d["le_m"]),
                        ve=float(d["ve_m3"]), name=str(d.get("name", "")))
    except KeyError as exc:
        raise ValidationError(f"{where}: missing key {exc.args[0]!r}") from None


def steinmetz_from_mapping(d: dict, where: str = "backend") -> SteinmetzParams:
    try:
        return SteinmetzParams(
            k=float(d["k"]), alpha=float(d["alpha"]), beta=float(d["beta"]),
            valid_f=(float(d.get("f_min_hz", 0.0)), float(d.get("f_max_hz", math.inf))),
            valid_b=(float(d.get("b_min_T", 0.0)), float(d.get("b_max_T", math.inf))),
        )
    except KeyError as exc:
        raise ValidationError(f"{where}: missing key {exc.args[0]!r}") from None
