"""CSV / JSON serialisation of result envelopes.

CSV layout: ``# key: <json>`` metadata lines, one header row, then data rows.
Floats are written with ``repr`` (shortest round-trip form), so re-parsing
reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sweep import SweepGrid


@dataclass
class ResultEnvelope:
    meta: dict
    data: dict = field(default_factory=dict)  # column name -> sequence, all equal length

    @property
    def columns(self) -> list[str]:
        return list(self.data)

    def rows(self):
        cols = [_plain_list(v) for v in self.data.values()]
        return zip(*cols)


def _plain(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _plain_list(v):
    return [_plain(x) for x in (v.tolist() if isinstance(v, np.ndarray) else v)]


def grid_envelope(grid: SweepGrid, meta: dict) -> ResultEnvelope:
    """Long format (x, y, value), x varying fastest."""
    xx, yy = np.meshgrid(grid.x_axis, grid.y_axis)
    meta = {**meta, **grid.meta, "x_name": grid.x_name, "y_name": grid.y_name}
    return ResultEnvelope(meta, {"x": xx.ravel(), "y": yy.ravel(), "value": grid.values.ravel()})


def render_csv(env: ResultEnvelope) -> str:
    buf = io.StringIO()
    for key, value in env.meta.items():
        buf.write(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(env.columns)
    for row in env.rows():
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def render_json(env: ResultEnvelope) -> str:
    payload = {"meta": _plain(env.meta), "data": {k: _plain_list(v) for k, v in env.data.items()}}
    return json.dumps(payload, indent=1, sort_keys=False) + "\n"


def _write(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e


def write_csv(env: ResultEnvelope, out=None) -> None:
    _write(render_csv(env), out)


def write_json(env: ResultEnvelope, out=None) -> None:
    _write(render_json(env), out)


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> ResultEnvelope:
    meta, data = {}, {}
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        elif line:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    cols = [[] for _ in header]
    for row in reader:
        for c, cell in zip(cols, row):
            c.append(_parse_cell(cell))
    data = dict(zip(header, cols))
    return ResultEnvelope(meta, data)


def read_json(path) -> ResultEnvelope:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return ResultEnvelope(payload["meta"], payload["data"])
