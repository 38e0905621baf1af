"""Tabular experiment reports and mesh/path exporters.

Data files are deterministic: floats print with 17 significant digits,
'.' decimal separator, '\n' line endings, and no wall-clock content; run
metadata (config echo, run id, timing) goes to a separate file excluded
from byte comparisons.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .meshing import GraphSurface


class IoError(OSError):
    """Export target could not be written."""


def format_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ExperimentReport:
    """Named numeric columns of equal length plus run metadata."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    allow_nan: bool = False

    def append(self, **values) -> None:
        if set(values) != set(self.columns):
            raise ValueError(f"row keys {sorted(values)} != columns {sorted(self.columns)}")
        row = [float(values[c]) for c in self.columns]
        if not self.allow_nan and any(np.isnan(v) for v in row):
            raise ValueError("NaN in report row without allow_nan")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([r[idx] for r in self.rows])

    def to_csv(self, path) -> None:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(",".join(self.columns) + "\n")
                for row in self.rows:
                    fh.write(",".join(format_float(v) for v in row) + "\n")
        except OSError as exc:
            raise IoError(str(exc)) from exc

    def to_json(self, path=None) -> str:
        payload = {"columns": self.columns,
                   "rows": [[float(v) for v in row] for row in self.rows]}
        text = json.dumps(payload, indent=2)
        if path is not None:
            try:
                with open(path, "w") as fh:
                    fh.write(text + "\n")
            except OSError as exc:
                raise IoError(str(exc)) from exc
        return text

    def write_meta(self, path) -> None:
        meta = dict(self.metadata)
        meta["wall_time_s"] = meta.get("wall_time_s", time.time())
        try:
            with open(path, "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True, default=str)
                fh.write("\n")
        except OSError as exc:
            raise IoError(str(exc)) from exc


def run_id(config: dict) -> str:
    """Deterministic short id from the canonicalized config."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def write_obj(graph: GraphSurface, path) -> None:
    """Wavefront export: 'v x y z' vertex lines, 1-indexed 'f' faces."""
    lifted = graph.lifted()
    try:
        with open(path, "w", newline="") as fh:
            for v in lifted:
                fh.write("v %s %s %s\n" % tuple(format_float(c) for c in v))
            for tri in graph.triangles:
                fh.write("f %d %d %d\n" % (tri[0] + 1, tri[1] + 1, tri[2] + 1))
    except OSError as exc:
        raise IoError(str(exc)) from exc


def read_obj(path):
    """Parse vertices and faces back from :func:`write_obj` output."""
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(x) - 1 for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int)


MESH_CSV_HEADER = ["x", "y", "z", "boundary", "conormal_z"]


def write_mesh_csv(graph: GraphSurface, path, conormal_z=None) -> None:
    """Vertex table with boundary flag and conormal value where defined
    (interior vertices carry 0 in the conormal column)."""
    lifted = graph.lifted()
    cvals = np.zeros(graph.n_vertices)
    if conormal_z is not None:
        cvals[graph.boundary_loop] = np.asarray(conormal_z, dtype=float)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(MESH_CSV_HEADER) + "\n")
            for i in range(graph.n_vertices):
                fh.write(",".join([
                    format_float(lifted[i, 0]),
                    format_float(lifted[i, 1]),
                    format_float(lifted[i, 2]),
                    "1" if graph.boundary_mask[i] else "0",
                    format_float(cvals[i]),
                ]) + "\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def write_path_csv(points, path) -> None:
    """Polyline export with columns x, y, z."""
    pts = np.asarray(points, dtype=float)
    try:
        with open(path, "w", newline="") as fh:
            fh.write("x,y,z\n")
            for p in pts:
                fh.write(",".join(format_float(c) for c in p) + "\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc
