"""Field and mesh export: legacy ASCII VTK and plain CSV."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .mesh import Mesh

_VTK_TRIANGLE = 5


def _g(v) -> str:
    return format(float(v), ".17g")


def write_vtk(path, mesh: Mesh, fields: dict, title="thermistor") -> None:
    """Write ``fields`` (name -> vertex values) as POINT_DATA scalars."""
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [f"{_g(x)} {_g(y)} 0" for x, y in mesh.vertices]
    nt = mesh.n_triangles
    lines.append(f"CELLS {nt} {4 * nt}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"CELL_TYPES {nt}")
    lines += [str(_VTK_TRIANGLE)] * nt
    lines.append(f"POINT_DATA {mesh.n_vertices}")
    for name, values in fields.items():
        values = mesh.check_field(values, name)
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines += [_g(v) for v in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_scalars(path) -> dict:
    """Read back POINT_DATA scalars written by :func:`write_vtk`."""
    tokens = Path(path).read_text().split("\n")
    out, i = {}, 0
    n = None
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("POINT_DATA"):
            n = int(line.split()[1])
        elif line.startswith("SCALARS") and n is not None:
            name = line.split()[1]
            out[name] = np.array([float(t) for t in tokens[i + 2 : i + 2 + n]])
            i += 1 + n
        i += 1
    return out


def write_field_csv(path, mesh: Mesh, values) -> None:
    values = mesh.check_field(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex_index", "x", "y", "value"])
        for k, ((x, y), v) in enumerate(zip(mesh.vertices, values)):
            w.writerow([k, _g(x), _g(y), _g(v)])


def read_field_csv(path, mesh: Mesh | None = None) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    idx = np.array([int(r["vertex_index"]) for r in rows])
    values = np.empty(len(rows))
    values[idx] = [float(r["value"]) for r in rows]
    if mesh is not None:
        xy = np.array([[float(r["x"]), float(r["y"])] for r in rows])
        if len(rows) != mesh.n_vertices or not np.allclose(xy, mesh.vertices[idx], rtol=0, atol=1e-12):
            raise ValueError(f"{path}: vertex layout does not match the mesh")
    return values


def write_rows_csv(path, header, rows) -> None:
    """CSV writer used for diagnostics and I-V tables (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_g(v) if isinstance(v, (float, np.floating)) else v for v in row])
