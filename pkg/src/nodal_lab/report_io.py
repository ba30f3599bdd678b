"""Writers and readers for the deterministic output files (JSON, CSV, mesh text).

All content files are deterministic: keys sorted, floats rendered by
Python's shortest round-trip repr (17 significant digits for mesh files),
LF line endings, no timestamps.  Wall-clock metadata goes to a sidecar
``*.meta.json`` next to each document so that byte comparison of the
documents themselves stays meaningful.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import os

import numpy as np

from .levelset import LevelSetMesh, hausdorff_measure

_MESH_TAGS = {0: "P", 1: "S", 2: "T"}


def jsonable(obj):
    """Recursively convert to plain JSON types; NaN and infinities become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_document(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json_document(path: str, doc: dict) -> None:
    """Write a deterministic JSON document plus its timestamp sidecar."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_document(doc))
    _write_sidecar(path)


def _write_sidecar(path: str) -> None:
    base, _ = os.path.splitext(path)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(base + ".meta.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps({"written_at": stamp}, sort_keys=True) + "\n")


def read_json_document(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def table_columns(rows) -> list[str]:
    """Canonical column order: the known scan columns, then extras sorted."""
    preferred = [
        "family",
        "index",
        "lambda",
        "l1",
        "l2",
        "sup",
        "grad_sup",
        "nodal_grad_sup",
        "nodal_measure",
        "weighted_nodal_integral",
        "ambiguity_fallbacks",
    ]
    dicts = [r if isinstance(r, dict) else r.as_dict() for r in rows]
    seen = set()
    for d in dicts:
        seen.update(d.keys())
    cols = [c for c in preferred if c in seen]
    cols += sorted(seen - set(cols))
    return cols


def write_csv_table(path: str, rows, columns=None) -> None:
    """RFC-4180-style CSV: header row, minimal quoting, UTF-8, LF endings."""
    dicts = [r if isinstance(r, dict) else r.as_dict() for r in rows]
    columns = columns or table_columns(dicts)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(columns)
        for d in dicts:
            writer.writerow([_cell(d.get(c, "")) for c in columns])


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def mesh_text(mesh: LevelSetMesh) -> str:
    """Plain-text mesh: one element per line, chart coordinates then |grad phi|.

    Line tags: P for points, S for segments, T for triangles; the header
    records the manifold dimension and the level value.
    """
    lines = [f"# level-set dim={mesh.manifold.intrinsic_dim} c={_g17(mesh.level)}"]
    tag = _MESH_TAGS[mesh.mesh_dim]
    for element in mesh.elements:
        coords: list[str] = []
        for v in element:
            coords.extend(_g17(c) for c in mesh.vertices[v])
        coords.extend(_g17(mesh.grad_norms[v]) for v in element)
        lines.append(tag + " " + " ".join(coords))
    return "\n".join(lines) + "\n"


def write_mesh_text(path: str, mesh: LevelSetMesh) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(mesh_text(mesh))


def mesh_document(mesh: LevelSetMesh) -> dict:
    """JSON form of a mesh, including the extraction metadata block."""
    return {
        "manifold": mesh.manifold.name,
        "level": mesh.level,
        "mesh_dim": mesh.mesh_dim,
        "vertices": mesh.vertices,
        "elements": mesh.elements,
        "grad_norms": mesh.grad_norms,
        "metadata": {
            "measure": hausdorff_measure(mesh),
            "vertex_count": mesh.num_vertices,
            "element_count": mesh.num_elements,
            "resolution": mesh.resolution,
            "ambiguity_fallbacks": mesh.ambiguity_fallbacks,
            "pole_cap": mesh.pole_cap,
            "newton_max_residual": mesh.newton_max_residual,
        },
    }
