"""
Plain-text mesh format.

    # metadata: {...json...}
    <n_vertices> <n_triangles> <n_boundary_edges> <n_pairs> <mesh_size>
    x y                 (n_vertices lines)
    i j k               (n_triangles lines, 0-based)
    i j tag             (n_boundary_edges lines)
    i j                 (n_pairs lines)
"""

import json
from pathlib import Path
from typing import List

import numpy as np

from src.geometry.mesher import Mesh
from src.utils.errors import MeshingError
from src.utils.tables import to_serialisable

METADATA_PREFIX = '# metadata:'


def write_mesh(mesh: Mesh, path: str) -> str:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    lines: List[str] = [
        f"{METADATA_PREFIX} {json.dumps(to_serialisable(mesh.metadata), sort_keys=True)}",
        f"{mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_edges)} "
        f"{len(mesh.periodic_pairing)} {mesh.mesh_size!r}",
    ]
    lines.extend(f"{x!r} {y!r}" for x, y in mesh.vertices.tolist())
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist())
    lines.extend(f"{i} {j} {tag}" for (i, j), tag in zip(mesh.boundary_edges.tolist(), mesh.boundary_tags))
    lines.extend(f"{i} {j}" for i, j in mesh.periodic_pairing.tolist())
    target.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return str(target)


def read_mesh(path: str) -> Mesh:
    source = Path(path)
    if not source.exists():
        raise MeshingError(f"Mesh file not found: {path}")

    metadata = {}
    body: List[str] = []
    for raw in source.read_text(encoding='utf-8').splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(METADATA_PREFIX):
            metadata = json.loads(line[len(METADATA_PREFIX):])
        elif not line.startswith('#'):
            body.append(line)

    try:
        header = body[0].split()
        n_vertices, n_triangles, n_edges, n_pairs = (int(value) for value in header[:4])
        mesh_size = float(header[4])
        cursor = 1
        vertices = np.array([[float(v) for v in body[cursor + k].split()] for k in range(n_vertices)])
        cursor += n_vertices
        triangles = np.array([[int(v) for v in body[cursor + k].split()] for k in range(n_triangles)])
        cursor += n_triangles
        edge_rows = [body[cursor + k].split() for k in range(n_edges)]
        cursor += n_edges
        pairs = np.array([[int(v) for v in body[cursor + k].split()] for k in range(n_pairs)])
    except (IndexError, ValueError) as e:
        raise MeshingError(f"Malformed mesh file {path}: {e}") from e

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=np.array([[int(row[0]), int(row[1])] for row in edge_rows], dtype=np.int64),
        boundary_tags=tuple(row[2] for row in edge_rows),
        periodic_pairing=pairs,
        mesh_size=mesh_size,
        metadata=metadata,
    )
