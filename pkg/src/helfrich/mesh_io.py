"""OFF and OBJ mesh file reading and writing.

Only positions and triangular faces are honored; every other record is
ignored on read. All file I/O of the package lives here; the rest of the
library works on in-memory meshes.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import MeshError
from .mesh import TriMesh

__all__ = ["read_mesh", "write_mesh", "read_off", "write_off", "read_obj", "write_obj"]


def read_mesh(path, allow_boundary=False):
    """Read a mesh, dispatching on the file extension (.off or .obj)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".off":
        return read_off(path, allow_boundary=allow_boundary)
    if ext == ".obj":
        return read_obj(path, allow_boundary=allow_boundary)
    raise MeshError(f"unsupported mesh format: {path}")


def write_mesh(path, mesh):
    """Write a mesh, dispatching on the file extension (.off or .obj)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".off":
        return write_off(path, mesh)
    if ext == ".obj":
        return write_obj(path, mesh)
    raise MeshError(f"unsupported mesh format: {path}")


def read_off(path, allow_boundary=False):
    """Read an OFF file (header OFF, then counts, vertices, faces)."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0].upper() not in ("OFF", "COFF", "NOFF"):
        raise MeshError(f"{path}: missing OFF header")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3  # vertex, face, edge counts
    verts = np.array(tokens[pos : pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise MeshError(f"{path}: non-triangle face with {k} vertices")
        faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 1 + k
    return TriMesh(verts, np.array(faces, dtype=np.int64), allow_boundary=allow_boundary)


def write_off(path, mesh):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.faces:
            fh.write(f"3 {a} {b} {c}\n")


def read_obj(path, allow_boundary=False):
    """Read a Wavefront OBJ file (v and f records only, 1-based indices)."""
    verts = []
    faces = []
    with open(path) as fh:
        for line in fh:
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise MeshError(f"{path}: non-triangle face record")
                idx = [int(p.split("/", 1)[0]) for p in parts[1:4]]
                faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    if not verts or not faces:
        raise MeshError(f"{path}: no geometry found")
    return TriMesh(np.array(verts), np.array(faces, dtype=np.int64), allow_boundary=allow_boundary)


def write_obj(path, mesh):
    with open(path, "w") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
