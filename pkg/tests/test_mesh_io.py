import numpy as np
import pytest

from helfrich import shapes
from helfrich.errors import MeshError
from helfrich.mesh_io import read_mesh, read_obj, read_off, write_mesh


def test_off_roundtrip_exact(tmp_path, icosphere4):
    path = tmp_path / "m.off"
    write_mesh(path, icosphere4)
    back = read_mesh(path)
    assert np.array_equal(back.vertices, icosphere4.vertices)
    assert np.array_equal(back.faces, icosphere4.faces)


def test_obj_roundtrip_exact(tmp_path):
    mesh = shapes.torus(2.0, 1.0, 16, 8)
    path = tmp_path / "m.obj"
    write_mesh(path, mesh)
    back = read_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)


def test_off_comments_and_header(tmp_path):
    text = "OFF # comment\n# full comment line\n4 4 6\n"
    tet = shapes.tetrahedron()
    for v in tet.vertices:
        text += f"{v[0]} {v[1]} {v[2]}\n"
    for f in tet.faces:
        text += f"3 {f[0]} {f[1]} {f[2]} # face\n"
    path = tmp_path / "c.off"
    path.write_text(text)
    mesh = read_off(path)
    assert mesh.n_faces == 4


def test_obj_ignores_other_records(tmp_path):
    tet = shapes.tetrahedron()
    lines = ["# header", "o tetra", "mtllib none.mtl"]
    lines += [f"v {v[0]} {v[1]} {v[2]}" for v in tet.vertices]
    lines += ["vn 0 0 1", "vt 0.5 0.5", "s off"]
    lines += [f"f {a + 1}/1/1 {b + 1}/1/1 {c + 1}/1/1" for a, b, c in tet.faces]
    path = tmp_path / "r.obj"
    path.write_text("\n".join(lines) + "\n")
    mesh = read_obj(path)
    assert mesh.n_faces == 4
    assert np.array_equal(mesh.faces, tet.faces)


def test_bad_files_rejected(tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("NOT_OFF\n1 2 3\n")
    with pytest.raises(MeshError):
        read_off(p)
    q = tmp_path / "quad.obj"
    q.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(MeshError):
        read_obj(q)
    with pytest.raises(MeshError):
        read_mesh(tmp_path / "mesh.stl")
