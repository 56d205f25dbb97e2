import json
import os

import numpy as np
import pytest

from helfrich import shapes
from helfrich.cli import main, thread_cap
from helfrich.mesh_io import read_mesh, write_mesh
from helfrich.serialize import dumps


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    sphere = shapes.icosphere(3)
    write_mesh(d / "sphere.off", sphere)
    write_mesh(d / "sphere.obj", sphere)
    split = shapes.octasphere(5)
    write_mesh(d / "split.off", split)
    np.savetxt(d / "labels.txt", shapes.equator_phase_labels(split), fmt="%d")
    return d


def run(args):
    return main([str(a) for a in args])


def test_hessian_command(workdir, capsys):
    rc = run(["hessian", "--beta", "2", "--gamma", "-1", "--out", workdir / "h.json"])
    assert rc == 0
    data = json.load(open(workdir / "h.json"))
    assert data["verdict"] == "strictly_convex"
    eigs = sorted(set(round(x, 10) for x in data["eigenvalues_closed_form"]))
    assert eigs == [0.5, 3.5]
    assert "3.5" in capsys.readouterr().err


def test_eval_command_sphere(workdir):
    rc = run(
        ["eval", "--mesh", workdir / "sphere.off", "--beta", "1", "--gamma", "0",
         "--h0", "0", "--out", workdir / "eval.json"]
    )
    assert rc == 0
    data = json.load(open(workdir / "eval.json"))
    assert abs(data["total"] - 8 * np.pi) < 0.02 * 8 * np.pi
    assert abs(data["willmore_quarter"] - 4 * np.pi) < 0.02 * 4 * np.pi
    assert abs(data["willmore_varifold"] - 4 * data["willmore_quarter"]) < 1e-9


def test_eval_idempotent_bytes(workdir):
    for name in ("a.json", "b.json"):
        assert run(
            ["eval", "--mesh", workdir / "sphere.off", "--beta", "1.5", "--gamma", "-0.5",
             "--h0", "0.25", "--out", workdir / name]
        ) == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


def test_config_equals_flags(workdir):
    config = {
        "mesh": str(workdir / "sphere.off"),
        "params": [{"beta": 1.5, "gamma": -0.5, "h0": 0.25, "sigma": 0.0}],
    }
    (workdir / "cfg.json").write_text(dumps(config))
    assert run(["eval", "--config", workdir / "cfg.json", "--out", workdir / "c.json"]) == 0
    assert (workdir / "c.json").read_bytes() == (workdir / "a.json").read_bytes()
    # flag overrides config field
    assert run(
        ["eval", "--config", workdir / "cfg.json", "--h0", "0.0", "--out", workdir / "d.json"]
    ) == 0
    assert (workdir / "d.json").read_bytes() != (workdir / "a.json").read_bytes()


def test_eval_multiphase(workdir):
    rc = run(
        ["eval", "--mesh", workdir / "split.off", "--phases", workdir / "labels.txt",
         "--beta", "1,1", "--gamma", "0,0", "--h0", "0,0", "--sigma", "1,1",
         "--out", workdir / "mp.json"]
    )
    assert rc == 0
    data = json.load(open(workdir / "mp.json"))
    assert abs(data["line_tension"] - 4 * np.pi) < 0.02 * 4 * np.pi
    assert len(data["phases"]) == 2


def test_minimize_command_outputs(workdir):
    sphere = read_mesh(workdir / "sphere.off")
    rc = run(
        ["minimize", "--mesh", workdir / "sphere.off", "--beta", "1", "--gamma", "0",
         "--h0", "0", "--area", sphere.total_area(), "--volume", "4.1",
         "--max-iterations", "40", "--out-dir", workdir / "run",
         "--out", workdir / "min.json"]
    )
    assert rc == 0
    assert sorted(os.listdir(workdir / "run")) == ["final.off", "state.json", "trajectory.csv"]
    lines = (workdir / "run" / "trajectory.csv").read_text().splitlines()
    assert lines[0].startswith("iteration,outer,energy,augmented,bending")
    assert len(lines) > 2
    final = read_mesh(workdir / "run" / "final.off")
    assert final.n_vertices == sphere.n_vertices
    state = json.load(open(workdir / "min.json"))
    assert state["termination"] in ("converged", "max_iterations")


def test_verify_command(workdir):
    rc = run(["verify", "--mesh", workdir / "sphere.off", "--out", workdir / "ver.json"])
    assert rc == 0
    data = json.load(open(workdir / "ver.json"))
    assert data["all_pass"] is True
    checks = data["reports"][0]["checks"]
    names = [c["name"] for c in checks]
    assert names == sorted(names)
    assert any(n.startswith("diameter/") for n in names)


def test_overlap_command_pass_and_fail(workdir):
    rc = run(
        ["overlap", "--mesh", workdir / "split.off", "--phases", workdir / "labels.txt",
         "--eps0", "0.15", "--n-eps", "6", "--out", workdir / "ovl.json"]
    )
    assert rc == 0
    data = json.load(open(workdir / "ovl.json"))
    assert data["passed"] and 2.7 <= data["slope"] <= 3.3
    # identical supports overlap on a surface: gate fails, exit 4
    rc = run(
        ["overlap", "--mesh", workdir / "split.off", "--mesh-b", workdir / "split.off",
         "--eps0", "0.3", "--n-eps", "6", "--out", workdir / "ovl2.json"]
    )
    assert rc == 4
    assert json.load(open(workdir / "ovl2.json"))["passed"] is False


def test_exit_codes(workdir):
    assert run(["hessian", "--beta", "2"]) == 1  # missing --gamma
    assert run(["eval", "--mesh", workdir / "nonexistent.off", "--beta", "1"]) == 1
    assert run(
        ["minimize", "--mesh", workdir / "sphere.off", "--beta", "1",
         "--area", "1.0", "--volume", "10.0"]
    ) == 2  # isoperimetrically infeasible
    # two-phase labels with a single parameter set
    assert run(
        ["eval", "--mesh", workdir / "split.off", "--phases", workdir / "labels.txt",
         "--beta", "1"]
    ) == 1


def test_obj_reader_matches_off(workdir):
    a = read_mesh(workdir / "sphere.off")
    b = read_mesh(workdir / "sphere.obj")
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.faces, b.faces)


def test_thread_cap(monkeypatch):
    monkeypatch.delenv("HELFRICH_THREADS", raising=False)
    assert thread_cap() >= 1
    monkeypatch.setenv("HELFRICH_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("HELFRICH_THREADS", "0")
    with pytest.raises(ValueError):
        thread_cap()
