"""CLI contract: grammar, output format, determinism, exit codes."""

import math
import subprocess
import sys

import pytest

CIRCLE = """\
# circle as one looping edge
vertex a nk
edge loop a a {l}
""".format(l=2 * math.pi)

INTERVAL = """\
vertex u nk
vertex v nk
edge e u v {l}
""".format(l=math.pi)

PATH2 = """\
vertex u nk
vertex m nk
vertex v nk
edge e1 u m 1.0
edge e2 m v 1.4
"""

STAR3D = """\
vertex c nk
vertex v1 dirichlet
vertex v2 dirichlet
vertex v3 dirichlet
edge e1 c v1 1.0
edge e2 c v2 1.23
edge e3 c v3 1.57
"""

STAR3D_EQ = STAR3D.replace("1.23", "1.0").replace("1.57", "1.0")


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "graphspectra.cli", *args],
        capture_output=True, text=True, timeout=600,
    )


@pytest.fixture
def graph_file(tmp_path):
    def write(content, name="g.qg"):
        p = tmp_path / name
        p.write_text(content)
        return str(p)

    return write


def test_spectrum_circle_table(graph_file):
    res = run_cli("spectrum", graph_file(CIRCLE), "--kmax", "3.5")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0].split("\t") == ["k", "lambda", "multiplicity", "index", "residual"]
    rows = [l.split("\t") for l in lines[1:]]
    got = [(round(float(r[0]), 9), round(float(r[1]), 9), int(r[2])) for r in rows]
    assert got == [(0.0, 0.0, 1), (1.0, 1.0, 2), (2.0, 4.0, 2), (3.0, 9.0, 2)]


def test_byte_identical_reruns(graph_file):
    p = graph_file(STAR3D)
    a = run_cli("generic", p, "--trials", "3", "--eps", "0.02", "--n", "4", "--seed", "5")
    b = run_cli("generic", p, "--trials", "3", "--eps", "0.02", "--n", "4", "--seed", "5")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_interlace_margins(graph_file):
    res = run_cli("interlace", graph_file(INTERVAL), "--vertex", "v",
                  "--alphas", "0,inf", "--n", "12")
    assert res.returncode == 0
    header, row = res.stdout.strip().splitlines()
    cols = dict(zip(header.split("\t"), row.split("\t")))
    assert float(cols["margin"]) >= -1e-9
    assert cols["alpha_prime"] == "inf"


def test_modes_output(graph_file):
    res = run_cli("modes", graph_file(INTERVAL), "--n", "2", "--samples", "5")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0].split("\t") == ["n", "lambda", "edge", "x", "value"]
    assert len(lines) == 1 + 2 * 5


def test_manifold_components_line(graph_file):
    res = run_cli("manifold", graph_file(STAR3D), "--res", "32")
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "components: 2"


def test_mesh_and_field_outputs(tmp_path, graph_file):
    mesh = tmp_path / "m.mesh"
    res = run_cli("manifold", graph_file(STAR3D), "--res", "32", "--mesh", str(mesh))
    assert res.returncode == 0
    assert mesh.exists()
    content = mesh.read_text()
    assert "g component_1" in content and "\nv " in content and "\nf " in content


def test_trace_endpoint(graph_file):
    res = run_cli("trace", graph_file(STAR3D), "--leaf", "v1",
                  "--start", "4", "--turns", "2", "--steps", "80")
    assert res.returncode == 0
    lines = [l for l in res.stdout.strip().splitlines() if not l.startswith("#")]
    header = lines[0].split("\t")
    assert header[:3] == ["theta", "lambda", "extended_length"]
    assert "phi_residual" in header
    last = dict(zip(header, lines[-1].split("\t")))
    assert float(last["phi_residual"]) <= 1e-7


def test_exit_1_on_bad_input(graph_file, tmp_path):
    res = run_cli("spectrum", str(tmp_path / "missing.qg"))
    assert res.returncode == 1
    res = run_cli("spectrum", graph_file("vertex a bogus\n"))
    assert res.returncode == 1
    res = run_cli("generic", graph_file(CIRCLE), "--trials", "2")
    assert res.returncode == 1
    # Dirichlet requested at an internal vertex
    res = run_cli("interlace", graph_file(PATH2), "--vertex", "m", "--alphas", "0,inf")
    assert res.returncode == 1
    # usage error: unknown subcommand
    res = run_cli("frobnicate", graph_file(CIRCLE))
    assert res.returncode == 1


def test_exit_2_on_numerical_failure(graph_file):
    # tracing from inside the equilateral star's double eigenvalue
    res = run_cli("trace", graph_file(STAR3D_EQ), "--leaf", "v1",
                  "--start", "3", "--turns", "2", "--steps", "40")
    assert res.returncode == 2


def test_out_file_option(tmp_path, graph_file):
    out = tmp_path / "table.tsv"
    res = run_cli("--out", str(out), "spectrum", graph_file(INTERVAL), "--kmax", "2.5")
    assert res.returncode == 0
    assert res.stdout == ""
    assert out.read_text().startswith("k\tlambda\t")


def test_zero_trials_flagged(graph_file):
    res = run_cli("generic", graph_file(STAR3D), "--trials", "0")
    assert res.returncode == 0
    assert "pass_fraction: nan" in res.stdout
