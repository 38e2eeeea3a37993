import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rmf import io as rio
from rmf.cli import main
from rmf.curves import chen_rectifying_curve, planar_circle

SVG = "{http://www.w3.org/2000/svg}"


def run(*argv):
    return main([str(a) for a in argv])


def test_demo_helix_default(tmp_path, capsys):
    assert run("demo-helix", "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "kappa = 0.0384" in out and "tau   = 0.0112" in out
    rows = (tmp_path / "beta1.csv").read_text().splitlines()
    assert rows[0] == "s,x1,x2,x3"
    first = np.array([float(v) for v in rows[1].split(",")])
    assert first[0] == 1e-6
    assert np.allclose(first[1:], [0, -0.28, 0.96], atol=1e-6)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["kappa_error_analytic"] < 1e-9 and rep["tau_error_analytic"] < 1e-9
    assert rep["kappa_error_fd"] < 1e-6 and rep["tau_error_fd"] < 1e-6
    root = ET.parse(tmp_path / "beta2.svg").getroot()
    assert len(root.findall(f"{SVG}polyline")) == 1


def test_demo_helix_singular_range(tmp_path, capsys):
    assert run("demo-helix", "--range", "100:150", "--out", tmp_path) == 3
    assert "140.249672" in capsys.readouterr().err


def test_frame_commands(tmp_path):
    assert run("frame", "--curve", "helix", "--method", "frenet", "--samples", 5, "--out", tmp_path / "h.json") == 0
    recs = json.loads((tmp_path / "h.json").read_text())
    assert recs[0]["xi"][0] == [0.0, 0.96, 0.28]
    assert not (tmp_path / "h.curvatures.csv").exists()
    assert run("frame", "--curve", "line", "--method", "rmf-dr", "--out", tmp_path / "l.json") == 0
    frames = np.array([r["xi"] for r in json.loads((tmp_path / "l.json").read_text())])
    assert np.allclose(frames, frames[0])
    assert (tmp_path / "l.curvatures.csv").read_text().startswith("s,k1,k2\n")
    assert run("frame", "--curve", "helix", "--method", "rmf-ode", "--samples", 2001, "--out", tmp_path / "o.json") == 0


def test_frame_csv_circle_ez_constant(tmp_path):
    c = planar_circle(1.0)
    s = np.linspace(0, 2 * np.pi, 400)
    p = tmp_path / "circle.csv"
    rio._write_text(p, rio.curve_csv(s, c.position(s)))
    assert run("frame", "--input", p, "--out", tmp_path / "f.json") == 0
    frames = np.array([r["xi"] for r in json.loads((tmp_path / "f.json").read_text())])
    ez = np.abs(frames[:, :, 2]).argmax(axis=1)
    col = frames[np.arange(len(frames)), ez]
    assert np.allclose(np.abs(col), [0, 0, 1], atol=1e-9)


def test_curvature_command(tmp_path):
    out = tmp_path / "k.csv"
    assert run("curvature", "--curve", "helix", "--method", "frenet", "--samples", 5, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "s,k1,k2,kappa,tau,theta"
    assert lines[1] == "0,0.0384,0,0.0384,0.0112,0"
    assert run("curvature", "--curve", "circle:1", "--dim", 4, "--samples", 101, "--out", out) == 0
    assert out.read_text().startswith("s,k1,k2,k3\n")


def test_construct_commands(tmp_path):
    out = tmp_path / "b2.csv"
    assert run("construct", "--curve", "helix", "--type", 2, "--constants", 1, "--method", "frenet",
               "--samples", 1201, "--out", out) == 0
    rep = json.loads((tmp_path / "b2.report.json").read_text())
    assert rep["free_coefficient"]["constancy"] == "constant"
    assert rep["free_coefficient"]["min"] == pytest.approx(7 / 24, abs=1e-12)
    assert np.allclose(rep["helix_axis"]["axis"], [0, 0, 1], atol=1e-9)

    out = tmp_path / "b1.csv"
    assert run("construct", "--curve", "helix", "--type", 1, "--constants", 1, "--method", "rmf-ode",
               "--samples", 1201, "--out", out) == 0
    coeffs = np.loadtxt(tmp_path / "b1.coeffs.csv", delimiter=",", skiprows=1)
    assert np.abs(coeffs[:, 1] + np.tan(7 * coeffs[:, 0] / 625)).max() < 1e-8

    out = tmp_path / "z.csv"
    assert run("construct", "--curve", "helix", "--type", 1, "--constants", 0, "--out", out) == 0
    rep = json.loads((tmp_path / "z.report.json").read_text())
    assert rep["derivative_check"]["xi1_residual"] == 0
    pts = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.all(pts[:, 1:] == 0)


def test_construct_spec_file_and_free_const(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text('{"n": 3, "type_index": 2, "constants": [1.0]}')
    assert run("construct", "--curve", "helix", "--spec", spec, "--method", "frenet", "--out", tmp_path / "a.csv") == 0
    assert run("construct", "--curve", "helix", "--type", 2, "--free-const", 0.5, "--method", "frenet",
               "--out", tmp_path / "b.csv") == 0
    rep = json.loads((tmp_path / "b.report.json").read_text())
    assert rep["free_coefficient"]["derived"] is False
    assert rep["derivative_check"]["xi1_residual"] > 1e-3


def test_construct_singularity_exit(tmp_path, capsys):
    # the Bishop angle starts at 0 on the first sample, so k_1 vanishes at 625 pi / 14
    assert run("construct", "--curve", "helix", "--range", "0:150", "--type", 1, "--method", "rmf-ode",
               "--samples", 5001, "--out", tmp_path / "x.csv") == 3
    assert "vanishes" in capsys.readouterr().err


def test_classify_commands(tmp_path):
    out = tmp_path / "c.json"
    assert run("classify", "--curve", "helix", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert {k: v["verdict"] for k, v in rep.items()} == {
        "helix": "yes", "spherical": "no", "rectifying-chen": "no", "bertrand": "yes"
    }
    assert run("classify", "--curve", "great-circle", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["spherical"]["verdict"] == "yes" and rep["spherical"]["params"][3] == pytest.approx(1.0)
    chen = chen_rectifying_curve(step=2e-2)  # coarse step keeps 12-digit rounding harmless
    p = tmp_path / "chen.csv"
    rio.write_curve_csv(p, chen)
    assert run("classify", "--input", p, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["rectifying-chen"]["verdict"] == "yes" and rep["rectifying-chen"]["params"][0] > 0


def test_export_commands(tmp_path, capsys):
    assert run("demo-helix", "--out", tmp_path) == 0
    svg = tmp_path / "b1.svg"
    assert run("export", "--input", tmp_path / "beta1.csv", "--out", svg) == 0
    n_rows = len((tmp_path / "beta1.csv").read_text().splitlines()) - 1
    line = ET.parse(svg).getroot().find(f"{SVG}polyline")
    assert len(line.get("points").split()) == n_rows
    assert run("export", "--input", tmp_path / "beta1.csv", "--input", tmp_path / "beta2.csv", "--out", svg) == 0
    assert len(ET.parse(svg).getroot().findall(f"{SVG}polyline")) == 2
    assert run("export", "--curve", "helix", "--project", "xy", "--out", svg) == 0
    x0, y0, w, h = map(float, ET.parse(svg).getroot().get("viewBox").split())
    assert w / 1.1 == pytest.approx(48, rel=1e-3) and h / 1.1 == pytest.approx(48, rel=1e-3)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    capsys.readouterr()
    assert run("export", "--input", empty) == 2
    assert "no samples" in capsys.readouterr().err
    assert run("export", "--curve", "helix", "--project", "ab") == 2
    assert run("export", "--curve", "helix", "--format", "csv", "--samples", 4, "--out", tmp_path / "h.csv") == 0
    assert len((tmp_path / "h.csv").read_text().splitlines()) == 5


def test_usage_and_io_errors(tmp_path, capsys):
    assert run("frame") == 2
    assert run("bogus") == 2
    assert run("frame", "--curve", "helix", "--input", "x.csv") == 2
    assert run("frame", "--curve", "spiral") == 2
    assert run("frame", "--curve", "helix", "--range", "5:1") == 2
    assert run("classify", "--input", tmp_path / "missing.csv") == 4
    assert run("frame", "--curve", "helix", "--out", tmp_path / "no" / "dir.json") == 4
    assert run("construct", "--curve", "helix") == 2


def test_rmf_tol_env(tmp_path, monkeypatch):
    out = tmp_path / "c.json"
    monkeypatch.setenv("RMF_TOL", "1e-20")
    assert run("classify", "--curve", "helix", "--out", out) == 0
    assert json.loads(out.read_text())["helix"]["verdict"] != "yes"
    monkeypatch.setenv("RMF_TOL", "nope")
    assert run("classify", "--curve", "helix", "--out", out) == 2
