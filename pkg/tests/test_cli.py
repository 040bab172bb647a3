import csv
import json

import numpy as np
import pytest

from uwcolor.cli import main
from uwcolor.imaging import read_image, write_image


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def chart_frame(tmp_path):
    """A simulated chart frame (lossless .npy) with its layout and ground truth."""
    args = ["simulate", "--chart", "--size", "320x240", "--layout-out", str(tmp_path / "layout.json"),
            "--output", str(tmp_path / "raw.npy"), "--z", "0.33", "--depth", "6"]
    assert main(args) == 0
    truth = json.loads((tmp_path / "raw.json").read_text())
    return tmp_path / "raw.npy", tmp_path / "layout.json", truth


def test_simulate_writes_sidecar(chart_frame):
    _, _, truth = chart_frame
    assert truth["water_type"] == "IA" and truth["z"] == 0.33
    assert truth["beta_d"] != truth["beta_b"]


def test_simulate_with_z_map(tmp_path, rng):
    write_image(tmp_path / "in.npy", rng.uniform(size=(6, 8, 3)))
    np.save(tmp_path / "z.npy", np.linspace(0.2, 2.0, 48).reshape(6, 8))
    coeffs = {"beta_d": [0.5, 0.2, 0.1], "beta_b": [0.3, 0.2, 0.1], "provenance": "manual"}
    (tmp_path / "c.json").write_text(json.dumps(coeffs))
    rc = main(["simulate", "--input", str(tmp_path / "in.npy"), "--output", str(tmp_path / "out.npy"),
               "--z-map", str(tmp_path / "z.npy"), "--coeffs", str(tmp_path / "c.json"),
               "--b-inf", "0.1", "0.3", "0.5"])
    assert rc == 0
    side = json.loads((tmp_path / "out.json").read_text())
    assert side["z"]["map_shape"] == [6, 8] and "water_type" not in side


def test_estimate_recovers_truth(chart_frame, tmp_path):
    raw, layout, truth = chart_frame
    out = tmp_path / "c.json"
    rc = main(["estimate", "--frame", str(raw), "0.33", "6", "--layout", str(layout), "--output", str(out)])
    assert rc == 0
    got = json.loads(out.read_text())
    assert got["provenance"] == "estimated"
    np.testing.assert_allclose(got["beta_d"], truth["beta_d"], rtol=1e-6)
    np.testing.assert_allclose(got["beta_b"], truth["beta_b"], rtol=1e-6)


def test_estimate_pooled(chart_frame, tmp_path, capsys):
    raw, layout, truth = chart_frame
    rc = main(["estimate", "--frame", str(raw), "0.33", "6", "--frame", str(raw), "0.33", "6",
               "--layout", str(layout), "--pooled", "--b-inf", *map(str, truth["b_inf"])])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["provenance"] == "optimized"
    np.testing.assert_allclose(got["beta_d"], truth["beta_d"], rtol=1e-6)


def test_correct_job(chart_frame, tmp_path, capsys):
    raw, layout, truth = chart_frame
    job = {"image": raw.name, "output": "out.npy", "z": 0.33, "chart_layout": layout.name,
           "coefficients": {"source": "chart"}, "veiling": {"source": "manual", "b_inf": truth["b_inf"]}}
    (tmp_path / "job.json").write_text(json.dumps(job))
    assert main(["correct", "--job", str(tmp_path / "job.json")]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads((tmp_path / "out.json").read_text())
    assert read_image(tmp_path / "out.npy").shape == (240, 320, 3)


def test_correct_sparse(tmp_path, rng):
    img = rng.uniform(size=(40, 40, 3))
    write_image(tmp_path / "in.npy", img)
    (tmp_path / "m.csv").write_text("x,y,z\n5,5,0.5\n30,30,1.0\n")
    job = {"image": "in.npy", "output": "out.npy",
           "coefficients": {"source": "manual", "beta_d": [0.5] * 3, "beta_b": [0.2] * 3},
           "veiling": {"source": "manual", "b_inf": [0.1] * 3}}
    (tmp_path / "job.json").write_text(json.dumps(job))
    rc = main(["correct-sparse", "--job", str(tmp_path / "job.json"), "--map", str(tmp_path / "m.csv"),
               "--patch-px", "8", "-q"])
    assert rc == 0
    out = read_image(tmp_path / "out.npy")
    np.testing.assert_array_equal(out[15:25, 15:25], img[15:25, 15:25])
    assert json.loads((tmp_path / "out.json").read_text())["patch_px"] == 8


def test_evaluate_csvs(chart_frame, tmp_path, capsys):
    raw, layout, _ = chart_frame
    acc = tmp_path / "acc.csv"
    rc = main(["evaluate", "--layout", str(layout), "--method", "Raw 8m", str(raw), str(raw),
               "--method", "single", str(raw), "--accuracy-csv", str(acc), "--patches", "white", "blue"])
    assert rc == 0
    rows = read_csv(acc)
    assert [(r["patch"], r["method"]) for r in rows] == [("white", "Raw 8m"), ("blue", "Raw 8m"),
                                                         ("white", "single"), ("blue", "single")]
    cons = read_csv(tmp_path / "consistency.csv")
    assert {r["method"] for r in cons} == {"Raw 8m"}
    assert float(cons[0]["variance"]) == 0.0
    assert "single" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--output", "x.png", "--z", "1"],
        ["simulate", "--chart", "--output", "x.png", "--z", "-1", "--depth", "5"],
        ["simulate", "--chart", "--output", "x.png", "--z", "1", "--depth", "5", "--water-type", "XX"],
        ["correct", "--job", "missing.json"],
    ],
)
def test_validation_exit_code(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_bad_keypoint_map_exit_code(tmp_path):
    write_image(tmp_path / "in.npy", np.zeros((10, 10, 3)))
    (tmp_path / "m.csv").write_text("x,y,z\n5,5,-1\n")
    job = {"image": "in.npy", "sparse_map": "m.csv", "coefficients": {"source": "manual"},
           "veiling": {"source": "manual", "b_inf": [0, 0, 0]}}
    (tmp_path / "job.json").write_text(json.dumps(job))
    assert main(["correct-sparse", "--job", str(tmp_path / "job.json")]) == 2


def test_numerical_exit_code(tmp_path, capsys):
    # a water table with zero beam attenuation leaves the veiling integrand undefined
    wl = np.arange(400, 701, 10)
    rows = ["wavelength_nm,a,b,kd"] + [f"{w},0,0,0.1" for w in wl]
    (tmp_path / "IA.csv").write_text("\n".join(rows) + "\n")
    rc = main(["simulate", "--chart", "--size", "64x48", "--output", str(tmp_path / "x.npy"), "--z", "1",
               "--depth", "5", "--data-dir", str(tmp_path)])
    assert rc == 3
    assert "numerical" in capsys.readouterr().err
