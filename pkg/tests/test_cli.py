import csv
import io as _io
import json

import numpy as np
import pytest

from cryo_transport import cli
from cryo_transport.config import parse_config_text
from cryo_transport.io import read_graph_csv, read_stack


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(_io.StringIO(body)))


def test_spectrum_figure_grid(capsys):
    code, out, _ = run(capsys, "spectrum", "--n-max", "4", "--h-grid", "0:2:0.01")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 4 * 201
    lam1 = {float(r["h"]): float(r["lambda"]) for r in rows if r["n"] == "1"}
    assert lam1[2.0] == 0.5
    lam2 = [(float(r["lambda"]), float(r["h"])) for r in rows if r["n"] == "2"]
    assert max(lam2)[1] == 0.5


def test_spectrum_single_row(capsys):
    code, out, _ = run(capsys, "spectrum", "--n-max", "1", "--h-grid", "0")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 1 and float(rows[0]["lambda"]) == 0.0


def test_spectrum_coefficients_file(capsys, tmp_path):
    out = tmp_path / "eig.csv"
    assert run(capsys, "spectrum", "--n-max", "2", "--out", str(out))[0] == 0
    coeffs = json.loads((tmp_path / "eig.csv.coefficients.json").read_text())
    assert coeffs["exact_coefficients"][1]["coefficients"] == ["0", "1/2", "-5/8", "1/6"]


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--n-max", "1", "--h-grid", "0.5", "--format", "json")
    d = json.loads(out)
    assert d["config"]["command"] == "spectrum"
    assert d["rows"][0][2] == pytest.approx(0.21875, abs=1e-16)


def test_floats_have_17_digits(capsys):
    _, out, _ = run(capsys, "spectrum", "--n-max", "1", "--h-grid", "0.1")
    row = csv_rows(out)[0]
    assert row["lambda"] == "%.17g" % float(row["lambda"])


def test_invalid_config_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--h", "3")
    assert code == 2
    assert json.loads(err)["key"] == "h"


def test_tiny_simulation_is_a_structured_error(capsys):
    code, out, err = run(capsys, "simulate", "--n-frames", "10")
    assert code == 2 and out == ""
    e = json.loads(err)
    assert e["error"] == "InvalidConfig" and e["exit_code"] == 2


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_frames = 400\nh = 0.6\nk = 9\nseed = 5\n")
    _, out, _ = run(capsys, "simulate", "--config", str(cfg), "--h", "0.7")
    d = json.loads(out)
    assert d["n"] == 400 and d["h"] == 0.7 and d["seed"] == 5
    assert len(d["eigenvalues"]) == 9


def test_missing_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--config", str(tmp_path / "nope"))
    assert code == 2 and json.loads(err)["key"] == "config"


def test_simulate_byte_identical_and_reproducible_from_embedded_config(capsys, tmp_path):
    args = ("simulate", "--n-frames", "500", "--h", "0.6", "--k", "10", "--threads", "1")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    embedded = json.loads(a)["config"]
    cfg = tmp_path / "again.cfg"
    cfg.write_text("".join(f"{k} = {'none' if v is None else v}\n" for k, v in embedded.items()))
    _, c, _ = run(capsys, "simulate", "--config", str(cfg))
    assert c == a


def test_simulate_defaults_give_3_5_7(capsys):
    code, out, _ = run(capsys, "simulate")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 42
    assert d["multiplicities"][:3] == [3, 5, 7]
    assert d["predicted"][0]["lambda"] == pytest.approx(0.159688, abs=1e-6)


def test_classify_defaults(capsys):
    code, out, _ = run(capsys, "classify")
    d = json.loads(out)
    assert code == 0
    for key in ("n", "h", "outlier_frac", "seed", "median_abs_error", "precision", "recall",
                "clamp_count", "eigenvalues"):
        assert key in d
    assert d["median_abs_error"] <= 0.05


def test_classify_estimates_csv(capsys):
    code, out, _ = run(capsys, "classify", "--n-frames", "300", "--h", "0.6",
                       "--outlier-frac", "0.1", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == ["i", "j", "estimate", "truth"]
    assert all(-1 <= float(r["estimate"]) <= 1 for r in rows)
    assert "# outlier_frac = 0.10000000000000001" in out


def test_imaging_outputs(capsys, tmp_path):
    stack, graph = tmp_path / "s.tcim", tmp_path / "g.csv"
    code, out, _ = run(capsys, "imaging", "--n-frames", "12", "--side", "24", "--h", "0.5",
                       "--stack-out", str(stack), "--graph-out", str(graph))
    assert code == 0
    d = json.loads(out)
    assert len(read_stack(stack)) == 12
    assert len(read_graph_csv(graph, 12).edges) == d["edge_count"]


def test_imaging_high_snr_close_to_clean(capsys):
    base = ("imaging", "--n-frames", "12", "--side", "24", "--h", "0.5")
    _, clean, _ = run(capsys, *base)
    _, noisy, _ = run(capsys, *base, "--snr", "1e6")
    a, b = json.loads(clean), json.loads(noisy)
    assert b["edge_count"] == a["edge_count"]
    assert b["epsilon"] == pytest.approx(a["epsilon"], rel=1e-2)


def test_imaging_end_to_end_without_gap_exits_3(capsys):
    code, out, err = run(capsys, "imaging", "--n-frames", "12", "--side", "24", "--h", "0.05",
                         "--end-to-end")
    assert code == 3
    assert json.loads(err)["error"] == "NoSpectralGap"
    assert json.loads(out)["classification"]["error"] == "NoSpectralGap"


def test_csv_header_embeds_config(capsys):
    _, out, _ = run(capsys, "spectrum", "--n-max", "1", "--h-grid", "0", "--seed", "9")
    comment = "\n".join(l[2:] for l in out.splitlines() if l.startswith("# "))
    assert parse_config_text(comment)["seed"] == "9"
