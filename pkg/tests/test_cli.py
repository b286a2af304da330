import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_config, make_decoupled
from hybridchaos import config_to_dict, generate, load_preset
from hybridchaos.cli import main


def run(argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(config_to_dict(cfg)))
    return p


# --- generate -------------------------------------------------------------

def test_generate_line_count(tmp_path):
    out = tmp_path / "traj.csv"
    assert run(["generate", "--config", "case_i", "--n", 10, "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["i", "x", "y", "z", "w"]
    assert len(rows) == 10
    assert [r[0] for r in rows] == [str(i) for i in range(10)]


def test_generate_output_round_trips_binary64(tmp_path):
    out = tmp_path / "traj.csv"
    assert run(["generate", "--config", "case_ii", "--n", 50, "--out", out]) == 0
    _, rows = read_csv(out)
    got = np.array([[float(v) for v in r[1:]] for r in rows])
    want = generate(load_preset("case_ii"), 50).states
    assert np.array_equal(got, want)


def test_generate_overrides(tmp_path):
    out = tmp_path / "t.csv"
    assert run(["generate", "--config", "case_i", "--n", 3, "--r", 0.25,
                "--burn-in", 2, "--seed-state", "0.5,0.5,0.5,0.5", "--out", out]) == 0
    cfg = load_preset("case_i")
    from hybridchaos import State4
    want = generate(replace(cfg, r=0.25, burn_in=2,
                            initial=State4(0.5, 0.5, 0.5, 0.5)), 3).states
    _, rows = read_csv(out)
    got = np.array([[float(v) for v in r[1:]] for r in rows])
    assert np.array_equal(got, want)


def test_generate_manifest(tmp_path):
    out = tmp_path / "traj.csv"
    run(["generate", "--config", "case_i", "--n", 5, "--out", out])
    manifest = json.loads((tmp_path / "traj.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "generate"
    assert manifest["parameters"] == {"n": 5}
    assert manifest["outputs"] == ["traj.csv"]
    assert manifest["config"]["r"] == 0.5


def test_generate_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["generate", "--config", "case_ii", "--n", 100, "--out", a])
    run(["generate", "--config", "case_ii", "--n", 100, "--out", b])
    assert a.read_bytes() == b.read_bytes()
    am = (tmp_path / "a.csv.manifest.json").read_bytes()
    bm = (tmp_path / "b.csv.manifest.json").read_bytes()
    # manifests record output basenames, so they differ only there
    assert am.replace(b"a.csv", b"out.csv") == bm.replace(b"b.csv", b"out.csv")


def test_generate_exit_2_on_bad_config(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    d = config_to_dict(make_config())
    d["parts"]["x"]["f"][0] = "cosh(p"
    cfg_path.write_text(json.dumps(d))
    assert run(["generate", "--config", cfg_path, "--n", 5, "--out", tmp_path / "o.csv"]) == 2
    err = capsys.readouterr().err
    assert "parts.x.f[0]" in err and "offset" in err and "cosh(p" in err


def test_generate_exit_2_on_unknown_config_name(tmp_path):
    assert run(["generate", "--config", "case_iii", "--n", 5, "--out", tmp_path / "o.csv"]) == 2


def test_generate_exit_3_on_nonfinite(tmp_path, capsys):
    cfg = make_config(burn_in=4, g_x=("log(x - 2)", "log(x - 2)"))
    cfg_path = write_cfg(tmp_path, cfg)
    assert run(["generate", "--config", cfg_path, "--n", 5, "--out", tmp_path / "o.csv"]) == 3
    err = capsys.readouterr().err
    assert "component x" in err and "iteration 0" in err


# --- lyapunov ---------------------------------------------------------------

def test_lyapunov_ln2_row(tmp_path):
    cfg_path = write_cfg(tmp_path, make_decoupled("logistic", 1.0, burn_in=200))
    out = tmp_path / "lyap.csv"
    assert run(["lyapunov", "--config", cfg_path, "--r", 1.0, "--n", 2000, "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["r", "lambda1", "lambda2", "lambda3", "lambda4", "class"]
    assert len(rows) == 1
    assert rows[0][-1] == "chaotic"
    for lam in rows[0][1:5]:
        assert abs(float(lam) - math.log(2)) < 0.01


def test_lyapunov_r_grid(tmp_path):
    out = tmp_path / "lyap.csv"
    assert run(["lyapunov", "--config", "case_i", "--r-range", "0.2:1.0:3",
                "--n", 500, "--out", out]) == 0
    _, rows = read_csv(out)
    assert [float(r[0]) for r in rows] == list(np.linspace(0.2, 1.0, 3))
    assert all(r[-1] == "chaotic" for r in rows)


def test_lyapunov_empty_r_list(tmp_path):
    assert run(["lyapunov", "--config", "case_i", "--n", 500,
                "--out", tmp_path / "o.csv"]) == 2


def test_lyapunov_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["lyapunov", "--config", "case_i", "--r", 0.3, "--r", 0.7, "--n", 300]
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--jobs", 2, "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()


# --- bifurcation --------------------------------------------------------------

def test_bifurcation_rows_and_sidecar(tmp_path):
    out = tmp_path / "bif.csv"
    assert run(["bifurcation", "--config", "case_ii", "--r-range", "0.2:1.0:3",
                "--keep", 5, "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["r", "value"]
    assert len(rows) == 15
    skipped = json.loads((tmp_path / "bif.skipped.json").read_text())
    assert skipped == []


def test_bifurcation_skip_sidecar_content(tmp_path):
    cfg = make_config(burn_in=3, g_x=("log(r - 0.5)", "log(r - 0.5)"))
    cfg_path = write_cfg(tmp_path, cfg)
    out = tmp_path / "bif.csv"
    assert run(["bifurcation", "--config", cfg_path, "--r-range", "0.25:1.0:4",
                "--keep", 3, "--out", out]) == 0
    skipped = json.loads((tmp_path / "bif.skipped.json").read_text())
    assert [s["r"] for s in skipped] == [0.25, 0.5]
    assert all(s["component"] == "x" for s in skipped)


def test_bifurcation_exit_2_on_bad_range(tmp_path):
    assert run(["bifurcation", "--config", "case_ii", "--r-range", "0.9:0.2:10",
                "--keep", 5, "--out", tmp_path / "o.csv"]) == 2


def test_bifurcation_exit_3_when_all_fail(tmp_path):
    cfg = make_config(burn_in=3, g_x=("log(r - 0.5)", "log(r - 0.5)"))
    cfg_path = write_cfg(tmp_path, cfg)
    assert run(["bifurcation", "--config", cfg_path, "--r-range", "0.1:0.4:3",
                "--keep", 3, "--out", tmp_path / "o.csv"]) == 3


# --- cobweb / histogram / scatter ----------------------------------------------

def test_cobweb_three_rows(tmp_path):
    out = tmp_path / "cw.csv"
    assert run(["cobweb", "--config", "case_i", "--n", 1, "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["u", "v"]
    assert len(rows) == 3


def test_histogram_output_and_stderr(tmp_path, capsys):
    out = tmp_path / "hist.csv"
    assert run(["histogram", "--config", "case_i", "--r", 0.5, "--n", 5000,
                "--bins", 20, "--out", out]) == 0
    err = capsys.readouterr().err
    assert "chi_square=" in err and "dof=19" in err
    header, rows = read_csv(out)
    assert header == ["bin_lo", "bin_hi", "count"]
    assert len(rows) == 20
    assert sum(int(r[2]) for r in rows) == 5000
    assert float(rows[0][0]) == 0.0
    assert float(rows[-1][1]) == 1.0


def test_histogram_too_few_samples_exit_2(tmp_path):
    assert run(["histogram", "--config", "case_i", "--n", 50, "--bins", 100,
                "--out", tmp_path / "h.csv"]) == 2


def test_scatter_rows(tmp_path):
    out = tmp_path / "sc.csv"
    assert run(["scatter", "--config", "case_ii", "--n", 100, "--pair", "x,y",
                "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["a", "b"]
    assert len(rows) == 100


def test_scatter_equal_pair_exit_2(tmp_path):
    assert run(["scatter", "--config", "case_ii", "--n", 10, "--pair", "x,x",
                "--out", tmp_path / "o.csv"]) == 2


# --- repro -------------------------------------------------------------------

REPRO_SMALL = ["--lyap-points", 2, "--lyap-n", 300, "--bif-steps", 3,
               "--bif-keep", 10, "--cobweb-n", 20, "--hist-n", 2000,
               "--scatter-n", 200]


def test_repro_produces_all_outputs(tmp_path):
    out_dir = tmp_path / "repro"
    assert run(["repro", "--out-dir", out_dir] + REPRO_SMALL) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    for stem in ("lyapunov_case_i", "bifurcation_case_ii", "cobweb_case_i",
                 "histogram_case_i", "scatter_case_ii"):
        assert f"{stem}.csv" in names
        assert f"{stem}.csv.manifest.json" in names
    assert "bifurcation_case_ii.skipped.json" in names
    assert "repro.manifest.json" in names


def test_repro_deterministic(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert run(["repro", "--out-dir", d1] + REPRO_SMALL) == 0
    assert run(["repro", "--out-dir", d2] + REPRO_SMALL) == 0
    names = sorted(p.name for p in d1.iterdir())
    assert names == sorted(p.name for p in d2.iterdir())
    for name in names:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
