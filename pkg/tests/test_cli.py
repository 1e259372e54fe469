"""End-to-end command-line behaviour: artifacts, exit codes, precedence.

Each scenario drives cli.main() directly with an isolated output
directory; one subprocess case confirms the installed console script.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from epibvp.cli import main


def run(args, tmp_path, name="out", env_out=None, monkeypatch=None):
    outdir = str(tmp_path / name)
    if env_out is not None:
        monkeypatch.setenv("EPIBVP_OUT", env_out)
    elif monkeypatch is not None:
        monkeypatch.delenv("EPIBVP_OUT", raising=False)
    code = main(["--outdir", outdir] + args)
    return code, outdir


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("EPIBVP_OUT", raising=False)


def test_solve_writes_expected_artifacts(tmp_path):
    code, out = run(["solve", "--problem", "p2", "--lambda", "20",
                     "--n-terms", "25"], tmp_path)
    assert code == 0
    names = sorted(os.listdir(out))
    assert names == ["p2_20_lower.csv", "p2_20_profiles.png",
                     "p2_20_residual.png", "p2_20_upper.csv",
                     "solve_p2_20.json"]
    data = json.load(open(os.path.join(out, "solve_p2_20.json")))
    assert data["engine"] == "adm"
    assert [b["branch_label"] for b in data["branches"]] == ["lower", "upper"]
    assert all(b["radial_boundary"]["pass"] for b in data["branches"])
    header = open(os.path.join(out, "p2_20_lower.csv")).readline().strip()
    assert header == "r,w,phi,residual"


def test_duplicate_branch_labels_get_distinct_files(tmp_path):
    # near the fold with a wide bracket the truncated series grows a
    # spurious extra root sharing the "upper" label; its artifact must
    # not overwrite the genuine branch
    code, out = run(["solve", "--problem", "p2", "--lambda", "31.94",
                     "--n-terms", "30"], tmp_path)
    assert code == 0
    csvs = sorted(n for n in os.listdir(out) if n.endswith(".csv"))
    assert csvs == ["p2_31.94_lower.csv", "p2_31.94_upper.csv",
                    "p2_31.94_upper_2.csv"]
    data = json.load(open(os.path.join(out, "solve_p2_31.94.json")))
    ghosts = [b for b in data["branches"] if b["residual_max"] > 1e-4]
    assert len(ghosts) == 1          # betrayed by its unconverged residual


def test_solve_both_engines_negative_lambda(tmp_path):
    code, out = run(["solve", "--problem", "p1", "--lambda", "-1",
                     "--engine", "both"], tmp_path)
    assert code == 0
    csvs = sorted(n for n in os.listdir(out) if n.endswith(".csv"))
    assert csvs == ["p1_-1_alpha_chain.csv", "p1_-1_beta_chain.csv",
                    "p1_-1_negative.csv", "p1_-1_positive.csv"]
    data = json.load(open(os.path.join(out, "solve_p1_-1.json")))
    assert data["monotone"]["converged"] is True
    assert data["monotone"]["ordered"] is False   # relaxed for lambda < 0
    assert data["cross_engine"]["closest_branch"] == "positive"
    assert data["cross_engine"]["max_gap"] < 1e-6


def test_monotone_subcommand(tmp_path):
    code, out = run(["monotone", "--problem", "p3", "--lambda", "5"],
                    tmp_path)
    assert code == 0
    data = json.load(open(os.path.join(out, "monotone_p3_5.json")))
    assert data["converged"] is True
    assert data["iterations"] <= 200
    assert data["zero_as_lower"]["pass"] is True
    assert data["seed_as_upper"]["pass"] is True
    chain = np.loadtxt(os.path.join(out, "p3_5_beta_chain.csv"),
                       delimiter=",", skiprows=1)
    assert chain.shape == (2049, 2)
    assert np.all(chain[:, 1] <= 1e-8)


def test_scan_subcommand(tmp_path):
    code, out = run(["scan", "--problem", "p3", "--tol", "0.1"], tmp_path)
    assert code == 0
    data = json.load(open(os.path.join(out, "scan_p3.json")))
    assert 10.8 <= data["midpoint"] <= 11.63
    assert data["within_bounds"] is True
    assert data["n_terms"] == 15
    assert os.path.exists(os.path.join(out, "scan_p3.png"))


def test_existence_profile_subcommand(tmp_path):
    code, out = run(["existence-profile", "--problem", "p3",
                     "--lambdas", "0,5,10,15"], tmp_path)
    assert code == 0
    data = json.load(open(os.path.join(out, "existence_p3.json")))
    assert [r["count"] for r in data["rows"]] == [2, 2, 2, 0]
    assert data["counts_non_increasing"] is True
    assert data["first_zero_lambda"] == 15.0
    lines = open(os.path.join(out, "existence_p3.csv")).read().splitlines()
    assert lines[0] == "lambda,count,c_values,labels"
    assert len(lines) == 5


def test_greens_check_subcommand(tmp_path):
    code, out = run(["greens-check", "--problem", "p1"], tmp_path)
    assert code == 0
    data = json.load(open(os.path.join(out, "greens_p1.json")))
    assert len(data["samples"]) == 5
    assert all(s["pass"] for s in data["samples"] if s.get("valid"))
    assert os.path.exists(os.path.join(out, "greens_p1.png"))


def test_residual_table_subcommand(tmp_path):
    code, out = run(["residual-table", "--problem", "p2", "--lambda", "20",
                     "--n-terms", "25"], tmp_path)
    assert code == 0
    table = np.loadtxt(os.path.join(out, "residual_p2_20_lower.csv"),
                       delimiter=",", skiprows=1)
    assert table.shape == (10, 2)
    assert table[0, 0] == 0.0 and table[0, 1] == 0.0
    assert np.max(np.abs(table[:, 1])) <= 1e-8


def test_exit_code_no_root(tmp_path):
    code, _ = run(["solve", "--problem", "p2", "--lambda", "40"], tmp_path)
    assert code == 2


def test_exit_code_no_seed(tmp_path):
    code, _ = run(["solve", "--problem", "p2", "--lambda", "40",
                   "--engine", "monotone"], tmp_path)
    assert code == 2


def test_exit_code_bracket_failure(tmp_path):
    code, _ = run(["scan", "--problem", "p1", "--lambda-max", "100"],
                  tmp_path)
    assert code == 3


def test_exit_code_config_errors(tmp_path):
    code, _ = run(["solve", "--problem", "p7", "--lambda", "1"], tmp_path)
    assert code == 1
    code, _ = run(["solve", "--lambda", "1"], tmp_path)
    assert code == 1
    code, _ = run(["nonsense"], tmp_path)
    assert code == 1


def test_exit_code_invalid_shift(tmp_path):
    code, _ = run(["monotone", "--problem", "p2", "--lambda", "5",
                   "--k", "12"], tmp_path)
    assert code == 1


def test_exit_code_greens_all_invalid(tmp_path):
    code, out = run(["greens-check", "--problem", "p1", "--k", "50"],
                    tmp_path)
    assert code == 1
    # the report is still written with the rejection recorded
    data = json.load(open(os.path.join(out, "greens_p1.json")))
    assert data["samples"][0]["valid"] is False


def test_env_var_beats_flag_and_config(tmp_path, monkeypatch):
    env_dir = str(tmp_path / "env_dir")
    cfg = tmp_path / "c.cfg"
    cfg.write_text("outdir=%s\n" % (tmp_path / "cfg_dir"))
    monkeypatch.setenv("EPIBVP_OUT", env_dir)
    code = main(["--outdir", str(tmp_path / "flag_dir"), "--config",
                 str(cfg), "residual-table", "--problem", "p3",
                 "--lambda", "5"])
    assert code == 0
    assert os.path.isdir(env_dir)
    assert not os.path.isdir(str(tmp_path / "flag_dir"))
    assert not os.path.isdir(str(tmp_path / "cfg_dir"))


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("problem=p2\nlambda=20\nn_terms=18\n# comment\n\n")
    out = str(tmp_path / "out")
    code = main(["--outdir", out, "--config", str(cfg), "solve"])
    assert code == 0
    data = json.load(open(os.path.join(out, "solve_p2_20.json")))
    assert data["n_terms"] == 18
    # explicit flags win over the file
    out2 = str(tmp_path / "out2")
    code = main(["--outdir", out2, "--config", str(cfg), "solve",
                 "--lambda", "10"])
    assert code == 0
    assert os.path.exists(os.path.join(out2, "solve_p2_10.json"))


def test_config_file_errors(tmp_path):
    missing = str(tmp_path / "nope.cfg")
    assert main(["--config", missing, "scan", "--problem", "p3"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("this line has no equals sign\n")
    assert main(["--config", str(bad), "scan", "--problem", "p3"]) == 1


def test_reruns_are_byte_identical(tmp_path):
    _, out1 = run(["solve", "--problem", "p3", "--lambda", "5"], tmp_path,
                  name="one")
    _, out2 = run(["solve", "--problem", "p3", "--lambda", "5"], tmp_path,
                  name="two")
    for name in ("solve_p3_5.json", "p3_5_lower.csv", "p3_5_upper.csv"):
        b1 = open(os.path.join(out1, name), "rb").read()
        b2 = open(os.path.join(out2, name), "rb").read()
        assert b1 == b2, name


def test_console_script_runs(tmp_path):
    out = str(tmp_path / "sub")
    proc = subprocess.run(
        [sys.executable, "-m", "epibvp.cli", "--outdir", out,
         "residual-table", "--problem", "p3", "--lambda", "5"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "worst |defect|" in proc.stdout
