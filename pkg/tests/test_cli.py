"""Command-line surface: exit codes, output formats, subcommand contracts."""

import json
import subprocess
import sys

import pytest

from cosetcode.cli import EXIT_OK, EXIT_USAGE, main
from cosetcode.matrices import SparseMatrix


def test_no_args_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["diag", "--bogus", "1"])
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_diag_frozen_example(capsys):
    assert main(["diag", "--q", "2", "--l", "2", "--n", "2", "--tau", "2",
                 "--xi", "0.5"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.splitlines()
    fields = dict(ln.lstrip("# ").split(",", 1) for ln in lines[:3])
    assert float(fields["alpha"]) == 1.0
    assert float(fields["beta"]) == 1.0
    assert float(fields["im_ratio"]) == 0.5
    assert lines[3] == "w,p_Aw,C_w,S"
    assert len(lines) == 6  # two weight rows


def test_diag_writes_file(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["diag", "--q", "2", "--l", "2", "--n", "2", "--tau", "2",
                 "--xi", "0.5", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("# alpha,1.0")


def test_diag_invalid_params_usage_error(capsys):
    assert main(["diag", "--q", "2", "--l", "2", "--n", "2", "--tau", "3",
                 "--xi", "0.5"]) == EXIT_USAGE


def test_gen_matrix_roundtrip(capsys):
    args = ["gen-matrix", "--q", "3", "--l", "2", "--n", "4", "--tau", "3",
            "--seed", "5"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    m = SparseMatrix.from_text(first)
    assert (m.q, m.l, m.n) == (3, 2, 4)
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out == first  # seeded determinism


def test_types_check_passes(capsys):
    assert main(["types-check", "--q", "2", "--n", "8"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out


def test_hash_check_passes(capsys):
    assert main(["hash-check", "--q", "2", "--l", "2", "--n", "2",
                 "--tau", "2", "--xi", "0.5", "--cases", "5"]) == EXIT_OK
    assert "violations=0" in capsys.readouterr().out


def test_oracle_passes(capsys):
    assert main(["oracle", "--q", "3", "--l", "2", "--n", "2", "--tau", "2",
                 "--steps", "6"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out


def run_config(tmp_path):
    doc = {
        "problem": "sw", "n": [6], "trials": 4, "seed": 3, "best_of": 1,
        "scheme": {"joint": [[0.445, 0.055], [0.055, 0.445]],
                   "rate_x": 0.8, "rate_y": 0.8},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_subcommand(tmp_path, capsys):
    cfg = run_config(tmp_path)
    prefix = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(prefix)]) == EXIT_OK
    for suffix in (".csv", "_records.csv", ".json", ".gp"):
        assert (tmp_path / f"out{suffix}").exists()
    header = (tmp_path / "out.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "n"


def test_run_seed_override(tmp_path, capsys):
    cfg = run_config(tmp_path)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"),
          "--seed", "99"])
    capsys.readouterr()
    assert (tmp_path / "a_records.csv").read_text() != (
        tmp_path / "b_records.csv").read_text()


def test_run_bad_config_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == EXIT_USAGE
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    path2 = tmp_path / "bad2.json"
    path2.write_text(json.dumps({"problem": "sw"}))
    assert main(["run", "--config", str(path2)]) == EXIT_USAGE


def test_console_script_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "cosetcode.cli", "diag", "--q", "2", "--l", "2",
         "--n", "2", "--tau", "2", "--xi", "0.5"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# alpha,1.0")
