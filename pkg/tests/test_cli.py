import csv

import numpy as np
import pytest

from cranopt import cli
from cranopt.sysmodel import SystemConfig

SMALL_CFG_TEXT = """
num_uds = 4
num_rrus = 2
rru_antennas = 8
bbu_antennas = 16
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG_TEXT)
    return str(path)


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_row_count_and_schema(tmp_path, small_config):
    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep", "--config", small_config, "--param", "M",
                   "--values", "8,12,16", "--modes", "closed_nonopt,closed_opt",
                   "--seeds", "0,1", "--quick", "--out", str(out)])
    assert rc == 0
    rows = _read_rows(out)
    assert len(rows) == 12   # 3 values x 2 modes x 2 seeds
    assert list(rows[0]) == ["param", "value", "mode", "seed", "sum_rate",
                             "stderr", "wall_ms"]
    assert all(float(r["sum_rate"]) >= 0.0 for r in rows)
    # Deterministic ordering: values outermost, then mode, then seed.
    assert [r["value"] for r in rows[:4]] == ["8"] * 4
    assert [r["mode"] for r in rows[:4]] == ["closed_nonopt"] * 2 \
        + ["closed_opt"] * 2


def test_sweep_determinism(tmp_path, small_config):
    args = ["sweep", "--config", small_config, "--param", "N",
            "--values", "16,24", "--modes", "closed_nonopt,mc_nonopt",
            "--seeds", "0", "--realizations", "10", "--quick"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"}
                          for r in rows]
    assert strip(_read_rows(out1)) == strip(_read_rows(out2))


def test_sweep_opt_dominates_nonopt(tmp_path, small_config):
    out = tmp_path / "m.csv"
    assert cli.main(["sweep", "--config", small_config, "--param", "M",
                     "--values", "8,16", "--modes",
                     "closed_nonopt,closed_opt", "--seeds", "0", "--quick",
                     "--out", str(out)]) == 0
    rows = _read_rows(out)
    by = {(r["value"], r["mode"]): float(r["sum_rate"]) for r in rows}
    for v in ("8", "16"):
        assert by[(v, "closed_opt")] > by[(v, "closed_nonopt")]


def test_sweep_seed_isolation(tmp_path, small_config):
    base = ["sweep", "--config", small_config, "--param", "M",
            "--values", "8", "--modes", "mc_nonopt", "--realizations", "10",
            "--quick"]
    out1, out2 = tmp_path / "s0.csv", tmp_path / "s01.csv"
    assert cli.main(base + ["--seeds", "0", "--out", str(out1)]) == 0
    assert cli.main(base + ["--seeds", "0,1", "--out", str(out2)]) == 0
    rows1 = _read_rows(out1)
    rows2 = [r for r in _read_rows(out2) if r["seed"] == "0"]
    assert [r["sum_rate"] for r in rows1] == [r["sum_rate"] for r in rows2]


def test_sweep_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert cli.main(["sweep", "--param", "bogus", "--values", "1",
                     "--out", out]) == 1
    assert cli.main(["sweep", "--param", "M", "--values", "32,16",
                     "--out", out]) == 1        # not ascending
    assert cli.main(["sweep", "--param", "M", "--values", "16",
                     "--modes", "nope", "--out", out]) == 1
    assert cli.main(["sweep", "--config", "/no/such/file", "--param", "M",
                     "--values", "16", "--out", out]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower() or "error" in err.lower()


def test_sweep_float_param(tmp_path, small_config):
    out = tmp_path / "rho.csv"
    assert cli.main(["sweep", "--config", small_config, "--param", "rho",
                     "--values", "0.1,0.5", "--modes", "closed_nonopt",
                     "--seeds", "0", "--out", str(out)]) == 0
    rows = _read_rows(out)
    assert [r["value"] for r in rows] == ["0.1", "0.5"]


def test_headline_small(capsys, small_config):
    rc = cli.main(["headline", "--config", small_config, "--quick"])
    txt = capsys.readouterr().out
    assert "gain" in txt
    assert rc in (0, 2)


def test_headline_degenerate_single_ud(tmp_path, capsys):
    path = tmp_path / "one.cfg"
    path.write_text("num_uds = 1\nnum_rrus = 1\n"
                    "rru_antennas = 8\nbbu_antennas = 16\n")
    cfg = cli._load_config(str(path))
    base, opt, gain = cli.reproduce_headline(cfg, quick=True)
    assert gain >= 0.0
    assert opt >= base


def test_headline_missing_config():
    assert cli.main(["headline", "--config", "/no/such/file"]) == 1


def test_validate_exit_codes(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_validation",
                        lambda quick=False: [("a", True, "ok"),
                                             ("b", True, "ok")])
    assert cli.main(["validate"]) == 0
    monkeypatch.setattr(cli, "run_validation",
                        lambda quick=False: [("a", True, "ok"),
                                             ("b", False, "bad")])
    assert cli.main(["validate"]) == 2
    out = capsys.readouterr().out
    assert "FAIL" in out and "PASS" in out


def test_validate_negative_control():
    # Tolerance forced to zero must fail the oracle-equivalence check.
    checks = cli.run_validation(quick=True, oracle_tol=0.0)
    by_name = {name: passed for name, passed, _ in checks}
    assert by_name["closed form vs oracle"] is False
    assert by_name["covariance identity"] is True


def test_apply_sweep_value():
    cfg = SystemConfig()
    assert cli.apply_sweep_value(cfg, "M", 64).rru_antennas == 64
    assert cli.apply_sweep_value(cfg, "N", 256).bbu_antennas == 256
    assert cli.apply_sweep_value(cfg, "K", 8).uds_per_rru == (2, 2, 2, 2)
    assert cli.apply_sweep_value(cfg, "R", 2).uds_per_rru == (5, 5)
    assert cli.apply_sweep_value(cfg, "rho", 0.4).correlation_rho == 0.4
    assert cli.apply_sweep_value(cfg, "k_rice_db", 3.0).rician_db == 3.0
    with pytest.raises(ValueError):
        cli.apply_sweep_value(cfg, "zzz", 1)


def test_no_subcommand_is_usage_error():
    assert cli.main([]) == 1
