import csv
import json

import numpy as np
import pytest

from stbc_lab.cli import main, parse_count, parse_number, parse_snr_grid


def test_parse_helpers():
    assert parse_number("sqrt(3/5)") == pytest.approx(np.sqrt(0.6))
    assert parse_number("atan(1/2)") == pytest.approx(np.arctan(0.5))
    assert parse_number("-2") == -2
    with pytest.raises(ValueError):
        parse_number("__import__('os')")
    assert parse_snr_grid("0:2:16") == tuple(float(x) for x in range(0, 17, 2))
    assert parse_snr_grid("1,3.5") == (1.0, 3.5)
    assert parse_snr_grid("") == ()


def test_simulate_grid(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["simulate", "--code", "x32", "--qam", "4", "--snr", "0:2:16", "--seed", "7",
               "--trials", "200", "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 9


def test_verify(capsys):
    assert main(["verify", "--a", "3"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 3


def test_coding_gain_zero(capsys):
    assert main(["coding-gain", "--code", "x1", "--k", "1", "--qam", "4"]) == 0
    assert float(capsys.readouterr().out) == 0.0


def test_coding_gain_normalized(capsys):
    assert main(["coding-gain", "--code", "x1", "--k", "sqrt(3/5)", "--qam", "4", "--normalized"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0)


def test_complexity(capsys):
    assert main(["complexity", "--code", "x2", "--qam", "16"]) == 0
    assert capsys.readouterr().out.startswith("2M^4.5")


def test_gen_weights(tmp_path):
    path = tmp_path / "w.json"
    assert main(["gen-weights", "--a", "2", "--emit", str(path)]) == 0
    data = json.load(open(path))
    R1 = np.array(data["generators"][0])
    assert R1.shape == (4, 4, 2)
    assert len(data["groups"][0]) == len(data["groups"][1]) == 4
    assert main(["gen-weights", "--code", "x1", "--emit", str(path)]) == 0
    assert len(json.load(open(path))["weights"]) == 8


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "r.csv"
    cfg.write_text(f"# campaign\nsnr = 0,5\ntrials = 50\nout = {out}\n")
    assert main(["--config", str(cfg), "simulate", "--snr", "0:1:10"]) == 0
    assert len(list(csv.DictReader(open(out)))) == 2


def test_validation_errors(tmp_path):
    assert main(["verify", "--a", "9"]) == 2
    assert main(["simulate", "--snr", "5,1", "--trials", "10"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    with pytest.raises(SystemExit):
        main(["--config", str(cfg), "verify"])


def test_decode_trace(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["decode-trace", "--code", "x2", "--qam", "4", "--seed", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert rows and set(rows[0]) == {"level", "distance", "action"}


@pytest.mark.parametrize("text,want", [("1000", 1000), ("1e6", 1_000_000), ("2**10", 1024)])
def test_parse_count(text, want):
    assert parse_count(text) == want


def test_parse_count_rejects_fraction():
    with pytest.raises(ValueError):
        parse_count("2.5")
