import csv

import numpy as np
import pytest

from stbc_lab import harness
from stbc_lab.harness import SimConfig, run_campaign, run_trial, simulate_block
from stbc_lab.stbc import constellation, x1_code


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(snr_db=(5, 5))
    with pytest.raises(ValueError):
        SimConfig(max_trials=0)
    with pytest.raises(ValueError):
        SimConfig(decoder="zf")
    with pytest.raises(ValueError):
        SimConfig(code="x3")


def test_noise_variance_convention():
    # x1 with unit-energy QAM has unit power per entry, so N0 = Nt / snr
    n0 = harness.noise_variance(x1_code(), constellation(16), 4, 10.0)
    assert n0 == pytest.approx(0.4)


@pytest.mark.parametrize("code", ["x1", "x32", "x2"])
def test_high_snr_error_free(code):
    cfg = SimConfig(code=code, M=4, snr_db=(60.0,), max_trials=1000, block_size=500)
    point = run_campaign(cfg).points[0]
    assert point.errors == 0 and point.trials == 1000


def test_run_trial_replays_block():
    cfg = SimConfig(code="x32", M=4, snr_db=(4.0,), block_size=50, seed=9)
    block = simulate_block(cfg, 4.0, 1)
    for t in (50, 63, 99):
        out = run_trial(cfg, 4.0, t)
        assert out.bit_errors == block.errors[t - 50]
        assert out.visited_nodes == block.nodes[t - 50]
        assert out.bits == 12
    assert run_trial(cfg, 4.0, 63) == run_trial(cfg, 4.0, 63)


def test_decoders_agree_inside_harness():
    base = dict(code="x32", M=4, snr_db=(6.0,), max_trials=300, block_size=100, seed=2)
    errs = {d: run_campaign(SimConfig(decoder=d, **base)).points[0].errors for d in harness.DECODERS}
    assert len(set(errs.values())) == 1


def test_stopping_rule_exact():
    cfg = SimConfig(code="x1", M=16, snr_db=(0.0,), target_errors=200, block_size=64, seed=4)
    p = run_campaign(cfg).points[0]
    blocks = [simulate_block(cfg, 0.0, b) for b in range(p.trials // 64 + 1)]
    errs = np.concatenate([b.errors for b in blocks])
    cum = np.cumsum(errs)
    assert p.trials == int(np.argmax(cum >= 200)) + 1
    assert p.errors == cum[p.trials - 1] >= 200
    assert p.bits == p.trials * 16


def test_min_trials_respected():
    cfg = SimConfig(code="x1", M=4, snr_db=(0.0,), min_trials=1500, block_size=400)
    assert run_campaign(cfg).points[0].trials == 1500


def test_empty_grid_writes_header(tmp_path):
    out = tmp_path / "empty.csv"
    res = run_campaign(SimConfig(snr_db=(), output=str(out)))
    assert res.points == []
    rows = list(csv.reader(open(out)))
    assert rows == [list(harness.CSV_HEADER)]


def test_csv_contents(tmp_path):
    out = tmp_path / "r.csv"
    cfg = SimConfig(code="x1", M=4, snr_db=(0.0, 3.0), max_trials=500, block_size=100, output=str(out))
    res = run_campaign(cfg)
    rows = list(csv.DictReader(open(out)))
    assert [float(r["snr_db"]) for r in rows] == [0.0, 3.0]
    for r, p in zip(rows, res.points):
        assert int(r["errors"]) == p.errors and int(r["bits"]) == p.bits
        assert float(r["ber"]) == p.errors / p.bits
        assert int(r["seed"]) == 0 and int(r["block_size"]) == 100


def test_worker_count_does_not_change_output(tmp_path):
    base = dict(code="x32", M=4, snr_db=(2.0, 8.0), max_trials=400, block_size=50, seed=5)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_campaign(SimConfig(output=str(a), **base), workers=1)
    run_campaign(SimConfig(output=str(b), **base), workers=3)
    assert a.read_text() == b.read_text()


def test_ber_decreases_with_snr():
    cfg = SimConfig(code="x1", M=4, snr_db=(6.0, 10.0), min_trials=15_000, max_trials=15_000, block_size=5000, seed=1)
    p6, p10 = run_campaign(cfg).points
    assert p6.bits >= 1e5 and p10.bits >= 1e5
    assert p10.ber < p6.ber


def test_dump_r(tmp_path):
    cfg = SimConfig(code="x1", M=4, snr_db=(10.0,), block_size=20)
    path = tmp_path / "r.csv"
    harness.dump_r(cfg, path, trials_per_point=3)
    rows = list(csv.reader(open(path)))
    assert rows[0][:3] == ["snr_db", "trial", "row"] and len(rows) == 1 + 3 * 8
    R = np.array([[float(x) for x in r[3:]] for r in rows[1:9]])
    assert np.allclose(R, np.triu(R))


def test_decode_trace_consistent():
    cfg = SimConfig(code="x2", M=4, snr_db=(10.0,), decoder="fast", seed=3)
    trace, res = harness.decode_trace(cfg, 10.0, 0)
    assert trace
    assert trace[-1][2] in ("update", "leaf", "hypothesis", "prune", "visit")
    assert min(d for _, d, a in trace if a == "update") == pytest.approx(res.metric)
