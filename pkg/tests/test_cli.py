import json

import numpy as np
import pytest

from fdbayes.aeroelastic import FD_NAMES, THETA_NAMES
from fdbayes.cli import main
from fdbayes.config import bridge_simulation_doc
from fdbayes.records import (
    DataError,
    read_autocorrelation_csv,
    read_chain_csv,
    read_overlay_csv,
    read_theodorsen_csv,
    read_timeseries_csv,
    write_timeseries_csv,
)
from fdbayes.spectral import read_band_psd_csv
from fdbayes.synth import TimeSeries
from fdbayes.theodorsen import flat_plate_arrays


def _write_cfg(path, **sampler):
    d = bridge_simulation_doc()
    d["sampler"] = {"n_walkers": 30, "n_steps": 400, "thin": 2, **sampler}
    path.write_text(json.dumps(d))
    return path


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def record(workdir):
    cfg = _write_cfg(workdir / "cfg.json")
    out = workdir / "rec.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    return cfg, out


def test_simulate_outputs(record):
    cfg, out = record
    ts = read_timeseries_csv(out, dt=0.01)
    assert len(ts) == 200000
    meta = json.loads(out.with_name("rec.meta.json").read_text())
    assert meta["seed"] == 5 and meta["config"]["seed"] == 5
    assert set(meta["truth_fds"]) == set(FD_NAMES)


def test_simulate_byte_identical(record, workdir):
    cfg, out = record
    again = workdir / "rec2.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(again), "--seed", "5"]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_identify_outputs_and_rerun(record, workdir):
    cfg, data = record
    res = workdir / "res.json"
    chains = workdir / "chain.csv"
    code = main(["identify", "--config", str(cfg), "--data", str(data), "--out", str(res),
                 "--seed", "5", "--chains", str(chains)])
    assert code in (0, 4)
    doc = json.loads(res.read_text())
    assert set(doc["params"]) == set(THETA_NAMES)
    assert doc["seed"] == 5 and doc["config"]["seed"] == 5
    assert set(doc["diagnostics"]) >= {"acceptance_rate", "convergence_lags", "converged"}
    assert len(doc["bands"]) == 2

    # rerun from the echoed configuration alone
    echo = workdir / "echo.json"
    echo.write_text(json.dumps(doc["config"]))
    res2 = workdir / "res2.json"
    main(["identify", "--config", str(echo), "--data", str(data), "--out", str(res2)])
    doc2 = json.loads(res2.read_text())
    for n in THETA_NAMES:
        assert doc2["params"][n]["mpv"] == doc["params"][n]["mpv"]

    chain = read_chain_csv(chains)
    assert chain.positions.shape == (160, 30, 12)
    overlay = read_overlay_csv(res.with_name("res.overlay.csv"))
    assert overlay["f_hz"].size == 10
    f, S = read_band_psd_csv(res.with_name("res.psd.csv"))
    np.testing.assert_array_equal(f, overlay["f_hz"])
    np.testing.assert_array_equal(S[:, 0, 0].real, overlay["S_hh_meas"])

    acf = workdir / "acf.csv"
    code = main(["diagnose", "--data", str(chains), "--out", str(acf)])
    verdict = json.loads(acf.with_name("acf.json").read_text())
    assert code == (0 if verdict["verdict"] == "converged" else 4)
    curves = read_autocorrelation_csv(acf)
    assert curves["a1"][0] == 1.0


def test_non_convergence_exit(record, workdir):
    _, data = record
    cfg = _write_cfg(workdir / "strict.json", thin=1, max_lag=1, n_steps=100)
    code = main(["identify", "--config", str(cfg), "--data", str(data), "--out", str(workdir / "nc.json")])
    assert code == 4
    doc = json.loads((workdir / "nc.json").read_text())
    assert doc["diagnostics"]["converged"] is False


def test_diagnose_constant_chain(tmp_path):
    from fdbayes.records import write_chain_csv
    from fdbayes.sampler import EnsembleChain

    pos = np.random.default_rng(0).standard_normal((50, 4, 12))
    pos[:, :, 3] = 1.0
    path = tmp_path / "c.csv"
    write_chain_csv(path, EnsembleChain(pos, np.zeros((50, 4)), 0.3))
    code = main(["diagnose", "--data", str(path), "--out", str(tmp_path / "d.csv")])
    verdict = json.loads((tmp_path / "d.json").read_text())
    assert code == 4 and verdict["zero_variance"] == ["a4"]
    np.testing.assert_array_equal(read_chain_csv(path).positions, pos)


def test_truncated_csv_names_line(record, tmp_path, capsys):
    cfg, data = record
    lines = data.read_text().splitlines()[:5000]
    lines[-1] = lines[-1].rsplit(",", 1)[0]
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    code = main(["identify", "--config", str(cfg), "--data", str(bad), "--out", str(tmp_path / "r.json")])
    assert code == 3
    assert "line 5000" in capsys.readouterr().err


def test_short_record_is_data_error(record, tmp_path):
    cfg, _ = record
    ts = TimeSeries(0.01, np.zeros(500), np.zeros(500))
    path = tmp_path / "short.csv"
    write_timeseries_csv(path, ts)
    assert main(["identify", "--config", str(cfg), "--data", str(path), "--out", str(tmp_path / "r.json")]) == 3


def test_dt_mismatch_and_missing_time_column(tmp_path):
    ts = TimeSeries(0.02, np.arange(10.0), np.zeros(10))
    path = tmp_path / "ts.csv"
    write_timeseries_csv(path, ts)
    with pytest.raises(DataError, match="differs"):
        read_timeseries_csv(path, dt=0.01)
    assert read_timeseries_csv(path, dt=0.02 + 5e-10).dt == pytest.approx(0.02 + 5e-10)
    bare = tmp_path / "bare.csv"
    bare.write_text("h,alpha\n1,2\n3,4\n")
    with pytest.raises(DataError):
        read_timeseries_csv(bare)
    assert read_timeseries_csv(bare, dt=0.1).dt == 0.1
    bad = tmp_path / "nonuniform.csv"
    bad.write_text("t,h,alpha\n0,1,2\n0.1,1,2\n0.3,1,2\n")
    with pytest.raises(DataError, match="non-uniform"):
        read_timeseries_csv(bad)
    text = tmp_path / "text.csv"
    text.write_text("t,h,alpha\n0,1,2\n0.1,x,2\n")
    with pytest.raises(DataError, match="line 3, column 2"):
        read_timeseries_csv(text)


def test_timeseries_roundtrip_exact(tmp_path, rng):
    ts = TimeSeries(0.01, rng.standard_normal(300), rng.standard_normal(300))
    path = tmp_path / "x.csv"
    write_timeseries_csv(path, ts)
    back = read_timeseries_csv(path, dt=0.01)
    np.testing.assert_array_equal(back.h, ts.h)
    np.testing.assert_array_equal(back.alpha, ts.alpha)


def test_config_error_exit(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 2
    d = bridge_simulation_doc()
    d["simulation"]["duration_s"] = 0
    p.write_text(json.dumps(d))
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 2


def test_unstable_simulation_exit(tmp_path):
    d = bridge_simulation_doc()
    d["simulation"]["fds"] = {"h1": 200.0}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 5


def test_theodorsen_table(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["theodorsen", "--k", "0.1,1.0,10", "--out", str(out)]) == 0
    table = read_theodorsen_csv(out)
    assert table["k"].tolist() == [0.1, 1.0, 10.0]
    ref = flat_plate_arrays(np.array([0.1, 1.0, 10.0]))
    for n in FD_NAMES:
        np.testing.assert_array_equal(table[n], ref[n])
    assert main(["theodorsen", "--k", "0,1", "--out", str(out)]) == 2


def test_theodorsen_from_ubf_and_config(tmp_path, record):
    cfg, _ = record
    out = tmp_path / "t.csv"
    assert main(["theodorsen", "--ubf", "30,36,0.1", "--k-log", "0.1", "1", "4", "--out", str(out)]) == 0
    k = read_theodorsen_csv(out)["k"]
    assert k.size == 5 and k[-1] == pytest.approx(0.754 / 2, abs=1e-4)
    assert main(["theodorsen", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_theodorsen_csv(out)["k"].size == 2
