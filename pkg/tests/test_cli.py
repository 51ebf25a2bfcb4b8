"""Command-line interface: exit codes, CSV format, manifests, round-trips."""

import json

import numpy as np
import pytest

from moreauflow import cli


def write_config(tmp_path, **overrides):
    data = dict(objective="l1", dimension=1, alpha=9.0, t0=1.0, lambda0=1.0,
                l=1.0, beta0=1.0, m=0.0, n=2.0, b0="auto", x0=10.0, u0=0.0,
                t_end=20.0, rel_tol=1e-8, abs_tol=1e-11, sample_count=80)
    data.update(overrides)
    p = tmp_path / "config.json"
    p.write_text(json.dumps(data))
    return p


def test_simulate_writes_csv(tmp_path, capsys):
    cfgp = write_config(tmp_path)
    out = tmp_path / "run.csv"
    code = cli.main(["simulate", "--config", str(cfgp), "--out", str(out)])
    text = capsys.readouterr().out
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 81  # header + sample_count
    assert lines[0] == ("t,x_0,v_0,envelope_gap,grad_norm,prox_dist,prox_gap,"
                        "velocity_norm,energy_c_alpha_minus_1,"
                        "dist_to_minimizer,t2b_times_gap")
    assert "conditions: pass" in text
    assert "fitted log-log exponents" in text


def test_simulate_deterministic(tmp_path):
    cfgp = write_config(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", "--config", str(cfgp), "--out", str(a)]) == 0
    assert cli.main(["simulate", "--config", str(cfgp), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_invalid_t_end(tmp_path, capsys):
    cfgp = write_config(tmp_path, t_end=0.5)
    code = cli.main(["simulate", "--config", str(cfgp)])
    assert code == 1
    assert "t_end" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfgp = write_config(tmp_path, t_endd=30.0)
    code = cli.main(["check", "--config", str(cfgp)])
    assert code == 1
    assert "t_endd" in capsys.readouterr().err


def test_flag_overrides(tmp_path):
    cfgp = write_config(tmp_path, t_end=50.0, sample_count=500)
    out = tmp_path / "o.csv"
    code = cli.main(["simulate", "--config", str(cfgp), "--out", str(out),
                     "--t-end", "5", "--samples", "30"])
    assert code == 0
    rows = out.read_text().strip().splitlines()[1:]
    assert len(rows) == 30
    assert float(rows[-1].split(",")[0]) == pytest.approx(5.0)


def test_check_passing_config(tmp_path, capsys):
    cfgp = write_config(tmp_path, n=4.0)
    code = cli.main(["check", "--config", str(cfgp)])
    text = capsys.readouterr().out
    assert code == 0
    assert "epsilon witness" in text
    assert "Setting2" in text
    assert "conditions-json:" in text


def test_check_figure4a_exit3(tmp_path, capsys):
    cfgp = write_config(tmp_path, objective="elastic_abs", alpha=13.0,
                        m=12.0, n=9.0)
    code = cli.main(["check", "--config", str(cfgp)])
    text = capsys.readouterr().out
    assert code == 3
    assert "m" in text and "2m" in text
    blob = json.loads(text.split("conditions-json: ")[1])
    assert blob["overall"] is False
    assert blob["per_condition"]["III"]["pass"] is False
    assert blob["per_condition"]["IV"]["pass"] is False


def test_check_setting1(tmp_path, capsys):
    cfgp = write_config(tmp_path, beta0=0.0, n=5.0, b0=1.0)
    code = cli.main(["check", "--config", str(cfgp)])
    assert code == 0
    assert "Setting1" in capsys.readouterr().out


def test_figure_unknown_id(tmp_path, capsys):
    code = cli.main(["figure", "9", "--out", str(tmp_path)])
    assert code == 1
    assert "unknown figure id" in capsys.readouterr().out


def test_figure1_sweep_and_manifest_roundtrip(tmp_path):
    out_dir = tmp_path / "fig1"
    code = cli.main(["figure", "1", "--out", str(out_dir),
                     "--t-end", "5", "--samples", "40"])
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert len(manifest["curves"]) == 6
    assert [c["value"] for c in manifest["curves"]] == [0.0, 1.0, 2.0, 3.0, 4.0, 4.99]
    for curve in manifest["curves"]:
        path = out_dir / curve["file"]
        assert path.is_file()
        assert len(path.read_text().strip().splitlines()) == curve["rows"] + 1
        # round-trip: the embedded config re-validates to the same SystemConfig
        exp = cli.ExperimentConfig.from_dict(curve["config"])
        cfg = exp.build()
        assert cfg.schedule.n == curve["value"]
        assert cfg.t_end == 5.0 and cfg.sample_count == 40
        exp2 = cli.ExperimentConfig.from_dict(json.loads(json.dumps(exp.to_dict())))
        cfg2 = exp2.build()
        assert cfg2.schedule == cfg.schedule
        assert np.array_equal(cfg2.x0, cfg.x0) and np.array_equal(cfg2.u0, cfg.u0)
        assert (cfg2.t_end, cfg2.rel_tol, cfg2.abs_tol, cfg2.sample_count,
                cfg2.max_steps, cfg2.method) == (
            cfg.t_end, cfg.rel_tol, cfg.abs_tol, cfg.sample_count,
            cfg.max_steps, cfg.method)


def test_figure4b_flagged_diverging(tmp_path):
    out_dir = tmp_path / "fig4b"
    code = cli.main(["figure", "4b", "--out", str(out_dir), "--t-end", "30",
                     "--samples", "50"])
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    (curve,) = manifest["curves"]
    assert curve["diverging"] is True
    assert curve["conditions_pass"] is False


def test_rates_command(tmp_path, capsys):
    cfgp = write_config(tmp_path, n=2.0, t_end=40.0, sample_count=200)
    code = cli.main(["rates", "--config", str(cfgp), "--window", "4", "40"])
    text = capsys.readouterr().out
    assert code == 0
    assert "envelope_gap" in text and "exponent" in text


def test_diag_quadratic_config(tmp_path):
    cfgp = write_config(tmp_path, objective="diag_quadratic", dimension=2,
                        weights=[1.0, 2.0], center=[0.5, -1.0],
                        x0=[4.0, 4.0], u0=[0.0, 0.0], n=2.0)
    out = tmp_path / "dq.csv"
    assert cli.main(["simulate", "--config", str(cfgp), "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header.startswith("t,x_0,x_1,v_0,v_1,")
