import configparser
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from isac_crlb import cli
from isac_crlb.config import (
    DEFAULT_B,
    ExperimentConfig,
    SweepBlock,
    load_config,
    make_rng,
    parse_config,
)
from isac_crlb.errors import ConfigurationError, NumericalError
from isac_crlb.units import db_to_linear
from isac_crlb.waveform import write_signal, synthesize

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _cfg(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(text)
    return parse_config(cp)


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------


def test_defaults():
    cfg = _cfg("")
    assert cfg.waveform.B == DEFAULT_B
    assert cfg.waveform.T_F == 10e-3
    assert_allclose(cfg.scene.gamma, 10.0)
    assert cfg.scene.f_c == 28e9
    assert (cfg.array.N_T, cfg.array.N_R) == (8, 8)


def test_db_keys_and_case_sensitive_names():
    cfg = _cfg("[scenario]\nname = x\n[waveform]\nfamily = PMCW\nK = 4\nL = 7\n[scene]\ngamma_db = 20\n")
    assert cfg.name == "x"
    assert cfg.waveform.family == "pmcw"
    assert (cfg.waveform.K, cfg.waveform.L) == (4, 7)
    assert_allclose(cfg.scene.gamma, 100.0)


def test_snr_needs_sample_count():
    cfg = _cfg("[scene]\nsnr = 0.5\nn_s = 2e6\n")
    assert_allclose(cfg.scene.gamma, 1e6)
    with pytest.raises(ConfigurationError):
        _cfg("[scene]\nsnr = 0.5\n")
    with pytest.raises(ConfigurationError):
        _cfg("[scene]\nsnr = 0.5\nn_s = 10\ngamma = 3\n")


@pytest.mark.parametrize(
    "text",
    [
        "[bogus]\nx = 1\n",
        "[waveform]\nfoo = 1\n",
        "[waveform]\nB_db = 3\n",
        "[waveform]\nK = four\n",
        "[waveform]\nfamily = ofdma\n",
        "[scene]\ngamma = -1\n",
        "[scene]\ntheta_R = 2\n",
        "[sweep]\nvariable = nothing\nvalues = 1 2\n",
        "[sweep]\nvariable = gamma\n",
        "[sweep]\nvariable = gamma\nstart = 1\nstop = 2\n",
        "[sweep]\nengine = fast\n",
    ],
)
def test_bad_configs(text):
    with pytest.raises(ConfigurationError):
        _cfg(text)


def test_sweep_ranges():
    sw = SweepBlock(variable="gamma", start=1.0, stop=100.0, steps=3, log="yes")
    assert_allclose(sw.values, [1.0, 10.0, 100.0])
    sw = SweepBlock(variable="gamma", start=0.0, stop=1.0, steps=5)
    assert_allclose(sw.values, np.linspace(0, 1, 5))


def test_with_value():
    cfg = _cfg("")
    assert_allclose(cfg.with_value("gamma_db", 20).scene.gamma, 100.0)
    c = cfg.with_value("N_R", 4.0)
    assert c.array.N_R == 4 and isinstance(c.array.N_R, int)
    with pytest.raises(ConfigurationError):
        cfg.with_value("N_R", 2.5)
    assert cfg.with_value("waveform.K", 16).waveform.K == 16


def test_shipped_configs_parse():
    for p in sorted(CONFIGS.glob("*.ini")):
        load_config(p)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "nope.ini")


def test_philox_streams_repeat():
    a = make_rng(7).standard_normal(5)
    b = make_rng(7).standard_normal(5)
    assert np.array_equal(a, b)
    with pytest.raises(ConfigurationError):
        make_rng(-1)


def test_waveform_builds(rng):
    for fam in ("fmcw", "pmcw", "ofdm", "otfs"):
        cfg = _cfg(f"[waveform]\nfamily = {fam}\nB = 4e6\nT_F = 1e-4\nK = 4\nL = 8\npulse = rrc\nalpha = 0.5\n")
        spec = cfg.waveform.build(rng)
        assert spec.K == 4
    with pytest.raises(ConfigurationError):
        _cfg("[waveform]\nfamily = pmcw\npulse = rc\n").waveform.build(rng)


# --------------------------------------------------------------------------
# figures
# --------------------------------------------------------------------------


def _table(path):
    header, rows = cli.read_csv(path)
    return header, rows


def test_figure_csvs(tmp_path):
    assert cli.main(["figure", "fig1", "--out", str(tmp_path)]) == 0
    header, rows = _table(tmp_path / "fig1.csv")
    assert header[0] == "K"
    assert len(rows) == 199
    assert_allclose(float(rows[0][-1]), 4 / 3, rtol=1e-15)

    cli.main(["figure", "fig3", "--out", str(tmp_path)])
    header, rows = _table(tmp_path / "fig3.csv")
    row = next(r for r in rows if r[0] == "10")
    assert_allclose([float(row[1]), float(row[2])], 0.99, rtol=1e-15)

    cli.main(["figure", "fig4", "--out", str(tmp_path)])
    header, rows = _table(tmp_path / "fig4.csv")
    row = next(r for r in rows if r[0] == "TDM" and r[1] == "8")
    assert float(row[header.index("r_tau")]) == 64.0

    cli.main(["figure", "fig2", "--out", str(tmp_path)])
    header, rows = _table(tmp_path / "fig2.csv")
    assert len(rows) == 100
    assert all(float(r[5]) < float(r[7]) for r in rows)


def test_figures_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        cli.main(["figure", "fig2", "--out", str(tmp_path / d), "--seed", "3"])
    a = (tmp_path / "a" / "fig2.csv").read_bytes()
    assert a == (tmp_path / "b" / "fig2.csv").read_bytes()
    assert a.startswith(b"# seed=3\n")


def test_figure_plot(tmp_path):
    pytest.importorskip("matplotlib")
    for fig in ("fig1", "fig4"):
        assert cli.main(["figure", fig, "--out", str(tmp_path), "--format", "csv+plot"]) == 0
        assert (tmp_path / f"{fig}.svg").read_text().lstrip().startswith("<?xml")


def test_unknown_figure():
    with pytest.raises(ConfigurationError):
        cli.figure_rows("fig9")


# --------------------------------------------------------------------------
# crlb and sweep
# --------------------------------------------------------------------------


def test_single_point(tmp_path, capsys):
    code = cli.main(["crlb", str(CONFIGS / "default_crlb.ini"), "--out", str(tmp_path)])
    assert code == 0
    header, rows = _table(tmp_path / "default_crlb_crlb.csv")
    assert header == cli.BOUND_COLUMNS
    c_tau, c_r = float(rows[0][0]), float(rows[0][3])
    assert_allclose(c_r, (299792458.0 / 2) ** 2 * c_tau, rtol=1e-14)


def test_unbounded_cell(tmp_path):
    p = _write(tmp_path, "[scenario]\nname = one\n[waveform]\nfamily = fmcw\nK = 1\n[array]\nN_R = 1\n")
    cli.main(["crlb", str(p), "--out", str(tmp_path)])
    _, rows = _table(tmp_path / "one_crlb.csv")
    assert rows[0][:3] == ["unbounded"] * 3


def test_gamma_sweep_scales(tmp_path):
    cli.main(["sweep", str(CONFIGS / "sweep_gamma.ini"), "--out", str(tmp_path)])
    header, rows = _table(tmp_path / "sweep_gamma_sweep.csv")
    vals = np.array([[float(x) for x in r[1:4]] for r in rows])
    gam = db_to_linear(np.array([float(r[0]) for r in rows]))
    assert_allclose(vals * gam[:, None], np.tile(vals[0] * gam[0], (len(rows), 1)), rtol=1e-12)


def test_array_sweep_law(tmp_path):
    cli.main(["sweep", str(CONFIGS / "sweep_nr.ini"), "--out", str(tmp_path)])
    header, rows = _table(tmp_path / "sweep_nr_sweep.csv")
    n = np.array([float(r[0]) for r in rows])
    c = np.array([float(r[header.index("c_theta_rad2")]) for r in rows])
    law = c * n * (n**2 - 1)
    assert_allclose(law, law[0], rtol=1e-12)


def test_angle_sweep_diverges(tmp_path):
    eps = [1e-1, 1e-2, 1e-3]
    text = "[scenario]\nname = th\n[sweep]\nvariable = theta_R\nvalues = " + " ".join(
        repr(math.pi / 2 - e) for e in eps
    )
    cli.main(["sweep", str(_write(tmp_path, text)), "--out", str(tmp_path)])
    _, rows = _table(tmp_path / "th_sweep.csv")
    c = np.array([float(r[3]) for r in rows])
    assert_allclose(c * np.cos(np.pi / 2 - np.array(eps)) ** 2, c[0] * math.cos(math.pi / 2 - eps[0]) ** 2, rtol=1e-9)
    assert np.all(np.diff(c) > 0)


def test_numeric_sweep_engine(tmp_path):
    text = (
        "[scenario]\nname = ns\n[waveform]\nfamily = fmcw\nB = 4e6\nT_F = 1.024e-3\nK = 16\n"
        "[sweep]\nvariable = gamma\nvalues = 10 20\nengine = numeric\n"
    )
    cli.main(["sweep", str(_write(tmp_path, text)), "--out", str(tmp_path)])
    _, rows = _table(tmp_path / "ns_sweep.csv")
    assert_allclose(float(rows[0][1]) / float(rows[1][1]), 2.0, rtol=1e-9)


# --------------------------------------------------------------------------
# verify and exit codes
# --------------------------------------------------------------------------


def test_verify_fmcw_passes(capsys):
    assert cli.main(["verify", str(CONFIGS / "verify_fmcw.ini")]) == 0
    out = capsys.readouterr().out
    assert "status: pass" in out
    assert "FAIL" not in out


def test_verify_signal_file(tmp_path, capsys):
    cfg = load_config(CONFIGS / "verify_fmcw.ini")
    spec = cfg.waveform.build(make_rng(0))
    p = tmp_path / "s.bin"
    write_signal(p, synthesize(spec))
    assert cli.main(["verify", str(CONFIGS / "verify_fmcw.ini"), "--signal", str(p)]) == 0


def test_tolerance_failure_names_worst(monkeypatch, capsys):
    monkeypatch.setitem(cli.TOLERANCE, "fmcw", 1e-12)
    assert cli.main(["verify", str(CONFIGS / "verify_fmcw.ini")]) == 3
    out = capsys.readouterr().out
    assert "worst offender: rel_err_c_tau" in out
    assert "status: fail" in out


def test_config_error_exit(tmp_path):
    assert cli.main(["crlb", str(_write(tmp_path, "[waveform]\nK = -3\n"))]) == 1
    assert cli.main(["crlb", str(tmp_path / "missing.ini")]) == 1
    p = _write(tmp_path, "[waveform]\nfamily = fmcw\nB = 4e6\nT_F = 1e-4\nK = 2\n")
    assert cli.main(["verify", str(p), "--oversample", "0"]) == 1


def test_numerical_failure_exit(monkeypatch):
    def boom(cfg):
        raise NumericalError("FIM not PSD")

    monkeypatch.setattr(cli, "numeric_crlb", boom)
    assert cli.main(["verify", str(CONFIGS / "verify_fmcw.ini")]) == 2
