"""Config parsing, output files, and the command-line entry point."""

import json
import math

import numpy as np
import pytest

from qdeph.cli import (
    ConfigError,
    build_comparison,
    main,
    parse_config,
    render_scenario,
    run_figure,
    run_sweep,
    run_trace,
)

BASE_CONFIG = """\
# hot, weakly polarized qubit against an Ohmic bath
omega0_over_cutoff = 1.0
beta_omega0 = 0.1
sigma3_mean = 0.2
lambda = 0.3333333333333333
s = 1.0
t_max_cutoff_units = 10.0
n_steps = 200
"""

FREE_CONFIG = BASE_CONFIG.replace("lambda = 0.3333333333333333",
                                  "lambda = 0.0")


def _write_config(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# parsing


def test_parse_config_fields():
    s = parse_config(BASE_CONFIG, label="demo")
    assert s.label == "demo"
    assert s.params.omega0 == 1.0
    assert s.params.beta == pytest.approx(0.1)
    assert s.params.sigma3_mean == 0.2
    assert s.params.spectral.coupling == pytest.approx(1.0 / 3.0)
    assert s.params.spectral.s == 1.0
    assert s.solver.t_max == 10.0
    assert s.solver.n_steps == 200
    assert s.outputs == ("trajectory", "breakdown")
    assert not s.ic_explicit


def test_parse_config_beta_uses_qubit_units():
    # beta_omega0 is measured against the qubit splitting, not the cutoff
    text = BASE_CONFIG.replace("omega0_over_cutoff = 1.0",
                               "omega0_over_cutoff = 2.0")
    s = parse_config(text)
    assert s.params.omega0 == 2.0
    assert s.params.beta == pytest.approx(0.05)


def test_parse_config_explicit_initial_coherence():
    text = BASE_CONFIG + "initial_coherence_re = 0.1\n" \
                         "initial_coherence_im = -0.2\n"
    s = parse_config(text)
    assert s.ic_explicit
    assert s.params.initial_coherence == 0.1 - 0.2j


@pytest.mark.parametrize("mangle, fragment", [
    (lambda t: t + "mystery_key = 1\n", "unknown key"),
    (lambda t: t + "s = 2.0\n", "duplicate key"),
    (lambda t: t.replace("0.2", "zebra"), "not a number"),
    (lambda t: t.replace("sigma3_mean = 0.2\n", ""), "sigma3_mean"),
    (lambda t: t.replace("n_steps = 200", "n_steps = 200.5"), "n_steps"),
    (lambda t: t.replace("sigma3_mean = 0.2", "sigma3_mean = 1.5"),
     "sigma3_mean"),
    (lambda t: t.replace("beta_omega0 = 0.1", "beta_omega0 = -1.0"), "beta"),
    (lambda t: t + "orphan line without equals\n", "line"),
])
def test_parse_config_rejects_bad_input(mangle, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(mangle(BASE_CONFIG))


def test_parse_error_reports_line_number():
    text = BASE_CONFIG + "\n# comment\nbogus = 3\n"
    with pytest.raises(ConfigError, match="line 11"):
        parse_config(text)


def test_render_round_trip():
    s = parse_config(BASE_CONFIG + "abs_tol = 1e-9\n", label="round",
                     outputs=("comparison",))
    again = parse_config(render_scenario(s), label="round",
                         outputs=("comparison",))
    assert again == s
    # explicit initial coherence survives the round trip too
    s2 = parse_config(BASE_CONFIG + "initial_coherence_re = 0.05\n",
                      label="round")
    assert parse_config(render_scenario(s2), label="round") == s2


# ---------------------------------------------------------------------------
# trace outputs


def test_trace_writes_expected_files(tmp_path):
    s = parse_config(FREE_CONFIG, label="free")
    paths = run_trace(s, tmp_path)
    assert sorted(p.name for p in paths) == ["free_breakdown.csv",
                                             "free_trajectory.csv"]
    lines = (tmp_path / "free_trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,re_coherence,im_coherence,abs_coherence,watchdog_flag"
    data = np.loadtxt(tmp_path / "free_trajectory.csv", delimiter=",",
                      skiprows=1)
    assert data.shape == (201, 5)
    # an uncoupled qubit keeps its initial coherence forever
    y0 = abs(s.params.initial_coherence)
    assert np.allclose(data[:, 1], y0, atol=1e-13)
    assert np.allclose(data[:, 2], 0.0, atol=1e-13)
    assert np.allclose(data[:, 3], y0, atol=1e-13)
    assert np.all(data[:, 4] == 0)

    bd = np.loadtxt(tmp_path / "free_breakdown.csv", delimiter=",",
                    skiprows=1)
    header = (tmp_path / "free_breakdown.csv").read_text().splitlines()[0]
    assert header == ("t,chi,chi_renorm,gamma_vac,gamma_th,gamma_cor,"
                      "gamma_cor_renorm,gamma_cor_exact,f_of_t")
    assert np.allclose(bd[:, 1:], 0.0)


def test_trace_breakdown_reference_row(tmp_path):
    text = BASE_CONFIG.replace("n_steps = 200", "n_steps = 400")
    s = parse_config(text, label="hot")
    run_trace(s, tmp_path)
    data = np.loadtxt(tmp_path / "hot_breakdown.csv", delimiter=",",
                      skiprows=1)
    row = data[np.argmin(np.abs(data[:, 0] - 1.0))]
    assert row[0] == 1.0
    assert row[5] == pytest.approx(0.03348231773171791, rel=1e-12)
    assert row[7] == pytest.approx(0.03384435414766424, rel=1e-12)


def test_trace_is_deterministic(tmp_path):
    s = parse_config(BASE_CONFIG, label="det")
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_trace(s, a)
    run_trace(s, b)
    for name in ("det_trajectory.csv", "det_breakdown.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_trace_writes_nothing_on_numerical_failure(tmp_path):
    # an impossible tolerance fails the kernel build before any file opens
    cfg = _write_config(tmp_path, BASE_CONFIG + "abs_tol = 1e-30\n"
                                                "rel_tol = 1e-30\n")
    out = tmp_path / "out"
    rc = main(["trace", str(cfg), "--outdir", str(out)])
    assert rc == 3
    assert not out.exists() or not any(out.iterdir())


# ---------------------------------------------------------------------------
# figure presets


def test_figure_hot_preset(tmp_path):
    report, paths = run_figure("fig1", tmp_path)
    assert sorted(p.name for p in paths) == ["fig1.gp", "fig1_curves.csv",
                                             "fig1_report.json"]
    assert report.a_init_value == pytest.approx(-0.15155592256342224,
                                                rel=1e-12)
    assert report.l2_zn == pytest.approx(0.010542807032694996, rel=1e-9)
    assert report.l2_renorm == pytest.approx(0.005933267493255863, rel=1e-9)
    assert report.winner == "renormalized"

    data = np.loadtxt(tmp_path / "fig1_curves.csv", delimiter=",", skiprows=1)
    assert data.shape == (200, 4)
    assert data[0, 0] == 0.0
    assert data[-1, 0] == 10.0
    blob = json.loads((tmp_path / "fig1_report.json").read_text())
    assert blob["winner"] == "renormalized"
    assert blob["l2_zn"] == report.l2_zn
    assert blob["n_points"] == 200

    script = (tmp_path / "fig1.gp").read_text()
    assert "fig1_curves.csv" in script
    assert "dt 1" in script and "dt 2" in script and "dt 3" in script
    assert "using 1:4" in script  # exact curve drawn from column 4


def test_figure_winner_follows_l2_rule(tmp_path):
    for preset in ("fig1", "fig2"):
        report, _ = run_figure(preset, tmp_path)
        if report.l2_renorm < report.l2_zn - 1e-12:
            assert report.winner == "renormalized"
        elif report.l2_zn < report.l2_renorm - 1e-12:
            assert report.winner == "zn"
        else:
            assert report.winner == "tie"


def test_figure_cold_preset_a_init(tmp_path):
    report, _ = run_figure("fig2", tmp_path)
    assert report.a_init_value == pytest.approx(-0.14561003108833506,
                                                rel=1e-12)


def test_figure_coupling_override(tmp_path):
    report, _ = run_figure("fig1", tmp_path, coupling=0.0)
    assert report.l2_zn == 0.0
    assert report.l2_renorm == 0.0
    assert report.winner == "tie"
    data = np.loadtxt(tmp_path / "fig1_curves.csv", delimiter=",", skiprows=1)
    assert np.all(data[:, 1:] == 0.0)


def test_figure_unknown_preset(tmp_path):
    with pytest.raises(ConfigError):
        run_figure("fig9", tmp_path)


# ---------------------------------------------------------------------------
# sweeps


def test_sweep_polarization_axis(tmp_path):
    s = parse_config(BASE_CONFIG, label="pol")
    paths = run_sweep(s, "sigma3_mean", [-0.5, 0.0, 0.5], tmp_path)
    assert paths[0].name == "pol_sweep_sigma3_mean.csv"
    lines = paths[0].read_text().splitlines()
    assert lines[0] == ("sigma3_mean,a_init,l2_zn,l2_renorm,winner,"
                       "renorm_correction,status,message")
    assert len(lines) == 4
    rows = [line.split(",") for line in lines[1:]]
    assert [float(r[0]) for r in rows] == [-0.5, 0.0, 0.5]
    assert all(r[6] == "ok" for r in rows)
    # a_init decreases monotonically with polarization
    a_vals = [float(r[1]) for r in rows]
    assert a_vals[0] > a_vals[1] > a_vals[2]


def test_sweep_coupling_correction_scaling(tmp_path):
    s = parse_config(BASE_CONFIG, label="lam")
    paths = run_sweep(s, "lambda", [0.1, 0.05], tmp_path)
    rows = [line.split(",")
            for line in paths[0].read_text().splitlines()[1:]]
    corr = [float(r[5]) for r in rows]
    assert corr[0] / corr[1] == pytest.approx(4.0, abs=0.05)


def test_sweep_keeps_failed_points_in_row(tmp_path):
    s = parse_config(BASE_CONFIG, label="bad")
    paths = run_sweep(s, "s", [1.0, -1.0], tmp_path)
    rows = [line.split(",")
            for line in paths[0].read_text().splitlines()[1:]]
    assert rows[0][6] == "ok"
    assert rows[1][6] == "error"
    assert rows[1][1] == "nan"
    assert rows[1][7] != ""


def test_sweep_parallel_matches_serial(tmp_path):
    s = parse_config(BASE_CONFIG, label="par")
    serial = run_sweep(s, "beta", [0.05, 0.2, 1.0, 5.0], tmp_path / "a")
    parallel = run_sweep(s, "beta", [0.05, 0.2, 1.0, 5.0], tmp_path / "b",
                         jobs=3)
    assert serial[0].read_bytes() == parallel[0].read_bytes()


def test_sweep_argument_validation(tmp_path):
    s = parse_config(BASE_CONFIG)
    with pytest.raises(ConfigError):
        run_sweep(s, "volume", [1.0], tmp_path)
    with pytest.raises(ConfigError):
        run_sweep(s, "lambda", [], tmp_path)
    with pytest.raises(ConfigError):
        run_sweep(s, "lambda", [0.1], tmp_path, jobs=0)


# ---------------------------------------------------------------------------
# entry point


def test_main_trace_and_compare(tmp_path, capsys):
    cfg = _write_config(tmp_path, FREE_CONFIG)
    rc = main(["trace", str(cfg), "--outdir", str(tmp_path), "--label",
               "cli"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "cli_trajectory.csv" in out
    assert (tmp_path / "cli_trajectory.csv").exists()

    rc = main(["compare", str(cfg), "--outdir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "scenario_comparison.csv").exists()
    assert (tmp_path / "scenario_report.json").exists()


def test_main_outputs_selection(tmp_path):
    cfg = _write_config(tmp_path, FREE_CONFIG)
    out = tmp_path / "only"
    rc = main(["trace", str(cfg), "--outdir", str(out), "--outputs",
               "comparison"])
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["scenario_comparison.csv", "scenario_report.json"]


def test_main_figure_summary_line(tmp_path, capsys):
    rc = main(["figure", "fig1", "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "winner = renormalized" in out
    assert "a_init = -0.151556" in out


def test_main_sweep(tmp_path):
    cfg = _write_config(tmp_path, BASE_CONFIG)
    rc = main(["sweep", str(cfg), "--axis", "lambda", "--values",
               "0.1,0.2", "--outdir", str(tmp_path), "--jobs", "2"])
    assert rc == 0
    assert (tmp_path / "scenario_sweep_lambda.csv").exists()


def test_main_config_errors_exit_2(tmp_path, capsys):
    rc = main(["trace", str(tmp_path / "missing.cfg")])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err

    cfg = _write_config(tmp_path, BASE_CONFIG + "nonsense = 1\n")
    assert main(["trace", str(cfg)]) == 2

    cfg2 = _write_config(tmp_path, BASE_CONFIG, name="ok.cfg")
    assert main(["sweep", str(cfg2), "--axis", "lambda",
                 "--values", " "]) == 2
    assert main(["sweep", str(cfg2), "--axis", "lambda",
                 "--values", "0.1,oops"]) == 2


def test_main_rejects_unknown_subcommand_or_preset(tmp_path):
    with pytest.raises(SystemExit):
        main(["figure", "fig9", "--outdir", str(tmp_path)])
    with pytest.raises(SystemExit):
        main(["frobnicate"])
