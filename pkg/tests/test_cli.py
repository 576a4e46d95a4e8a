"""Command line behaviour: scenario validation, run records, scans, SVG.

Most tests drive cli.main(argv) in process and parse the JSON artifacts;
one test goes through the installed console script to cover the entry
point wiring.  Exit code contract: 0 success, 2 scenario/validation
problems, 3 numerical precondition failures.
"""

import copy
import json
import subprocess

import pytest

from nldc import cli


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=1))
    return path


def _covariance_scenario(**overrides):
    scenario = {
        "state": {
            "covariance": {
                "var_tau_ps2": 0.25,
                "var_omega_rad2_ps2": 16.0,
                "cov_tau_omega": 0.3,
                "mean_tau_ps": 0.1,
                "mean_omega_rad_ps": -0.2,
            }
        },
        "kit": {"beta_L_ps2": 0.5, "delay_1_ps": 0.25, "delay_2_ps": -0.75},
    }
    scenario.update(overrides)
    return scenario


def _biphoton_scenario(n_events=2000, seed=7):
    return {
        "state": {
            "biphoton": {
                "pump_sigma_rad_ps": 1e-4,
                "pm_sigma_rad_ps": 10.0,
                "grid": {"n": 256, "domega_rad_ps": 0.25},
            }
        },
        "kit": {"beta_L_ps2": 32.0},
        "sampler": {"n_events": n_events, "seed": seed},
    }


def _stationary_scenario():
    return {
        "state": {
            "stationary": {
                "grid": {"n": 256, "domega_rad_ps": 0.25},
                "s1": {"gaussian": {"peak": 1.0, "sigma_rad_ps": 1.0}},
                "s2": {"gaussian": {"peak": 1.0, "sigma_rad_ps": 1.0}},
                "cross": "classical-extremal",
                "window_T_ps": 14.0,
            }
        },
        "kit": {"beta_L_ps2": 0.8},
    }


def _run(tmp_path, scenario, name="scenario.json", out="out"):
    path = _write(tmp_path, name, scenario)
    out_dir = tmp_path / out
    rc = cli.main(["run", str(path), "--out", str(out_dir)])
    return rc, out_dir


def _record(out_dir):
    return json.loads((out_dir / "runrecord.json").read_text())


def _stderr_error(capsys):
    err = capsys.readouterr().err.strip()
    return json.loads(err.splitlines()[-1])


# ---------------------------------------------------------------------------
# Validation failures.

def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    rc = cli.main(["run", str(path), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert _stderr_error(capsys)["error"] == "ScenarioError"


def test_unknown_key_exits_2(tmp_path, capsys):
    scenario = _covariance_scenario()
    scenario["surprise"] = 1
    rc, _ = _run(tmp_path, scenario)
    assert rc == 2
    assert "surprise" in _stderr_error(capsys)["message"]


def test_missing_state_exits_2(tmp_path, capsys):
    rc, _ = _run(tmp_path, {"kit": {"beta_L_ps2": 1.0}})
    assert rc == 2
    assert _stderr_error(capsys)["error"] == "ScenarioError"


def test_sampler_with_bare_covariance_exits_2(tmp_path, capsys):
    scenario = _covariance_scenario(sampler={"n_events": 100, "seed": 1})
    rc, _ = _run(tmp_path, scenario)
    assert rc == 2
    assert "covariance" in _stderr_error(capsys)["message"]


def test_unresolvable_grid_exits_3(tmp_path, capsys):
    scenario = _biphoton_scenario()
    del scenario["sampler"]
    # 0.5 rad/ps is neither resolved by 0.25 spacing nor narrow enough to snap.
    scenario["state"]["biphoton"]["pump_sigma_rad_ps"] = 0.5
    rc, _ = _run(tmp_path, scenario)
    assert rc == 3
    assert _stderr_error(capsys)["error"] == "GridTooCoarseError"


# ---------------------------------------------------------------------------
# Run records.

def test_covariance_record_shears_and_scores(tmp_path, capsys):
    rc, out_dir = _run(tmp_path, _covariance_scenario())
    assert rc == 0
    rec = _record(out_dir)
    assert rec["state_kind"] == "covariance"
    assert rec["schema_version"] == 1
    assert rec["scenario_hash"].startswith("sha256:")

    # Hand-propagated shear: 2*beta_L = 1, delays 0.25 and -0.75.
    plus = rec["covariance_after_plus"]
    assert plus["var_tau_ps2"] == pytest.approx(0.25 + 4 * 0.5 * 0.3 + 16.0, rel=1e-15)
    assert plus["cov_tau_omega"] == pytest.approx(0.3 + 16.0, rel=1e-15)
    assert plus["var_omega_rad2_ps2"] == 16.0
    assert plus["mean_tau_ps"] == pytest.approx(0.1 + 0.25 - (-0.75) + 1.0 * (-0.2), rel=1e-12)
    assert plus["mean_omega_rad_ps"] == -0.2

    assert rec["separability"]["product"] == pytest.approx(4.0, rel=1e-15)
    assert rec["separability"]["separable_consistent"] is True
    w = rec["witness"]
    assert w["evaluable"] is True
    assert w["lhs_ps2"] == pytest.approx(0.25 + 16.0, rel=1e-15)
    assert w["rhs_ps2"] == pytest.approx(0.25 + 1.0 / 0.25, rel=1e-15)
    assert w["violated"] is False
    assert "sampling" not in rec

    stdout = capsys.readouterr().out
    assert "witness:" in stdout and "violated=False" in stdout


def test_biphoton_run_cancels_dispersion_and_samples(tmp_path):
    rc, out_dir = _run(tmp_path, _biphoton_scenario())
    assert rc == 0
    rec = _record(out_dir)
    fft = rec["fft"]
    # Opposite-sign media on an anticorrelated pair: no broadening at all.
    assert fft["symmetrized_var_tau_ps2"] == pytest.approx(
        fft["var_tau_before_ps2"], rel=1e-12
    )
    assert rec["witness"]["violated"] is True
    assert rec["separability"]["separable_consistent"] is False

    sampling = rec["sampling"]
    assert sampling["n_events"] == 2000
    emp = sampling["empirical_witness"]
    assert emp["evaluable"] is True and emp["violated"] is True
    assert emp["significance"] > 5.0
    for label in ("before", "plus", "minus"):
        assert sampling["estimates"][label]["n"] == 2000
        lines = (out_dir / f"events_{label}.csv").read_text().splitlines()
        assert lines[1] == "t1_ps,t2_ps"
        assert len(lines) == 2 + 2000


def test_stationary_run_reports_windowed_mixture(tmp_path):
    rc, out_dir = _run(tmp_path, _stationary_scenario())
    assert rc == 0
    rec = _record(out_dir)
    assert rec["state_kind"] == "stationary"
    windowed = rec["windowed"]
    assert windowed["regime"] == "classical"
    assert 0.0 < windowed["signal_fraction"] < 1.0
    assert windowed["variance_ps2"] == rec["covariance_before"]["var_tau_ps2"]
    assert rec["witness"]["violated"] is False
    assert rec["outputs"]["tau_profile"] == "tau_profile.csv"
    profile = (out_dir / "tau_profile.csv").read_text().splitlines()
    assert profile[1] == "tau_ps,signal,background,window_ps"
    assert len(profile) == 2 + 256


def test_jitter_feasibility_flags_slow_dispersion(tmp_path):
    scenario = {
        "state": {"covariance": {"var_tau_ps2": 0.01, "var_omega_rad2_ps2": 1e-8}},
        "kit": {"beta_L_ps2": 32.0},
        "jitter_sigma_ps": 50.0,
    }
    rc, out_dir = _run(tmp_path, scenario)
    assert rc == 0
    rec = _record(out_dir)
    jitter = rec["jitter"]
    assert jitter["sigma_ps"] == 50.0
    assert jitter["var_ps2"] == 2500.0
    feas = jitter["feasibility"]
    assert feas["linewidth_ok"] is True
    assert feas["linewidth_product"] == pytest.approx(2500.0 * 1e-8, rel=1e-12)
    assert feas["dispersion_ok"] is False
    assert feas["dispersion_ratio"] == pytest.approx(64.0 / 2500.01, rel=1e-12)
    observed = rec["witness_observed"]
    assert observed["lhs_ps2"] == pytest.approx(2500.01 + 64.0 ** 2 * 1e-8, rel=1e-12)


def test_density_binary_output_round_trips(tmp_path):
    scenario = _biphoton_scenario(n_events=100, seed=3)
    scenario["outputs"] = {"density_binary": True}
    rc, out_dir = _run(tmp_path, scenario)
    assert rc == 0
    rec = _record(out_dir)
    assert rec["outputs"]["density_before"] == "density_before.bin"
    from nldc.biphoton import density_from_binary

    density = density_from_binary(out_dir / "density_before.bin")
    assert density.grid.n == 256


# ---------------------------------------------------------------------------
# Scans.

def test_jitter_scan_margin_is_non_increasing(tmp_path):
    scenario = {
        "state": {"covariance": {"var_tau_ps2": 0.01, "var_omega_rad2_ps2": 1e-8}},
        "kit": {"beta_L_ps2": 32.0},
        "jitter_sigma_ps": 0.0,
    }
    path = _write(tmp_path, "scan.json", scenario)
    out_dir = tmp_path / "scanout"
    rc = cli.main([
        "scan", str(path),
        "--param", "jitter_sigma_ps",
        "--values", "0,10,25,50",
        "--out", str(out_dir),
    ])
    assert rc == 0
    csv_path = out_dir / "scan_jitter_sigma_ps.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "value,lhs_ps2,rhs_ps2,margin_ps2,product"
    assert len(lines) == 5
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    values = [r[0] for r in rows]
    margins = [r[3] for r in rows]
    assert values == [0.0, 10.0, 25.0, 50.0]
    assert all(a >= b for a, b in zip(margins, margins[1:]))
    assert margins[0] > 0.0


def test_pump_width_scan_raises_the_product(tmp_path):
    scenario = {
        "state": {
            "biphoton": {
                "pump_sigma_rad_ps": 0.5,
                "pm_sigma_rad_ps": 2.5,
                "grid": {"n": 256, "domega_rad_ps": 0.15},
            }
        },
        "kit": {"beta_L_ps2": 1.0},
    }
    path = _write(tmp_path, "pump.json", scenario)
    out_dir = tmp_path / "pumpscan"
    rc = cli.main([
        "scan", str(path),
        "--param", "state.biphoton.pump_sigma_rad_ps",
        "--values", "0.5,0.9,1.2,2.0",
        "--out", str(out_dir),
    ])
    assert rc == 0
    lines = (out_dir / "scan_state_biphoton_pump_sigma_rad_ps.csv").read_text().splitlines()
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    products = [r[4] for r in rows]
    margins = [r[3] for r in rows]
    assert all(a < b for a, b in zip(products, products[1:]))
    assert all(m > 0.0 for m in margins)
    assert all(p < 1.0 for p in products)


def test_zero_dispersion_margin_is_exactly_zero(tmp_path):
    scenario = _covariance_scenario()
    path = _write(tmp_path, "zero.json", scenario)
    out_dir = tmp_path / "zeroscan"
    rc = cli.main([
        "scan", str(path), "--param", "kit.beta_L_ps2", "--values", "0", "--out", str(out_dir),
    ])
    assert rc == 0
    lines = (out_dir / "scan_kit_beta_L_ps2.csv").read_text().splitlines()
    row = [float(x) for x in lines[1].split(",")]
    assert row[3] == 0.0


def test_scan_rejects_bad_parameter_paths(tmp_path, capsys):
    path = _write(tmp_path, "bad.json", _covariance_scenario())
    rc = cli.main([
        "scan", str(path), "--param", "kit.nope", "--values", "1,2", "--out", str(tmp_path / "x"),
    ])
    assert rc == 2
    assert "kit.nope" in _stderr_error(capsys)["message"]
    rc = cli.main([
        "scan", str(path), "--param", "state.covariance", "--values", "1", "--out", str(tmp_path / "y"),
    ])
    assert rc == 2
    assert "numeric" in _stderr_error(capsys)["message"]


# ---------------------------------------------------------------------------
# Rendering.

def test_render_produces_deterministic_svgs(tmp_path):
    rc, out_dir = _run(tmp_path, _biphoton_scenario(n_events=300, seed=5))
    assert rc == 0
    record_path = out_dir / "runrecord.json"
    rc = cli.main(["render", str(record_path)])
    assert rc == 0
    scatter = (out_dir / "scatter.svg").read_text()
    hist = (out_dir / "tau_hist.svg").read_text()
    assert scatter.startswith("<svg") and hist.startswith("<svg")
    assert "t1 (ps)" in scatter
    assert "tau = t1 - t2 (ps)" in hist

    again = tmp_path / "again"
    rc = cli.main(["render", str(record_path), "--out", str(again)])
    assert rc == 0
    assert (again / "scatter.svg").read_text() == scatter
    assert (again / "tau_hist.svg").read_text() == hist


def test_render_requires_sampled_events(tmp_path, capsys):
    rc, out_dir = _run(tmp_path, _covariance_scenario())
    assert rc == 0
    rc = cli.main(["render", str(out_dir / "runrecord.json")])
    assert rc == 2
    assert "events" in _stderr_error(capsys)["message"]


def test_render_fails_when_events_file_vanished(tmp_path, capsys):
    rc, out_dir = _run(tmp_path, _biphoton_scenario(n_events=100, seed=2))
    assert rc == 0
    (out_dir / "events_before.csv").unlink()
    rc = cli.main(["render", str(out_dir / "runrecord.json")])
    assert rc == 2
    assert "missing" in _stderr_error(capsys)["message"]


# ---------------------------------------------------------------------------
# Determinism and configuration plumbing.

def test_repeated_runs_are_identical_apart_from_timestamp(tmp_path):
    scenario = _biphoton_scenario(n_events=500, seed=12)
    rc1, dir1 = _run(tmp_path, scenario, out="first")
    rc2, dir2 = _run(tmp_path, scenario, out="second")
    assert rc1 == rc2 == 0
    rec1, rec2 = _record(dir1), _record(dir2)
    rec1.pop("created_utc")
    rec2.pop("created_utc")
    assert rec1 == rec2
    for label in ("before", "plus", "minus"):
        name = f"events_{label}.csv"
        assert (dir1 / name).read_bytes() == (dir2 / name).read_bytes()


def test_normalize_is_idempotent_and_hash_is_stable():
    scenario = _covariance_scenario()
    once = cli.normalize_scenario(scenario)
    twice = cli.normalize_scenario(once)
    assert once == twice
    assert cli.scenario_hash(once) == cli.scenario_hash(copy.deepcopy(once))
    bumped = copy.deepcopy(once)
    bumped["kit"]["beta_L_ps2"] = 0.75
    assert cli.scenario_hash(bumped) != cli.scenario_hash(once)


def test_output_directory_precedence(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    env_dir = tmp_path / "from_env"
    monkeypatch.setenv("NLDC_OUT_DIR", str(env_dir))

    scenario = _covariance_scenario()
    path = _write(tmp_path, "prec.json", scenario)
    assert cli.main(["run", str(path)]) == 0
    assert (env_dir / "runrecord.json").exists()

    scenario_dir = tmp_path / "from_scenario"
    scenario["outputs"] = {"dir": str(scenario_dir)}
    path = _write(tmp_path, "prec2.json", scenario)
    assert cli.main(["run", str(path)]) == 0
    assert (scenario_dir / "runrecord.json").exists()

    flag_dir = tmp_path / "from_flag"
    assert cli.main(["run", str(path), "--out", str(flag_dir)]) == 0
    assert (flag_dir / "runrecord.json").exists()


def test_console_script_entry_point(tmp_path):
    path = _write(tmp_path, "cli.json", _covariance_scenario())
    out_dir = tmp_path / "cliout"
    proc = subprocess.run(
        ["nldc", "run", str(path), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "witness:" in proc.stdout
    assert (out_dir / "runrecord.json").exists()
