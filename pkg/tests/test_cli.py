"""Tests for the command line front end."""

import json
import os

import numpy as np
import pytest

from dibvp.cli import emit_report, run_command
from dibvp.core import lax_wendroff, leap_frog, save_scheme, upwind


@pytest.fixture
def paths(tmp_path):
    out = {}
    for name, scheme in [
        ("upwind", upwind(0.5, 1.0)),
        ("upwind_unstable", upwind(0.5, 2.4)),
        ("upwind_extrap", upwind(0.5, 1.0, boundary="extrapolation")),
        ("leapfrog", leap_frog(0.5, 1.0)),
        ("lw_extrap", lax_wendroff(1.0, 0.5, boundary="extrapolation")),
    ]:
        path = tmp_path / f"{name}.json"
        save_scheme(scheme, path)
        out[name] = str(path)
    out["dir"] = tmp_path
    return out


def run(argv, capsys):
    code = run_command(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# exit codes and verdicts


def test_check_cauchy_stable_scheme_passes(paths, capsys):
    code, out, _ = run(["check-cauchy", "--scheme", paths["upwind"]], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == "dibvp-report/1"
    assert rep["command"] == "check-cauchy"
    assert rep["verdicts"][0]["ok"] is True
    radii = [row[1] for row in rep["data"]["radius_samples"]["rows"]]
    assert max(radii) <= 1 + 1e-10


def test_check_cauchy_unstable_scheme_fails(paths, capsys):
    code, out, _ = run(
        ["check-cauchy", "--scheme", paths["upwind_unstable"]], capsys
    )
    assert code == 1
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is False
    assert "max radius" in rep["verdicts"][0]["detail"]


def test_check_glancing_flags_zero_velocity_modes(paths, capsys):
    code, out, _ = run(["check-glancing", "--scheme", paths["leapfrog"]], capsys)
    assert code == 1
    rep = json.loads(out)
    thetas = {row[1] for row in rep["data"]["glancing_points"]["rows"]}
    assert any(abs(t - np.pi / 2) < 1e-6 for t in thetas)
    assert any(abs(t - 3 * np.pi / 2) < 1e-6 for t in thetas)


def test_check_glancing_clean_scheme_passes(paths, capsys):
    code, out, _ = run(["check-glancing", "--scheme", paths["upwind"]], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is True
    assert rep["data"]["glancing_points"]["rows"] == []


def test_check_uklc_dirichlet_passes(paths, capsys):
    code, out, _ = run(
        ["check-uklc", "--scheme", paths["upwind"], "--grid-ntheta", "16"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is True
    mins = [row[1] for row in rep["data"]["per_radius_min"]["rows"]]
    assert min(mins) == pytest.approx(1.0, abs=1e-9)


def test_check_uklc_marginal_closure_fails(paths, capsys):
    code, out, _ = run(
        ["check-uklc", "--scheme", paths["lw_extrap"],
         "--grid-radii", "0.1,0.001,1e-5,1e-7", "--grid-ntheta", "16"],
        capsys,
    )
    assert code == 1
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is False
    mins = [row[1] for row in rep["data"]["per_radius_min"]["rows"]]
    assert mins == sorted(mins, reverse=True)


def test_classify_blocks_is_informational(paths, capsys):
    code, out, _ = run(["classify-blocks", "--scheme", paths["upwind"]], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"] == []
    rows = rep["data"]["blocks"]["rows"]
    assert len(rows) == 1
    assert rows[0][3] == "crossing"


def test_classify_blocks_angle_moves_spectrum(paths, capsys):
    code, out, _ = run(
        ["classify-blocks", "--scheme", paths["upwind"],
         "--z-angle", "1.0"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    kinds = {row[3] for row in rep["data"]["blocks"]["rows"]}
    assert kinds == {"contracting"}
    assert rep["config"]["z_angle"] == 1.0


def test_sbp_decompose_one_step_scheme(paths, capsys):
    code, out, _ = run(["sbp-decompose", "--scheme", paths["upwind"]], capsys)
    assert code == 0
    rep = json.loads(out)
    assert "boundary rate constant" in rep["verdicts"][0]["detail"]
    assert rep["data"]["difference_coefficients"]["rows"]


def test_sbp_decompose_multi_step_fails(paths, capsys):
    code, out, _ = run(["sbp-decompose", "--scheme", paths["leapfrog"]], capsys)
    assert code == 1
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is False
    assert "one-step" in rep["verdicts"][0]["detail"]


def test_simulate_reports_norm_series(paths, capsys):
    code, out, _ = run(
        ["simulate", "--scheme", paths["upwind"], "--n-max", "40",
         "--seed", "7"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"] == []
    assert rep["config"]["seed"] == 7
    assert len(rep["data"]["levels"]["rows"]) == 41
    summary = rep["data"]["summary"]["rows"][0]
    assert all(v >= 0 for v in summary)


def test_verify_thm1_bounded(paths, capsys):
    code, out, _ = run(
        ["verify", "--scheme", paths["upwind"], "--estimate", "thm1",
         "--grid-refinements", "0.1,0.05", "--grid-gammas", "0.1,1.0",
         "--t-end", "5.0"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    assert "bounded" in rep["verdicts"][0]["detail"]
    assert len(rep["data"]["ratios"]["rows"]) == 4


def test_verify_strong_marginal_closure_grows(paths, capsys):
    code, out, _ = run(
        ["verify", "--scheme", paths["upwind_extrap"], "--estimate", "strong",
         "--grid-refinements", "0.1,0.05,0.025", "--t-end", "50"],
        capsys,
    )
    assert code == 1
    rep = json.loads(out)
    assert "growth" in rep["verdicts"][0]["detail"]


def test_verify_semigroup_tables(paths, capsys):
    code, out, _ = run(
        ["verify", "--scheme", paths["upwind"], "--estimate", "semigroup",
         "--grid-refinements", "0.1,0.05", "--t-end", "5.0"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    c2 = [row[1] for row in rep["data"]["c2"]["rows"]]
    assert c2 == pytest.approx([1.0, 1.0], abs=1e-12)
    assert rep["data"]["checks"]["rows"][0][0] is True


def test_packet_experiment_glancing_carrier_detected(paths, capsys):
    code, out, _ = run(
        ["packet-experiment", "--scheme", paths["leapfrog"],
         "--xi", repr(np.pi / 2), "--branch", "1", "--dts", "0.1"],
        capsys,
    )
    assert code == 1
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is False
    fits = rep["data"]["fits"]["rows"]
    assert fits[0][3] >= 0.9
    assert fits[0][1] == pytest.approx(rep["config"]["reference"], rel=0.05)
    assert abs(rep["config"]["velocity"]) <= 1e-6


def test_packet_experiment_transported_carrier_passes(paths, capsys):
    code, out, _ = run(
        ["packet-experiment", "--scheme", paths["upwind"], "--xi", "0.0",
         "--Ts", "50,100,200", "--dts", "0.1"],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"][0]["ok"] is True
    ratios = [row[3] for row in rep["data"]["trace_sums"]["rows"]]
    assert max(ratios) <= 1.0


def test_packet_experiment_thread_env_sharding(paths, capsys, monkeypatch):
    argv = ["packet-experiment", "--scheme", paths["upwind"], "--xi", "0.0",
            "--Ts", "30,60", "--dts", "0.2,0.1"]
    monkeypatch.setenv("DIBVP_THREADS", "2")
    code, out_threaded, _ = run(argv, capsys)
    monkeypatch.setenv("DIBVP_THREADS", "1")
    code1, out_serial, _ = run(argv, capsys)
    assert code == code1
    a, b = json.loads(out_threaded), json.loads(out_serial)
    a.pop("meta"), b.pop("meta")
    assert a == b


# ---------------------------------------------------------------------------
# usage and configuration errors


def test_missing_scheme_file_exits_two(paths, capsys):
    code, _, err = run(
        ["check-cauchy", "--scheme", str(paths["dir"] / "missing.json")],
        capsys,
    )
    assert code == 2
    assert "cannot load scheme" in err


def test_unknown_command_exits_two(paths, capsys):
    code, _, _ = run(["frobnicate", "--scheme", paths["upwind"]], capsys)
    assert code == 2


def test_nonpositive_tolerance_exits_two(paths, capsys):
    code, _, err = run(
        ["check-cauchy", "--scheme", paths["upwind"], "--tol-radius", "-1"],
        capsys,
    )
    assert code == 2
    assert "must be positive" in err


def test_bad_float_list_exits_two(paths, capsys):
    code, _, _ = run(
        ["check-uklc", "--scheme", paths["upwind"], "--grid-radii", "a,b"],
        capsys,
    )
    assert code == 2


def test_incompatible_horizon_exits_two(paths, capsys):
    code, _, err = run(
        ["verify", "--scheme", paths["leapfrog"], "--estimate", "semigroup",
         "--t-end", "0.05"],
        capsys,
    )
    assert code == 2
    assert "n_max" in err


def test_bad_packet_branch_exits_two(paths, capsys):
    code, _, err = run(
        ["packet-experiment", "--scheme", paths["leapfrog"], "--xi", "0.7",
         "--branch", "9"],
        capsys,
    )
    assert code == 2
    assert "branch" in err


def test_corrupt_scheme_file_exits_two(paths, capsys):
    bad = paths["dir"] / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["check-cauchy", "--scheme", str(bad)], capsys)
    assert code == 2
    assert "cannot load scheme" in err


# ---------------------------------------------------------------------------
# artifacts


def test_out_directory_artifacts(paths, capsys):
    out_dir = paths["dir"] / "artifacts"
    code, out, _ = run(
        ["check-glancing", "--scheme", paths["leapfrog"],
         "--out", str(out_dir)],
        capsys,
    )
    assert code == 1
    files = sorted(os.listdir(out_dir))
    assert files == ["glancing_points.csv", "report.json"]
    with open(out_dir / "report.json") as fh:
        assert json.load(fh) == json.loads(out)
    lines = (out_dir / "glancing_points.csv").read_text().splitlines()
    assert lines[0] == "branch,theta,kappa_re,kappa_im,zeta_re,zeta_im,abs_deriv,deriv_err"
    assert len(lines) == 1 + len(json.loads(out)["data"]["glancing_points"]["rows"])


def test_csv_keeps_header_for_empty_table(paths, capsys):
    out_dir = paths["dir"] / "empty"
    run(["check-glancing", "--scheme", paths["upwind"],
         "--out", str(out_dir)], capsys)
    lines = (out_dir / "glancing_points.csv").read_text().splitlines()
    assert lines == ["branch,theta,kappa_re,kappa_im,zeta_re,zeta_im,abs_deriv,deriv_err"]


def test_reports_byte_stable_given_seed(paths, capsys):
    argv = ["simulate", "--scheme", paths["upwind"], "--n-max", "30",
            "--seed", "3"]
    d1, d2 = paths["dir"] / "run1", paths["dir"] / "run2"
    run(argv + ["--out", str(d1)], capsys)
    run(argv + ["--out", str(d2)], capsys)
    r1 = json.loads((d1 / "report.json").read_text())
    r2 = json.loads((d2 / "report.json").read_text())
    r1.pop("meta"), r2.pop("meta")
    assert r1 == r2
    for name in ("levels.csv", "summary.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_emit_report_handles_non_finite(tmp_path):
    report = {
        "schema": "dibvp-report/1",
        "command": "demo",
        "config": {"seed": 0},
        "verdicts": [],
        "data": {"t": {"columns": ["x"], "rows": [[float("nan")], [1.5]]}},
        "version": "0",
        "meta": {},
    }
    emit_report(report, str(tmp_path))
    loaded = json.loads((tmp_path / "report.json").read_text())
    assert loaded["data"]["t"]["rows"][0][0] is None
    lines = (tmp_path / "t.csv").read_text().splitlines()
    # a lone empty field is quoted so the row stays non-empty
    assert lines == ["x", '""', "1.5"]
