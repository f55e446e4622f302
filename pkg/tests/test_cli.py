"""End-to-end checks of the command line interface and config validation."""

import json

import numpy as np
import pytest

from nonlocal_pme import ConfigError, load_experiment, main, read_frames_binary


def base_config(**overrides):
    config = {
        "grid": {"dims": 1, "points": 64, "halfwidth": 8.0},
        "measure": {"kind": "fractional", "alpha": 1.0},
        "truncation": {"r": 0.25, "tail_cutoff": 4.0},
        "nonlinearity": {"kind": "pme", "m": 2.0, "n": 2},
        "time": {"T": 0.1, "theta": 0.4},
        "initial": {"kind": "gaussian", "params": {"amplitude": 1.0, "width": 1.0}},
        "checks": ["operator", "energy"],
        "output": {"formats": ["csv", "json"]},
    }
    config.update(overrides)
    return config


def write_config(tmp_path, config, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def test_load_experiment_happy_path(tmp_path):
    exp = load_experiment(write_config(tmp_path, base_config()))
    assert exp.grid.points_per_axis == 64
    assert exp.mollification_index == 2
    assert exp.duration == 0.1
    assert exp.dt is None
    assert exp.checks == ("operator", "energy")


@pytest.mark.parametrize(
    "mutation",
    [
        {"extra_section": {}},
        {"grid": {"dims": 1, "points": 64, "halfwidth": 8.0, "shape": "round"}},
        {"grid": {"dims": 1, "points": 64}},
        {"measure": {"kind": "mystery"}},
        {"measure": {"kind": "fractional"}},
        {"nonlinearity": {"kind": "pme", "m": 2.0, "a": 1.0}},
        {"nonlinearity": {"kind": "linear", "knots": [0, 1]}},
        {"time": {"T": -1.0}},
        {"time": {"T": 1.0, "theta": 1.5}},
        {"initial": {"kind": "wavelet"}},
        {"initial": {"kind": "gaussian", "params": {"width": 1.0, "sigma": 2.0}}},
        {"checks": ["operator", "mystery-suite"]},
        {"output": {"formats": ["yaml"]}},
        {"refinement": {"r": [0.5, 0.25, 0.125]}},
    ],
)
def test_bad_configs_are_rejected(tmp_path, mutation):
    with pytest.raises(ConfigError):
        load_experiment(write_config(tmp_path, base_config(**mutation)))


def test_simulate_writes_requested_formats(tmp_path):
    config = base_config(output={"formats": ["csv", "json", "binary"]})
    path = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert main(["simulate", "--config", path, "--out", str(out), "--quiet"]) == 0
    assert (out / "diagnostics.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "frames.bin").exists()
    payload = json.loads((out / "summary.json").read_text())
    assert payload["violation_flags"] == []


def test_simulate_is_bit_deterministic(tmp_path):
    config = base_config(output={"formats": ["binary", "json"]})
    path = write_config(tmp_path, config)
    main(["simulate", "--config", path, "--out", str(tmp_path / "a"), "--quiet"])
    main(["simulate", "--config", path, "--out", str(tmp_path / "b"), "--quiet"])
    assert (tmp_path / "a/frames.bin").read_bytes() == (tmp_path / "b/frames.bin").read_bytes()
    assert (tmp_path / "a/summary.json").read_text() == (tmp_path / "b/summary.json").read_text()


def test_simulate_rejects_nonintegrable_order(tmp_path, capsys):
    config = base_config(measure={"kind": "fractional", "alpha": 2.5})
    assert main(["simulate", "--config", write_config(tmp_path, config), "--quiet"]) == 2
    assert "integrability" in capsys.readouterr().err


def test_simulate_rejects_oversized_step_with_the_bound(tmp_path, capsys):
    config = base_config(time={"T": 0.1, "dt": 0.5, "theta": 0.4})
    assert main(["simulate", "--config", write_config(tmp_path, config), "--quiet"]) == 2
    assert "monotonicity bound" in capsys.readouterr().err


def test_verify_runs_configured_suites(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "reports"
    assert main(["verify", "--config", path, "--out", str(out), "--quiet"]) == 0
    for name in ("operator", "energy"):
        report = json.loads((out / f"verify_{name}.json").read_text())
        assert report["ok"] is True
        assert report["seed"] == 0


def test_verify_unknown_suite_is_a_usage_error(tmp_path):
    path = write_config(tmp_path, base_config())
    assert main(["verify", "--config", path, "--suite", "mystery", "--quiet"]) == 2


def test_verify_reports_failures_with_exit_one(tmp_path, capsys):
    # at this coarse resolution the two seminorm routes genuinely disagree
    # by more than 1%, which the suite must report as a failed check
    config = base_config(
        grid={"dims": 1, "points": 128, "halfwidth": 8.0},
        checks=["sobolev"],
    )
    path = write_config(tmp_path, config)
    out = tmp_path / "reports"
    assert main(["verify", "--config", path, "--out", str(out), "--quiet"]) == 1
    report = json.loads((out / "verify_sobolev.json").read_text())
    assert report["ok"] is False
    assert "disagree" in capsys.readouterr().err


def test_verify_seed_changes_the_report(tmp_path):
    path = write_config(tmp_path, base_config(checks=["operator"]))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["verify", "--config", path, "--out", str(out_a), "--seed", "1", "--quiet"])
    main(["verify", "--config", path, "--out", str(out_b), "--seed", "2", "--quiet"])
    rep_a = json.loads((out_a / "verify_operator.json").read_text())
    rep_b = json.loads((out_b / "verify_operator.json").read_text())
    assert rep_a["seed"] == 1 and rep_b["seed"] == 2
    assert rep_a["scale"] != rep_b["scale"]


def test_convergence_table_and_report(tmp_path):
    config = base_config(
        grid={"dims": 1, "points": 128, "halfwidth": 8.0},
        truncation={"r": 0.5, "tail_cutoff": 4.0},
        refinement={"r": [0.5, 0.25, 0.125], "n": [1, 2, 4]},
    )
    path = write_config(tmp_path, config)
    out = tmp_path / "conv"
    assert main(["convergence", "--config", path, "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "convergence.json").read_text())
    assert report["decreasing"] is True
    assert len(report["sup_ball_l1_differences"]) == 2


def test_convergence_without_refinement_is_a_usage_error(tmp_path, capsys):
    assert main(["convergence", "--config", write_config(tmp_path, base_config()), "--quiet"]) == 2
    assert "refinement" in capsys.readouterr().err


def test_convergence_needs_three_levels(tmp_path):
    config = base_config(refinement={"r": [0.5, 0.25], "n": [1, 2]})
    assert main(["convergence", "--config", write_config(tmp_path, config), "--quiet"]) == 2


def test_linear_convergence_reports_spectral_comparison(tmp_path):
    config = base_config(
        grid={"dims": 1, "points": 128, "halfwidth": 8.0},
        nonlinearity={"kind": "linear"},
        truncation={"r": 0.5, "tail_cutoff": 4.0},
        refinement={"r": [0.5, 0.25, 0.125], "n": [0, 1, 2]},
    )
    path = write_config(tmp_path, config)
    out = tmp_path / "conv"
    assert main(["convergence", "--config", path, "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "convergence.json").read_text())
    assert "untruncated_spectral_sup_error" in report
    assert report["untruncated_spectral_sup_error"] > 0.0


def test_initial_box_profile(tmp_path):
    config = base_config(initial={"kind": "box", "params": {"amplitude": 2.0, "radius": 1.0}})
    exp = load_experiment(write_config(tmp_path, config))
    values = exp.initial.values
    assert set(np.unique(values)) == {0.0, 2.0}
    coords = exp.grid.coordinates()[:, 0]
    np.testing.assert_array_equal(values > 0, np.abs(coords) <= 1.0)


def test_initial_two_bumps_profile(tmp_path):
    params = {"amplitude": 1.0, "width": 1.0, "separation": 4.0}
    config = base_config(initial={"kind": "two_bumps", "params": params})
    exp = load_experiment(write_config(tmp_path, config))
    values = exp.initial.values
    # peak sits between nodes, so the sampled max lands just under the amplitude
    assert 0.9 < np.max(values) <= 1.0 + 1e-12
    assert np.min(values) >= 0.0
    np.testing.assert_allclose(values, values[::-1], atol=1e-15)


def test_initial_from_npy_file(tmp_path):
    values = np.linspace(0.0, 1.0, 64)
    np.save(tmp_path / "start.npy", values)
    config = base_config(initial={"kind": "file", "params": {"path": "start.npy"}})
    exp = load_experiment(write_config(tmp_path, config))
    np.testing.assert_array_equal(exp.initial.values, values)


def test_initial_from_frames_file_takes_the_last_frame(tmp_path):
    config = base_config(output={"formats": ["binary"]})
    path = write_config(tmp_path, config)
    out = tmp_path / "warmup"
    assert main(["simulate", "--config", path, "--out", str(out), "--quiet"]) == 0
    _, _, frames = read_frames_binary(out / "frames.bin")

    restart = base_config(
        initial={"kind": "file", "params": {"path": str(out / "frames.bin")}}
    )
    exp = load_experiment(write_config(tmp_path, restart, name="restart.json"))
    np.testing.assert_array_equal(exp.initial.values, frames[-1])


def test_thread_cap_must_be_a_positive_integer(tmp_path, monkeypatch):
    path = write_config(tmp_path, base_config())
    monkeypatch.setenv("NONLOCAL_PME_THREADS", "zero")
    assert main(["simulate", "--config", path, "--quiet"]) == 2
    monkeypatch.setenv("NONLOCAL_PME_THREADS", "0")
    assert main(["simulate", "--config", path, "--quiet"]) == 2
