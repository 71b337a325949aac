"""CLI commands, project config parsing, and the HTTP JSON service.

The CLI and the service share one numeric core; the golden test here
asserts they emit identical numbers for the same design request.
"""

import json
import threading
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np
import pytest

from resetloop.cli import EXIT_INFEASIBLE, EXIT_OK, main
from resetloop.config import (
    SCHEMA_VERSION,
    load_project_config,
    parse_design_request,
    parse_project_config,
    parse_sim_config,
)
from resetloop.errors import ConfigError
from resetloop.fixtures import OMEGA_RES, baseline_controller, default_plant
from resetloop.service import make_server
from resetloop.workflows import analyze_linear, run_design, run_simulation


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("proj")
    c_l = baseline_controller(default_plant())
    cfg = {
        "plant": {"synthetic": "two-mass"},
        "baseline_controller": c_l.to_json_dict(),
        "grid": {"omega_min": 0.5, "omega_max": 2000.0, "points_per_decade": 16},
        "omega_res": OMEGA_RES,
    }
    path = tmp / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="module")
def design_request_file(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("req")
    req = {
        "notches": [{"omega_n": 5.0, "q1": 1.0, "q2": 2.0}],
        "omega_l": 50.0,
        "a_rho": 0.0,
    }
    path = tmp / "design.json"
    path.write_text(json.dumps(req))
    return path


class TestConfigParsing:
    def test_missing_fields(self):
        with pytest.raises(ConfigError):
            parse_project_config({"plant": {"synthetic": "two-mass"}})

    def test_omega_res_inside_grid(self, config_file):
        obj = json.loads(config_file.read_text())
        obj["omega_res"] = 5000.0
        with pytest.raises(ConfigError):
            parse_project_config(obj)

    def test_grid_validation(self, config_file):
        obj = json.loads(config_file.read_text())
        obj["grid"]["omega_min"] = -1.0
        with pytest.raises(ConfigError):
            parse_project_config(obj)

    def test_design_request_validation(self):
        with pytest.raises(ConfigError):
            parse_design_request({"omega_l": 1.0, "a_rho": 0.0})
        with pytest.raises(ConfigError):
            parse_design_request({"notches": [], "omega_l": 1.0, "a_rho": 0.0,
                                  "c1_notch_indices": [3]})

    def test_sim_config_modes(self):
        with pytest.raises(ConfigError):
            parse_sim_config({"mode": "warp"})
        cfg = parse_sim_config({"mode": "sinusoid", "omega": 3.0})
        assert cfg.omega == 3.0

    def test_frf_plant_loading(self, tmp_path):
        from resetloop.lti import sample_frf, write_frf_csv

        table = sample_frf(default_plant().model, np.geomspace(0.5, 2000, 200))
        frf_path = tmp_path / "plant.csv"
        write_frf_csv(table, frf_path)
        cfg = {
            "plant": {"frf_csv": "plant.csv"},
            "baseline_controller": baseline_controller(default_plant()).to_json_dict(),
            "grid": {"omega_min": 1.0, "omega_max": 1000.0, "points_per_decade": 8},
            "omega_res": 300.0,
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        config = load_project_config(cfg_path)
        plant = config.load_plant()
        assert plant.omega_min == pytest.approx(0.5)


class TestCliCommands:
    def test_design_writes_artifacts(self, config_file, tmp_path):
        out = tmp_path / "out"
        code = main(["design", "--config", str(config_file), "--out", str(out),
                     "--notch", "5:1:2", "--omega-l", "50", "--a-rho", "0"])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["verdict"] == "pass"
        assert report["schema_version"] == SCHEMA_VERSION
        design = json.loads((out / "design.json").read_text())
        assert design["derived"]["D_r"] > 0
        assert (out / "curves.csv").exists()
        assert (out / "sensitivity.svg").exists()
        assert (out / "df_bode.svg").exists()
        assert (out / "harmonic_ratio.svg").exists()

    def test_curves_csv_round_trips_through_parser(self, config_file, tmp_path):
        from resetloop.closedloop import read_curves_csv

        out = tmp_path / "out"
        main(["design", "--config", str(config_file), "--out", str(out),
              "--notch", "5:1:2", "--omega-l", "50", "--a-rho", "0"])
        curves = read_curves_csv(out / "curves.csv")
        assert curves.omega.size > 10
        assert np.all(np.isfinite(curves.s_inf))

    def test_infeasible_design_exit_code(self, config_file, tmp_path, capsys):
        code = main(["design", "--config", str(config_file),
                     "--out", str(tmp_path / "o"),
                     "--notch", "40:0.3:6", "--omega-l", "45", "--a-rho", "0"])
        assert code == EXIT_INFEASIBLE
        err = capsys.readouterr().err
        assert "achievable" in err

    def test_analyze_linear_only(self, config_file, tmp_path):
        from resetloop.closedloop import read_curves_csv

        out = tmp_path / "out"
        code = main(["analyze", "--config", str(config_file), "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["kind"] == "linear-analysis"
        assert report["design"] is None
        curves = report["curves"]
        np.testing.assert_allclose(curves["s_inf"], curves["s_lin_mag"], atol=1e-12)
        # the emitted CSV round-trips through the package parser
        back = read_curves_csv(out / "curves.csv")
        np.testing.assert_allclose(back.s_lin_mag, curves["s_lin_mag"], rtol=0)

    def test_analyze_with_design_file(self, config_file, design_request_file, tmp_path):
        out = tmp_path / "out"
        code = main(["analyze", "--config", str(config_file), "--out", str(out),
                     "--design", str(design_request_file), "--deg"])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["verdict"] == "pass"
        assert "theta_required_deg" in report

    def test_malformed_frf_reports_row(self, tmp_path, capsys):
        frf = tmp_path / "bad.csv"
        frf.write_text("freq_unit,rad_s\n1.0,1.0,0.0\nbroken-row\n")
        cfg = {
            "plant": {"frf_csv": str(frf)},
            "baseline_controller": {"num": [1.0], "den": [1.0]},
            "grid": {"omega_min": 1.0, "omega_max": 10.0, "points_per_decade": 8},
            "omega_res": 5.0,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        code = main(["analyze", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 1
        assert ":3" in capsys.readouterr().err

    def test_simulate_paired_comparison(self, config_file, design_request_file,
                                        tmp_path, capsys):
        run_cfg = tmp_path / "run.json"
        run_cfg.write_text(json.dumps({
            "mode": "trajectory", "ts": 0.002, "distance": 1.0,
            "move_duration": 0.5, "hold_duration": 20.0, "bound": 5e-4,
            "disturbance": {"amplitude": 20.0, "omega": 5.0, "decay": 0.3,
                            "t_start": "t_r"},
        }))
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(config_file), "--out", str(out),
                     "--run", str(run_cfg), "--design", str(design_request_file)])
        assert code == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        comp = metrics["comparison"]
        assert comp["t_star_change_pct"] < 0
        assert comp["rms_change_pct"] < 0
        assert (out / "trace_baseline.csv").exists()
        assert (out / "trace_addon.csv").exists()
        stdout = capsys.readouterr().out
        assert "T*" in stdout

    def test_simulate_zero_distance(self, config_file, tmp_path):
        run_cfg = tmp_path / "run.json"
        run_cfg.write_text(json.dumps({
            "mode": "trajectory", "ts": 0.002, "distance": 0.0,
            "move_duration": 0.5, "hold_duration": 3.0, "bound": 1e-3,
        }))
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(config_file), "--out", str(out),
                     "--run", str(run_cfg)])
        assert code == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["baseline"]["t_star"] == 0.0
        assert metrics["baseline"]["rms"] == 0.0

    def test_simulate_sinusoid_mode(self, config_file, tmp_path):
        run_cfg = tmp_path / "run.json"
        run_cfg.write_text(json.dumps({
            "mode": "sinusoid", "omega": 5.0, "samples_per_period": 512,
        }))
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(config_file), "--out", str(out),
                     "--run", str(run_cfg)])
        assert code == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["kind"] == "sinusoid-run"
        assert metrics["resets_per_period"] == 2


@pytest.fixture(scope="module")
def service(config_file):
    config = load_project_config(config_file)
    server = make_server(config, host="127.0.0.1", port=0, sim_budget_s=20.0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base, config
    server.shutdown()
    server.server_close()


def _get(base: str, path: str):
    try:
        with urllib.request.urlopen(base + path, timeout=60) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def _post(base: str, path: str, body: dict):
    data = json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=120) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


class TestService:
    def test_schema_and_grid(self, service):
        base, config = service
        status, schema = _get(base, "/schema")
        assert status == 200
        assert schema["schema_version"] == SCHEMA_VERSION
        status, grid = _get(base, "/grid")
        assert status == 200
        np.testing.assert_allclose(grid["omega"], config.grid.build())

    def test_frf_endpoint(self, service):
        base, config = service
        status, frf = _get(base, "/frf")
        assert status == 200
        assert len(frf["omega"]) == len(frf["re"]) == len(frf["im"])
        assert frf["schema_version"] == SCHEMA_VERSION

    def test_design_matches_cli_numbers(self, service):
        base, config = service
        body = {"notches": [{"omega_n": 5.0, "q1": 1.0, "q2": 2.0}],
                "omega_l": 50.0, "a_rho": 0.0}
        status, remote = _post(base, "/design", body)
        assert status == 200
        local, _ = run_design(config, parse_design_request(body))
        assert remote["verdict"] == local["verdict"]
        assert remote["design"] == local["design"]
        np.testing.assert_allclose(remote["curves"]["s_inf"], local["curves"]["s_inf"],
                                   rtol=0, atol=0)
        assert remote["report"] == local["report"]

    def test_design_requires_body(self, service):
        base, _ = service
        status, payload = _post(base, "/design", {})
        assert status == 422
        assert payload["error"]["code"] == "validation"

    def test_infeasible_is_machine_readable(self, service):
        base, _ = service
        body = {"notches": [{"omega_n": 40.0, "q1": 0.3, "q2": 6.0}],
                "omega_l": 45.0, "a_rho": 0.0}
        status, payload = _post(base, "/design", body)
        assert status == 422
        err = payload["error"]
        assert err["code"] == "infeasible_phase"
        assert err["theta_max"] > 0
        assert err["field"] == "notches"

    def test_analyze_without_body(self, service):
        base, config = service
        status, remote = _post(base, "/analyze", {})
        assert status == 200
        local = analyze_linear(config)
        np.testing.assert_allclose(remote["curves"]["s_lin_mag"],
                                   local["curves"]["s_lin_mag"], rtol=0, atol=0)

    def test_simulate_endpoint(self, service):
        base, config = service
        body = {"mode": "sinusoid", "omega": 5.0, "samples_per_period": 512}
        status, payload = _post(base, "/simulate", body)
        assert status == 200
        assert payload["resets_per_period"] == 2
        local, _ = run_simulation(config, parse_sim_config(body))
        assert payload["error_harmonics"] == local["error_harmonics"]

    def test_unknown_route(self, service):
        base, _ = service
        status, payload = _get(base, "/nope")
        assert status == 404

    def test_cache_returns_identical_payload(self, service):
        base, _ = service
        body = {"notches": [{"omega_n": 5.0, "q1": 1.0, "q2": 2.0}],
                "omega_l": 50.0, "a_rho": 0.0}
        _, first = _post(base, "/design", body)
        _, second = _post(base, "/design", body)
        assert first == second


class TestParallelContract:
    def test_thread_cap_preserves_results(self, config_file, monkeypatch):
        # the grid sweep declares a parallel-map contract: results are
        # independent of evaluation order and of the thread count
        from resetloop.config import load_project_config
        from resetloop.workflows import run_design
        from resetloop.config import parse_design_request

        config = load_project_config(config_file)
        body = {"notches": [{"omega_n": 5.0, "q1": 1.0, "q2": 2.0}],
                "omega_l": 50.0, "a_rho": 0.0}
        request = parse_design_request(body)
        monkeypatch.delenv("RESETLOOP_THREADS", raising=False)
        serial, _ = run_design(config, request)
        monkeypatch.setenv("RESETLOOP_THREADS", "4")
        threaded, _ = run_design(config, request)
        assert serial["curves"] == threaded["curves"]
        assert serial["report"] == threaded["report"]
