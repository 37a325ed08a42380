import json

import pytest

from edlab.cli import (
    ConfigError,
    load_config,
    main,
    parse_config_text,
    run_scenario,
    run_sweep,
)


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None, [], "flip")
        assert cfg["grid.n_points"] == 256
        assert cfg["channel.variant"] == "flip"

    def test_file_and_set_override(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("# comment\ngrid.n_points=512\nstate.sigma=2\n")
        cfg = load_config(str(path), ["state.sigma=1.5"], "flip")
        assert cfg["grid.n_points"] == 512
        assert cfg["state.sigma"] == 1.5

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config_text("nope.what=3")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="bad value"):
            parse_config_text("grid.n_points=many")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError, match="key=value"):
            parse_config_text("grid.n_points")


class TestScenarios:
    def test_flip_defaults(self):
        cfg = load_config(None, [], "flip")
        _, report, table = run_scenario("flip", cfg)
        assert report.eta_o_X == pytest.approx(2.0, rel=1e-9)
        assert report.w2_disturbance_X < 1e-8
        assert "eta_o_X" in table

    def test_slit_defaults(self):
        cfg = load_config(None, [], "slit")
        _, report, table = run_scenario("slit", cfg)
        assert report.epsilon_o == 4.0
        assert report.epsilon_convention == "slit-width"
        assert report.eta_o_P < 1e-2 * report.delta_P
        assert not report.eq2_form_satisfied
        assert report.eq5_satisfied
        assert "VIOLATED" in table and "SATISFIED" in table
        assert "slit pass probability  1" in table

    def test_vonneumann_defaults(self):
        cfg = load_config(None, [], "vonneumann")
        _, report, _ = run_scenario("vonneumann", cfg)
        assert report.epsilon_o == pytest.approx(0.5, rel=1e-3)
        assert report.eta_o_P == pytest.approx(1.0, rel=1e-3)
        assert report.product_eq2_form == pytest.approx(0.5, rel=2e-3)

    def test_scenario_csv_output(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(["scenario", "flip", "--out", str(out), "--format", "csv"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("epsilon_o,eta_o_P,eta_o_X,delta_X,delta_P")
        assert len(lines) == 2

    def test_scenario_json_output(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["scenario", "vonneumann", "--out", str(out), "--format", "json"]) == 0
        payload = json.loads(out.read_text())
        assert payload["epsilon_o"] == pytest.approx(0.5, rel=1e-3)
        assert payload["eq5_satisfied"] is True

    def test_config_error_exit_code(self, capsys):
        assert main(["scenario", "flip", "--set", "bogus=1"]) == 1
        assert "config error" in capsys.readouterr().err

    def test_invariant_violation_exit_code(self, capsys):
        assert main(["scenario", "flip", "--set", "state.x0=20"]) == 2
        assert "invariant" in capsys.readouterr().err

    def test_grid_spec_error_is_config_error(self, capsys):
        assert main(["scenario", "flip", "--set", "grid.n_points=100"]) == 1

    def test_bad_channel_params_are_config_errors(self, capsys):
        assert main(["scenario", "slit", "--set", "channel.width=-1"]) == 1
        assert main(["scenario", "vonneumann", "--set", "channel.g=0"]) == 1
        assert main(["scenario", "slit", "--set", "state.halfwidth=-1"]) == 1


class TestSweep:
    def test_pointer_width_sweep(self, tmp_path):
        cfg = load_config(None, [], None)
        text = run_sweep("probe.s", [0.5, 0.1, 1.0, 0.25], cfg)
        lines = text.splitlines()
        header = lines[0].split(",")
        assert header[0] == "probe.s"
        rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
        svals = [float(r["probe.s"]) for r in rows]
        assert svals == sorted(svals)
        for r in rows:
            s = float(r["probe.s"])
            assert float(r["epsilon_o"]) == pytest.approx(s, rel=1e-3)
            assert float(r["eta_o_P"]) == pytest.approx(0.5 / s, rel=1e-3)

    def test_slit_width_sweep_crossover(self):
        cfg = load_config(None, [], "slit")
        text = run_sweep("channel.width", [1.0, 2.0, 4.0], cfg)
        lines = text.splitlines()
        header = lines[0].split(",")
        rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
        etas = {float(r["channel.width"]): float(r["eta_o_P"]) for r in rows}
        assert etas[1.0] > 0.3  # slit cuts the bump
        assert etas[2.0] < 0.05  # support exactly fits
        assert etas[4.0] < 0.05

    def test_empty_values_rejected(self):
        cfg = load_config(None, [], None)
        with pytest.raises(ConfigError, match="at least one"):
            run_sweep("probe.s", [], cfg)

    def test_non_numeric_axis_rejected(self):
        cfg = load_config(None, [], None)
        with pytest.raises(ConfigError, match="numeric"):
            run_sweep("state.variant", [1.0], cfg)

    def test_failing_row_leaves_no_file(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--axis", "state.x0", "--values", "0,20", "--out", str(out)]
        )
        assert code == 2
        assert not out.exists()

    def test_out_of_domain_slit_row_aborts(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "sweep",
                "--axis",
                "channel.center",
                "--values",
                "0,15.5",
                "--set",
                "scenario=slit",
                "--out",
                str(out),
            ]
        )
        assert code == 2
        assert not out.exists()


class TestEq2Verb:
    def test_outputs(self, tmp_path, capsys):
        outdir = tmp_path / "eq2"
        code = main(
            [
                "eq2",
                "--out-dir",
                str(outdir),
                "--set",
                "search_err.max_refine_iters=1",
                "--set",
                "search_dist.max_refine_iters=1",
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "argmax states differ" in printed
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["argmax_distinct"] is True
        assert summary["product"] <= 0.5 + 1e-9
        err_rows = (outdir / "error_landscape.csv").read_text().splitlines()
        assert err_rows[0] == "x0,p0,sigma,value"
        assert len(err_rows) - 1 == summary["evaluations_error"]


class TestDeterminism:
    def test_scenario_outputs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["scenario", "vonneumann", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_outputs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert (
                main(["sweep", "--axis", "probe.s", "--values", "0.25,0.5", "--out", str(out)])
                == 0
            )
        assert a.read_bytes() == b.read_bytes()

    def test_eq2_outputs_byte_identical(self, tmp_path):
        blobs = []
        for name in ("x", "y"):
            outdir = tmp_path / name
            assert (
                main(
                    [
                        "eq2",
                        "--out-dir",
                        str(outdir),
                        "--set",
                        "search_err.max_refine_iters=0",
                        "--set",
                        "search_dist.max_refine_iters=0",
                    ]
                )
                == 0
            )
            blobs.append(
                (outdir / "summary.json").read_bytes()
                + (outdir / "error_landscape.csv").read_bytes()
                + (outdir / "disturbance_landscape.csv").read_bytes()
            )
        assert blobs[0] == blobs[1]
