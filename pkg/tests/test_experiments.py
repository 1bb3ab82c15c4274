import json

import numpy as np
import pytest

from starfd.cli import main
from starfd.experiments import (
    ConfigError,
    config_from_dict,
    run_experiment,
    summary_rows,
    trace_rows,
)
from starfd.presets import figure_config
from starfd.system import dbm_to_mw

TINY = {
    "scheme": "star-fd",
    "m": 4,
    "r_u_th": 1.0,
    "r_d_th": 1.0,
    "seeds": 2,
    "emit_trace": True,
}


class TestConfig:
    def test_unknown_top_level_field(self):
        with pytest.raises(ConfigError, match="unknown field"):
            config_from_dict({**TINY, "typo_field": 1})

    def test_unknown_nested_field(self):
        with pytest.raises(ConfigError, match="channel"):
            config_from_dict({**TINY, "channel": {"plo_db": -30}})

    def test_bad_scheme(self):
        with pytest.raises(ConfigError):
            config_from_dict({**TINY, "scheme": "fdd"})

    def test_bad_sweep_param(self):
        with pytest.raises(ConfigError):
            config_from_dict({**TINY, "sweep": {"param": "bandwidth", "values": [1]}})

    def test_seed_list_and_count(self):
        assert config_from_dict({**TINY, "seeds": 3}).seeds == (0, 1, 2)
        assert config_from_dict({**TINY, "seeds": [5, 9]}).seeds == (5, 9)

    def test_solver_fields(self):
        cfg = config_from_dict(
            {**TINY, "solver": {"rho": 1e-2, "eps2": 1e-3, "max_ao_iterations": 5}}
        )
        assert cfg.solver.sca.rho == 1e-2
        assert cfg.solver.eps2 == 1e-3
        assert cfg.solver.max_iterations == 5

    def test_m_flows_into_channel_params(self):
        cfg = config_from_dict({**TINY, "m": 6})
        assert cfg.channel.num_elements == 6


class TestRunExperiment:
    def test_rows_and_determinism(self):
        cfg = config_from_dict(TINY)
        res1, failed1 = run_experiment(cfg)
        res2, _ = run_experiment(cfg)
        assert not failed1
        assert summary_rows(res1) == summary_rows(res2)
        assert trace_rows(res1) == trace_rows(res2)
        assert len(res1) == 2

    def test_parallel_matches_serial(self):
        cfg = config_from_dict(TINY)
        serial, _ = run_experiment(cfg, workers=1)
        parallel, _ = run_experiment(cfg, workers=2)
        assert summary_rows(serial) == summary_rows(parallel)

    def test_sweep_row_count(self):
        cfg = config_from_dict(
            {**TINY, "m": 4, "seeds": 2, "sweep": {"param": "m", "values": [2, 4]}}
        )
        res, _ = run_experiment(cfg)
        assert len(res) == 4

    def test_dbm_roundtrip_precision(self):
        cfg = config_from_dict(TINY)
        res, _ = run_experiment(cfg)
        rows = summary_rows(res)
        header = rows[0].split(",")
        for row in rows[1:]:
            cells = dict(zip(header, row.split(",")))
            mw = dbm_to_mw(float(cells["total_dbm"]))
            back = 10.0 * np.log10(mw)
            assert back == pytest.approx(float(cells["total_dbm"]), rel=1e-12)

    def test_infeasible_runs_recorded_not_dropped(self):
        # one transmit element cannot be orthogonalized against the cross
        # composite, and the absurd demands make the interference loop win
        cfg = config_from_dict(
            {
                "scheme": "con-fd",
                "m": 2,
                "r_u_th": 12.0,
                "r_d_th": 12.0,
                "seeds": 1,
                "channel": {"si_pathloss_db": 0.0},
            }
        )
        res, failed = run_experiment(cfg)
        assert len(res) == 1
        assert failed and failed[0].status.startswith("infeasible:")
        row = summary_rows(res)[1]
        assert "infeasible" in row

    def test_hd_rows_carry_slot_columns(self):
        cfg = config_from_dict({**TINY, "scheme": "star-hd"})
        res, _ = run_experiment(cfg)
        rows = summary_rows(res)
        header = rows[0].split(",")
        cells = dict(zip(header, rows[1].split(",")))
        slot_total = dbm_to_mw(float(cells["hd_slot_pu_dbm"])) + dbm_to_mw(
            float(cells["hd_slot_pd_dbm"])
        )
        assert dbm_to_mw(float(cells["total_dbm"])) == pytest.approx(
            slot_total / 2.0, rel=1e-9
        )


class TestCli:
    def test_run_subcommand(self, tmp_path):
        cfg_path = tmp_path / "tiny.json"
        cfg_path.write_text(json.dumps(TINY))
        out = tmp_path / "out"
        code = main(["run", "--config", str(cfg_path), "--out", str(out), "--workers", "1"])
        assert code == 0
        assert (out / "summary.csv").exists()
        assert (out / "trace.csv").exists()

    def test_run_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "tiny.json"
        cfg_path.write_text(json.dumps(TINY))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg_path), "--out", str(out_a), "--workers", "1"])
        main(["run", "--config", str(cfg_path), "--out", str(out_b), "--workers", "2"])
        assert (out_a / "summary.csv").read_bytes() == (out_b / "summary.csv").read_bytes()
        assert (out_a / "trace.csv").read_bytes() == (out_b / "trace.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps({**TINY, "nope": True}))
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1

    def test_invalid_json_exit_code(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text("{not json")
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1

    def test_infeasible_exit_code(self, tmp_path):
        cfg_path = tmp_path / "infeasible.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "scheme": "con-fd",
                    "m": 2,
                    "r_u_th": 12.0,
                    "r_d_th": 12.0,
                    "seeds": 1,
                    "channel": {"si_pathloss_db": 0.0},
                }
            )
        )
        code = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_validate_subset(self, capsys):
        code = main(["validate", "--only", "2,5", "--workers", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "criterion  2" in out and "criterion  5" in out


class TestFigurePresets:
    def test_fig3_preset_row_arithmetic(self):
        cfg = figure_config(3, "star-hd", 20)
        assert cfg.sweep_param == "m"
        assert len(cfg.sweep_values) * len(cfg.seeds) == 80  # x3 schemes = 240

    def test_fig2_emits_trace(self):
        assert figure_config(2, "star-fd", 10).emit_trace

    def test_figure_cli_smoke(self, tmp_path):
        # the smallest figure: id 2 limited to one seed
        code = main(["figure", "--id", "2", "--seeds", "1", "--out", str(tmp_path), "--workers", "1"])
        assert code == 0
        assert (tmp_path / "figure2_summary.csv").exists()
        assert (tmp_path / "figure2_trace.csv").exists()
        assert (tmp_path / "figure2_config.json").exists()
        header = (tmp_path / "figure2_summary.csv").read_text().splitlines()[0]
        assert header.split(",") == [
            "scheme", "sweep_param", "sweep_value", "seed", "p_u_dbm", "p_d_dbm",
            "total_dbm", "hd_slot_pu_dbm", "hd_slot_pd_dbm", "iterations",
            "converged", "r_u_achieved", "r_d_achieved", "status",
        ]
