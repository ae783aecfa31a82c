import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import lgsqueeze
from lgsqueeze.cli import main as cli_main
from lgsqueeze.report_io import (
    ConfigError,
    emit_result,
    load_report,
    read_matrix_csv,
    resolved_config_dict,
    scenario_config_from_dict,
)
from lgsqueeze.scenarios import default_config, run_scenario

SCHEMA_DIR = Path(lgsqueeze.__file__).parent / "schemas"


def load_schema(name):
    return json.loads((SCHEMA_DIR / name).read_text())


class TestConfigParsing:
    def test_minimal_benchmark_defaults(self):
        cfg = scenario_config_from_dict({"scenario": "PdcBenchmark"})
        assert cfg.coupling.pump1.geometry.wavelength == pytest.approx(0.405)
        assert cfg.coupling.pump1.geometry.waist_w0 == pytest.approx(200.0)
        assert cfg.coupling.collection.wavelength == pytest.approx(0.810)
        assert cfg.coupling.collection.waist_w0 == pytest.approx(200.0)
        assert cfg.n_target == 1.0

    def test_scan_grid_echo(self):
        cfg = scenario_config_from_dict(
            {
                "scenario": "WaistScan",
                "grid": {"pump": [50, 800], "collection": [50, 800], "points": 8},
            }
        )
        assert cfg.scan_grid == {
            "pump": [50.0, 800.0],
            "collection": [50.0, 800.0],
            "points": 8,
        }

    def test_negative_waist_names_key_path(self):
        with pytest.raises(ConfigError) as err:
            scenario_config_from_dict(
                {"scenario": "PdcBenchmark",
                 "coupling": {"collection": {"waist_w0": -1}}}
            )
        assert "coupling.collection" in str(err.value)

    def test_unknown_keys_rejected_with_path(self):
        with pytest.raises(ConfigError) as err:
            scenario_config_from_dict({"scenario": "PdcBenchmark", "bogus": 1})
        assert "bogus" in str(err.value)
        with pytest.raises(ConfigError) as err:
            scenario_config_from_dict(
                {"scenario": "PdcBenchmark", "coupling": {"mediun": {}}}
            )
        assert "coupling.mediun" in str(err.value)

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError):
            scenario_config_from_dict({"scenario": "Nope"})

    def test_grid_only_for_scan(self):
        with pytest.raises(ConfigError):
            scenario_config_from_dict(
                {"scenario": "PdcBenchmark",
                 "grid": {"pump": [50, 800], "collection": [50, 800]}}
            )

    def test_resolved_config_round_trip(self):
        cfg = default_config("PsrPCrosstalk")
        resolved = resolved_config_dict(cfg)
        back = scenario_config_from_dict(resolved)
        assert resolved_config_dict(back) == resolved


@pytest.fixture(scope="module")
def emitted(tmp_path_factory, pdc_benchmark):
    out = tmp_path_factory.mktemp("emit")
    cfg = default_config("PdcBenchmark")
    files = emit_result(pdc_benchmark, cfg, out, wall_time_s=1.0)
    return out, files, pdc_benchmark


class TestEmission:

    def test_expected_files_written(self, emitted):
        out, files, _ = emitted
        for stem in ("var_x1", "var_x2", "cross_covariance", "nbar_matrix",
                     "pair_abs", "pair_arg"):
            assert (out / f"{stem}.csv").exists()
            assert (out / f"{stem}_long.csv").exists()
        assert (out / "report.json").exists()
        assert (out / "manifest.json").exists()

    def test_matrix_csv_round_trip(self, emitted):
        out, _, result = emitted
        matrix, labels = read_matrix_csv(out / "var_x1.csv")
        assert labels == result.report.mode_labels
        assert np.array_equal(matrix, np.asarray(result.report.var_X1).real)

    def test_long_format_rows(self, emitted):
        out, _, result = emitted
        lines = (out / "nbar_matrix_long.csv").read_text().strip().splitlines()
        n = len(result.report.mode_labels)
        assert lines[0] == "row,col,value"
        assert len(lines) == 1 + n * n

    def test_report_json_round_trip(self, emitted):
        out, _, result = emitted
        loaded = load_report(out)
        assert np.array_equal(loaded.var_X1, np.asarray(result.report.var_X1))
        assert np.array_equal(loaded.pair_matrix, np.asarray(result.report.pair_matrix))
        assert loaded.nbar_total == result.report.nbar_total

    def test_eigen_table_sorted(self, emitted):
        out, _, _ = emitted
        doc = json.loads((out / "report.json").read_text())
        lams = [row["lambda"] for row in doc["eigenmodes"]]
        assert lams == sorted(lams, reverse=True)

    def test_schema_validation(self, emitted):
        out, _, _ = emitted
        jsonschema.validate(json.loads((out / "report.json").read_text()),
                            load_schema("report.schema.json"))
        jsonschema.validate(json.loads((out / "manifest.json").read_text()),
                            load_schema("manifest.schema.json"))

    def test_vacuum_report_identity_quarter(self, tmp_path):
        from lgsqueeze.coupling import InteractionType
        from lgsqueeze.modes import build_basis
        from lgsqueeze.scenarios import ScenarioResult
        from lgsqueeze.squeeze_core import SqueezeMatrix, state_report

        basis = build_basis(0, 1)
        sq = SqueezeMatrix(xi=np.zeros((2, 2)), basis=basis,
                           interaction=InteractionType.FULL_CROSSTALK)
        result = ScenarioResult("PdcBenchmark", state_report(sq), sq, 0.0)
        emit_result(result, default_config("PdcBenchmark"), tmp_path)
        matrix, _ = read_matrix_csv(tmp_path / "var_x1.csv")
        assert np.array_equal(matrix, np.eye(2) / 4)


class TestCli:
    def test_conflicting_flags(self, capsys):
        with pytest.raises(SystemExit):
            cli_main(["--scenario", "PdcBenchmark", "--config", "x.json"])

    def test_missing_flags(self):
        with pytest.raises(SystemExit):
            cli_main([])

    def test_unknown_scenario_exit_code(self, capsys):
        assert cli_main(["--scenario", "Wrong", "--out", "/tmp/x"]) == 2
        assert "unknown scenario" in capsys.readouterr().err

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"scenario": "PdcBenchmark",
             "coupling": {"collection": {"waist_w0": -1}}}))
        assert cli_main(["--config", str(path), "--out", str(tmp_path / "o")]) == 2
        assert "coupling.collection" in capsys.readouterr().err

    def test_single_mode_run_with_oracle(self, tmp_path, capsys):
        rc = cli_main([
            "--scenario", "PsrSinglePhoton", "--lmax", "0", "--pmax", "0",
            "--out", str(tmp_path), "--oracle", "--quiet",
        ])
        assert rc == 0
        agreement = json.loads((tmp_path / "oracle_agreement.json").read_text())
        assert agreement["within_bound"]
        jsonschema.validate(agreement, load_schema("oracle_agreement.schema.json"))

    def test_two_beam_run_with_oracle(self, tmp_path):
        rc = cli_main([
            "--scenario", "FwmTwoPhoton", "--lmax", "0", "--pmax", "2",
            "--out", str(tmp_path), "--oracle", "--quiet",
        ])
        assert rc == 0
        agreement = json.loads((tmp_path / "oracle_agreement.json").read_text())
        assert agreement["within_bound"]

    def test_oracle_rejects_large_basis(self, tmp_path, capsys):
        rc = cli_main([
            "--scenario", "PdcBenchmark", "--out", str(tmp_path), "--oracle",
            "--quiet",
        ])
        assert rc == 2
        assert "oracle" in capsys.readouterr().err

    def test_out_dir_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OUT_DIR", str(tmp_path / "via_env"))
        rc = cli_main(["--scenario", "PsrSinglePhoton", "--lmax", "0",
                       "--pmax", "1", "--quiet"])
        assert rc == 0
        assert (tmp_path / "via_env" / "report.json").exists()


class TestDeterminism:
    def test_rerun_from_manifest_is_byte_identical(self, tmp_path):
        out1 = tmp_path / "a"
        rc = cli_main(["--scenario", "PsrPCrosstalk", "--out", str(out1), "--quiet"])
        assert rc == 0
        manifest = json.loads((out1 / "manifest.json").read_text())
        cfg_path = tmp_path / "resolved.json"
        cfg_path.write_text(json.dumps(manifest["resolved_config"]))
        out2 = tmp_path / "b"
        rc = cli_main(["--config", str(cfg_path), "--out", str(out2), "--quiet"])
        assert rc == 0
        for name in manifest["outputs"]:
            if name == "manifest.json":
                continue  # carries wall time
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
