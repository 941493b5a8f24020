"""Configuration parsing, report emission, and CLI exit-code contract."""

import json

import pytest

from weylred.cli import main, run_suite
from weylred.config import (
    ConfigError,
    SuiteConfig,
    config_from_dict,
    parse_config,
)
from weylred.report import CheckRecord, Report, emit_report, report_to_dict


class TestConfigDefaults:
    def test_empty_dict_gives_defaults(self):
        cfg = config_from_dict({})
        assert cfg.dimension == 2
        assert cfg.fiber_kind == "circle"
        assert cfg.n_lambda == 64
        assert cfg.fiber_nodes == 256
        assert cfg.tolerance == 1e-6
        assert cfg.lambda_range == (0.5, 2.0)
        assert cfg.hbar_list == (0.5, 0.25, 0.125, 0.0625)

    def test_default_hamiltonian_is_radial(self):
        cfg = SuiteConfig()
        import numpy as np

        p = np.array([3.0, 4.0])
        assert cfg.hamiltonian.value(p) == pytest.approx(12.5)

    def test_overrides_apply(self):
        cfg = config_from_dict(
            {"n": 3, "fiber_kind": "sphere2", "n_lambda": 10, "tolerance": 1e-4}
        )
        assert cfg.dimension == 3
        assert cfg.n_lambda == 10
        assert cfg.tolerance == 1e-4


class TestConfigValidation:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="foo"):
            config_from_dict({"foo": 1})

    def test_singular_endpoint_rejected(self):
        # level 0 of |x|^2/2 is a point, not a circle
        with pytest.raises(ConfigError, match="singular"):
            config_from_dict({"lambda_range": [0.0, 1.0]})

    def test_empty_range_rejected(self):
        with pytest.raises(ConfigError, match="lambda_range"):
            config_from_dict({"lambda_range": [2.0, 2.0]})

    def test_negative_hbar_rejected(self):
        with pytest.raises(ConfigError, match="hbar"):
            config_from_dict({"hbar": [0.5, -0.1]})

    def test_kind_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            config_from_dict({"n": 3, "fiber_kind": "circle"})
        with pytest.raises(ConfigError):
            config_from_dict({"n": 2, "fiber_kind": "sphere2"})

    def test_unknown_hamiltonian_name(self):
        with pytest.raises(ConfigError, match="hamiltonian"):
            config_from_dict({"hamiltonian": "no-such-thing"})

    def test_ellipse_needs_n2(self):
        with pytest.raises(ConfigError):
            config_from_dict(
                {"n": 3, "fiber_kind": "sphere2", "hamiltonian": "ellipse"}
            )

    def test_test_function_indices_bounded(self):
        with pytest.raises(ConfigError, match="test_functions"):
            config_from_dict({"test_functions": [0, 7]})

    def test_json_error_reports_position(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"n": 2,}')
        with pytest.raises(ConfigError, match=r"bad\.json:1:"):
            parse_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "absent.json")

    def test_vector_field_literal(self):
        cfg = config_from_dict(
            {
                "vector_field": [
                    [{"re": "-1", "x": [0, 1]}],
                    [{"re": "1", "x": [1, 0]}],
                ]
            }
        )
        from weylred.symbols import rotation_generator

        assert cfg.vector_field == rotation_generator(0, 1, 2)


class TestReportEmission:
    def _sample_report(self):
        r = Report(suite="demo")
        r.add(
            CheckRecord(
                name="a", params={"k": 1}, tolerance=1e-8, passed=True, residual=1e-9
            )
        )
        r.add(CheckRecord(name="b", params={}, tolerance=None, passed=True, exact=True))
        return r

    def test_json_round_trip(self, tmp_path):
        report = self._sample_report()
        (path,) = emit_report(report, tmp_path)
        assert json.loads(path.read_text()) == report_to_dict(report)

    def test_csv_row_count(self, tmp_path):
        report = self._sample_report()
        paths = emit_report(report, tmp_path, formats=("json", "csv"))
        csv_path = [p for p in paths if p.suffix == ".csv"][0]
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 1 + len(report.records)
        assert lines[0].startswith("name,residual")

    def test_verdict_fails_on_any_failure(self):
        report = self._sample_report()
        report.add(CheckRecord(name="c", params={}, tolerance=1e-3, passed=False))
        assert report.verdict is False
        assert report_to_dict(report)["verdict"] == "fail"


class TestCLI:
    def test_kernel_exit_zero(self, tmp_path, capsys):
        assert main(["kernel", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "metric-density-exponent" in out
        assert (tmp_path / "kernel.json").exists()

    def test_bad_config_exit_two(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"foo": 1}')
        assert main(["kernel", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_format_exit_two(self, tmp_path, capsys):
        assert main(["kernel", "--out", str(tmp_path), "--format", "xml"]) == 2

    def test_check_failure_exit_one(self, tmp_path, capsys):
        # unreachable tolerance turns the commutation residual into a failure
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tolerance": 1e-30, "n_lambda": 4,
                                   "fiber_nodes": 64}))
        code = main(["commutation", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 1
        payload = json.loads((tmp_path / "commutation.json").read_text())
        assert payload["verdict"] == "fail"

    def test_reports_are_byte_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["evolve", "--out", str(a)]) == 0
        assert main(["evolve", "--out", str(b)]) == 0
        assert (a / "evolve.json").read_bytes() == (b / "evolve.json").read_bytes()

    def test_errors_become_failed_records(self, tmp_path):
        # a config whose sweep hbar list is unordered: deviations cannot
        # decrease monotonically, but the run must still emit a report
        cfg = SuiteConfig(hbar_list=(0.0625, 0.5))
        report = run_suite(cfg, "sweep")
        assert len(report.records) == 1
        assert report.records[0].passed is False

    def test_run_suite_all_covers_every_module(self):
        report = run_suite(SuiteConfig(n_lambda=4, fiber_nodes=64), "all")
        names = {r.name for r in report.records}
        assert any(n.startswith("star-expansion") for n in names)
        assert "coarea-gaussian" in names
        assert "strong-commutation" in names
        assert "metric-density-exponent" in names
        assert report.verdict
