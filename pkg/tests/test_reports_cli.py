import json

import numpy as np
import pytest

from wvamp import cli, reports
from wvamp.errors import ConfigError, RegimeError
from wvamp.reports import ScanConfig, ScanReport


def cfg(**kwargs):
    base = dict(experiment="ps_scaling", n_min=1, n_max=6, epsilon=0.05,
                phi_angle=1e-3, aw_magnitude=200.0, observable="sigma_z",
                seed=0, out_path=None, fmt="csv")
    base.update(kwargs)
    return ScanConfig(**base)


class TestConfigValidation:
    def test_epsilon_range(self):
        with pytest.raises(ConfigError):
            cfg(epsilon=1.0).validate()

    def test_n_order(self):
        with pytest.raises(ConfigError):
            cfg(n_min=4, n_max=2).validate()

    def test_ps_needs_large_aw(self):
        with pytest.raises(ConfigError):
            cfg(aw_magnitude=30.0).validate()

    def test_fisher_regime_enforced(self):
        with pytest.raises(RegimeError):
            cfg(experiment="fisher_saturation", aw_magnitude=200.0,
                phi_angle=1e-3).validate()

    def test_circuit_check_sigma_z_only(self):
        with pytest.raises(ConfigError):
            cfg(experiment="circuit_check", observable="projector").validate()

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            cfg(experiment="banana").validate()


class TestRunners:
    def test_ps_scaling_rows(self):
        report = reports.run_ps_scaling(cfg())
        assert len(report.rows) == 6
        assert len(report.columns) >= 9
        for row in report.rows:
            assert row["passed"]
            assert row["ratio"] == pytest.approx(row["n"], rel=0.03)
        assert report.rows[0]["ratio"] == pytest.approx(1.0, abs=1e-12)

    def test_ps_scaling_projector(self):
        report = reports.run_ps_scaling(cfg(observable="projector", n_max=4))
        assert all(row["passed"] for row in report.rows)

    def test_aw_scaling_rows(self):
        report = reports.run_aw_scaling(cfg(experiment="aw_scaling"))
        for row in report.rows:
            target = np.sqrt(row["n"]) / 0.05
            assert row["aw_measured"] == pytest.approx(target, rel=0.03)
            assert row["passed"]

    def test_aw_scaling_n9(self):
        report = reports.run_aw_scaling(
            cfg(experiment="aw_scaling", n_min=9, n_max=9, epsilon=0.02))
        assert report.rows[0]["aw_measured"] == pytest.approx(150.0, rel=0.01)

    def test_aw_scaling_detects_out_of_tolerance(self):
        report = reports.run_aw_scaling(
            cfg(experiment="aw_scaling", n_min=6, n_max=6, epsilon=0.13))
        assert not report.rows[0]["passed"]
        assert not report.all_passed()

    def test_flagged_rows_not_scored(self):
        # phi*|A_w| > 0.1 on every row here: all flagged, none scored
        report = reports.run_aw_scaling(
            cfg(experiment="aw_scaling", n_min=5, n_max=7, phi_angle=0.02))
        assert report.in_regime_rows() == []
        assert len(report.flagged_rows()) == 3
        assert report.all_passed()  # vacuously: flagged rows never score

    def test_n_phi_guard_flags_individual_rows(self):
        # large eps keeps phi*|A_w| tiny so only the n*phi guard trips
        report = reports.run_aw_scaling(
            cfg(experiment="aw_scaling", n_min=5, n_max=7, epsilon=0.7,
                phi_angle=0.019))
        assert [r["n"] for r in report.flagged_rows()] == [6, 7]
        assert [r["n"] for r in report.in_regime_rows()] == [5]

    def test_fisher_rows(self):
        report = reports.run_fisher_saturation(
            cfg(experiment="fisher_saturation", aw_magnitude=100.0, n_max=4))
        for row in report.rows:
            assert row["saturation_ratio"] >= 0.99
            assert row["eta"] == pytest.approx(1.0, abs=1e-12)
            assert row["passed"]

    def test_fisher_projector_eta_half(self):
        report = reports.run_fisher_saturation(
            cfg(experiment="fisher_saturation", observable="projector",
                aw_magnitude=100.0, n_min=3, n_max=3))
        row = report.rows[0]
        assert row["eta"] == pytest.approx(0.5, abs=1e-12)
        assert row["i_post_exact_phi"] / row["i_total_phi"] == pytest.approx(0.5, rel=0.01)

    def test_circuit_check_rows(self):
        report = reports.run_circuit_check(
            cfg(experiment="circuit_check", n_max=4, phi_angle=0.005))
        assert len(report.rows) == 8  # two modes per n
        for row in report.rows:
            assert row["passed"]
            assert row["fidelity_circuit"] >= 1 - 1e-9
            assert row["prob_delta_circuit"] <= 1e-9
            if row["n"] >= 2:
                assert row["fidelity_scheduler"] >= 1 - 1e-9
                assert row["prob_delta_scheduler"] <= 1e-9


class TestEmission:
    def test_empty_rows_header_only_csv(self):
        report = ScanReport(config=cfg(), columns=("n", "value"), rows=[],
                            meta={"tool": "wvamp"})
        text = reports.report_to_csv(report)
        body = [ln for ln in text.splitlines() if not ln.startswith("#")]
        assert body == ["n,value"]

    def test_csv_schema(self, tmp_path):
        report = reports.run_ps_scaling(cfg(n_max=3))
        path = tmp_path / "out.csv"
        reports.emit(report, "csv", str(path))
        lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
        header = lines[0].split(",")
        assert len(header) >= 9
        assert len(lines) == 1 + 3

    def test_seventeen_digit_reals(self):
        report = reports.run_ps_scaling(cfg(n_max=2))
        text = reports.report_to_csv(report)
        assert "0.0008999" not in text  # no silent truncation
        assert "%.17g" % report.rows[0]["ps_single"] in text

    def test_byte_identical_reruns(self, tmp_path):
        config = cfg(n_max=4)
        a = reports.report_to_csv(reports.run_ps_scaling(config))
        b = reports.report_to_csv(reports.run_ps_scaling(config))
        assert a == b
        ja = reports.report_to_json(reports.run_aw_scaling(cfg(experiment="aw_scaling", n_max=3)))
        jb = reports.report_to_json(reports.run_aw_scaling(cfg(experiment="aw_scaling", n_max=3)))
        assert ja == jb

    def test_json_parses_and_keeps_key_order(self):
        report = reports.run_ps_scaling(cfg(n_max=2))
        text = reports.report_to_json(report)
        doc = json.loads(text)
        assert list(doc) == ["config", "meta", "columns", "rows"]
        assert list(doc["rows"][0]) == list(report.columns)
        assert doc["rows"][0]["regime_ok"] is True

    def test_unwritable_path_raises_io_error(self, tmp_path):
        from wvamp.errors import IoError

        report = reports.run_ps_scaling(cfg(n_max=2))
        with pytest.raises(IoError):
            reports.emit(report, "csv", str(tmp_path))  # a directory, not a file

    def test_json_nulls_for_missing_scheduler(self):
        report = reports.run_circuit_check(
            cfg(experiment="circuit_check", n_min=1, n_max=1, phi_angle=0.004))
        doc = json.loads(reports.report_to_json(report))
        assert doc["rows"][0]["fidelity_scheduler"] is None


class TestCli:
    def test_scan_ps_writes_report_and_figure(self, tmp_path, capsys):
        out = tmp_path / "ps.csv"
        code = cli.main(["scan-ps", "--n-max", "3", "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert out.with_suffix(".png").exists()

    def test_no_plot(self, tmp_path):
        out = tmp_path / "ps.csv"
        code = cli.main(["scan-ps", "--n-max", "2", "--out", str(out), "--no-plot"])
        assert code == 0
        assert not out.with_suffix(".png").exists()

    def test_stdout_when_no_out(self, capsys):
        code = cli.main(["scan-ps", "--n-max", "2"])
        assert code == 0
        captured = capsys.readouterr().out
        assert "ps_entangled_exact" in captured

    def test_json_format(self, tmp_path):
        out = tmp_path / "aw.json"
        code = cli.main(["scan-aw", "--n-max", "2", "--format", "json",
                         "--out", str(out), "--no-plot"])
        assert code == 0
        json.loads(out.read_text())

    def test_exit_code_one_on_config_error(self):
        assert cli.main(["scan-ps", "--aw", "5"]) == 1

    def test_exit_code_one_on_usage_error(self):
        assert cli.main(["definitely-not-a-command"]) == 1

    def test_exit_code_two_on_tolerance_failure(self, tmp_path):
        code = cli.main(["scan-aw", "--n-min", "6", "--n-max", "6",
                         "--epsilon", "0.13", "--no-plot"])
        assert code == 2

    def test_fisher_default_aw_is_in_regime(self):
        assert cli.main(["fisher", "--n-max", "3"]) == 0

    def test_config_file_and_flag_override(self, tmp_path):
        conf = tmp_path / "scan.cfg"
        conf.write_text("n_max=2\nepsilon=0.04\nseed=7\n")
        out = tmp_path / "r.csv"
        code = cli.main(["scan-aw", "--config", str(conf), "--epsilon", "0.05",
                         "--out", str(out), "--no-plot"])
        assert code == 0
        text = out.read_text()
        assert "# n_max=2" in text      # from file
        assert "# epsilon=0.05" in text  # flag wins
        assert "# seed=7" in text

    def test_config_file_bad_key(self, tmp_path):
        conf = tmp_path / "scan.cfg"
        conf.write_text("volume=11\n")
        assert cli.main(["scan-ps", "--config", str(conf)]) == 1

    def test_help_exits_zero(self):
        assert cli.main(["--help"]) == 0
        assert cli.main(["scan-aw", "--help"]) == 0

    def test_figures_render_for_every_experiment(self, tmp_path):
        from wvamp.figures import render_report

        runs = [
            reports.run_ps_scaling(cfg(n_max=3)),
            reports.run_aw_scaling(cfg(experiment="aw_scaling", n_max=3)),
            reports.run_fisher_saturation(
                cfg(experiment="fisher_saturation", aw_magnitude=100.0, n_max=3)),
            reports.run_circuit_check(
                cfg(experiment="circuit_check", n_max=3, phi_angle=0.004)),
        ]
        for i, report in enumerate(runs):
            path = tmp_path / f"fig{i}.png"
            render_report(report, str(path))
            assert path.stat().st_size > 0

    def test_determinism_across_processes(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["circuit-check", "--n-max", "3", "--phi", "0.005",
                  "--out", str(out1), "--no-plot"])
        cli.main(["circuit-check", "--n-max", "3", "--phi", "0.005",
                  "--out", str(out2), "--no-plot"])
        assert out1.read_bytes() == out2.read_bytes()
