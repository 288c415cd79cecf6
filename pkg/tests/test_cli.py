import json

import pandas as pd
import pytest

from auctionlab.main import build_parser, main
from auctionlab.services.report_service import load_report


def write_config(path, scenario, **fields):
    data = {"schema_version": 1, "scenario": scenario, "n_draws": 2000, "T": 200, **fields}
    path.write_text(json.dumps(data))
    return path


def test_no_command_prints_help():
    """Without a subcommand the CLI exits with a usage error."""
    assert main([]) == 2


def test_version(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--version"])
    assert "auctionlab" in capsys.readouterr().out


def test_dist_writes_table_and_summary(tmp_path):
    out = tmp_path / "uniform.csv"
    assert main(["dist", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert {"value", "virtual_value", "ironed_virtual_value"} <= set(frame.columns)
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["monopoly_price"] == pytest.approx(0.5, abs=1e-4)
    assert summary["regular"] is True


def test_default_output_location(output_dir):
    """Without --out, series land in the configured output directory."""
    assert main(["equilibrium", "--n", "3"]) == 0
    frame = pd.read_csv(output_dir / "strategy.csv")
    row = frame.iloc[len(frame) // 2]
    assert row["bid"] == pytest.approx(2 * row["value"] / 3, abs=1e-3)


@pytest.mark.parametrize("argv", [
    ["simulate", "--auction", "sp-anonymous", "--r", "0.5", "--draws", "2000"],
    ["learn", "--T", "50"],
    ["online", "--algo", "cautious", "--T", "100"],
    ["online", "--algo", "exp3", "--T", "100"],
    ["bid", "--algo", "pacing", "--T", "200"],
    ["shade", "--scheme", "threshold"],
    ["exploit", "--scenario", "mean-based", "--T", "100"],
    ["exploit", "--scenario", "two-phase", "--T", "200"],
])
def test_direct_mode(tmp_path, argv):
    out = tmp_path / "series.csv"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.is_file()


def test_heavy_tail_threshold_is_a_numeric_error(tmp_path):
    """The monopoly price of an infinite-mean law is undefined."""
    assert main(["shade", "--family", "heavy-tail", "--out", str(tmp_path / "s.csv")]) == 3


def test_unknown_auction_is_a_usage_error(tmp_path):
    assert main(["simulate", "--auction", "dutch", "--out", str(tmp_path / "s.csv")]) == 2


def test_config_mode_applies_overrides(tmp_path):
    config = write_config(tmp_path / "run.json", "revenue-example", seed=1)
    out = tmp_path / "report.json"
    assert main(["simulate", "--config", str(config), "--seed", "5", "--out", str(out)]) == 0
    report = load_report(out)
    assert report.master_seed == 5
    assert report.scenario == "revenue-example"


def test_config_mode_default_report_name(tmp_path, output_dir):
    config = write_config(tmp_path / "run.json", "fee", seed=3)
    assert main(["exploit", "--config", str(config)]) == 0
    assert (output_dir / "fee-3.json").is_file()


def test_scenario_must_match_subcommand(tmp_path):
    config = write_config(tmp_path / "run.json", "fee")
    assert main(["simulate", "--config", str(config)]) == 2


def test_invalid_config_file(tmp_path):
    config = write_config(tmp_path / "run.json", "fee", unknown_field=1)
    assert main(["exploit", "--config", str(config)]) == 2
    missing = tmp_path / "missing.json"
    assert main(["exploit", "--config", str(missing)]) == 2


def test_report_extracts_plot_data(tmp_path):
    config = write_config(tmp_path / "run.json", "profit-curve", params={"points": 11})
    report = tmp_path / "report.json"
    assert main(["dist", "--config", str(config), "--out", str(report)]) == 0

    csv = tmp_path / "curve.csv"
    assert main(["report", "--config", str(report), "--kind", "profit-curve", "--out", str(csv)]) == 0
    frame = pd.read_csv(csv)
    assert list(frame.columns) == ["family", "r", "Pi_r"]
    assert len(frame) == 11

    assert main(["report", "--config", str(report), "--kind", "bk-curve", "--out", str(tmp_path / "bk.csv")]) == 2
    assert not (tmp_path / "bk.csv").exists()


def test_unexpected_errors_exit_with_one(mocker):
    mocker.patch.dict("auctionlab.main.COMMANDS", {"dist": mocker.Mock(side_effect=RuntimeError("boom"))})
    assert main(["dist"]) == 1
