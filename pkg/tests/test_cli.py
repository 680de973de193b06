import csv

import pytest

from scnperf.cli import main, parse_db_list, parse_lambda_grid
from scnperf.cli import ConfigError


def read_csv(path):
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = None
        for row in reader:
            if row and row[0].startswith("# "):
                key, _, val = row[0][2:].partition("=")
                meta[key] = val
                continue
            if header is None:
                header = row
                continue
            rows.append(dict(zip(header, row)))
    return meta, rows


def test_lambda_grid_parsing():
    grid = parse_lambda_grid("0.1:10000:1")
    assert grid[0] == pytest.approx(0.1)
    assert grid[-1] == pytest.approx(10000.0)
    assert len(grid) == 6
    assert parse_lambda_grid("5:5:10") == [5.0]
    with pytest.raises(ConfigError):
        parse_lambda_grid("10:1:5")
    with pytest.raises(ConfigError):
        parse_lambda_grid("oops")


def test_db_list_parsing():
    assert parse_db_list("0,3,6") == [0.0, 3.0, 6.0]
    assert parse_db_list("") == []
    with pytest.raises(ConfigError):
        parse_db_list("a,b")


def test_coverage_single_point_single_row(tmp_path):
    out = tmp_path / "cov.csv"
    code = main(
        [
            "coverage",
            "--preset",
            "case1",
            "--provider",
            "analytic-closed",
            "--lambda-grid",
            "100:100:1",
            "--gamma-db",
            "0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["preset"] == "case1"
    assert len(rows) == 1
    assert float(rows[0]["p_cov"]) == pytest.approx(0.3998, abs=2e-3)
    assert rows[0]["provider"] == "analytic-closed"


def test_coverage_rerun_is_deterministic_apart_from_wall_clock(tmp_path):
    args = [
        "coverage",
        "--preset",
        "case1",
        "--provider",
        "monte-carlo",
        "--trials",
        "500",
        "--seed",
        "7",
        "--lambda-grid",
        "10:100:1",
        "--gamma-db",
        "0",
    ]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    meta1, rows1 = read_csv(out1)
    meta2, rows2 = read_csv(out2)
    assert meta1 == meta2
    strip = lambda rows: [
        {k: v for k, v in r.items() if k != "wall_ms"} for r in rows
    ]
    assert strip(rows1) == strip(rows2)


def test_coverage_worker_pool_preserves_row_order(tmp_path):
    common = [
        "coverage",
        "--preset",
        "case1",
        "--provider",
        "analytic-closed",
        "--lambda-grid",
        "10:1000:1",
        "--gamma-db",
        "0",
    ]
    out1, out2 = tmp_path / "seq.csv", tmp_path / "par.csv"
    assert main(common + ["--out", str(out1), "--workers", "1"]) == 0
    assert main(common + ["--out", str(out2), "--workers", "2"]) == 0
    _, rows1 = read_csv(out1)
    _, rows2 = read_csv(out2)
    strip = lambda rows: [
        {k: v for k, v in r.items() if k != "wall_ms"} for r in rows
    ]
    assert strip(rows1) == strip(rows2)


def test_unknown_preset_is_config_error(tmp_path, capsys):
    code = main(
        ["coverage", "--preset", "bogus", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2
    assert "unknown preset" in capsys.readouterr().err


def test_malformed_grid_is_config_error(tmp_path):
    code = main(
        [
            "coverage",
            "--preset",
            "case1",
            "--lambda-grid",
            "nope",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    )
    assert code == 2


def test_closed_provider_rejected_off_family(tmp_path):
    code = main(
        [
            "coverage",
            "--preset",
            "case2",
            "--provider",
            "analytic-closed",
            "--lambda-grid",
            "10:10:1",
            "--gamma-db",
            "0",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    )
    assert code == 2


def test_ase_empty_threshold_list_yields_no_rows(tmp_path):
    out = tmp_path / "ase.csv"
    code = main(
        [
            "ase",
            "--preset",
            "case1",
            "--provider",
            "analytic-closed",
            "--lambda-grid",
            "100:100:1",
            "--gamma0-db",
            "",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, rows = read_csv(out)
    assert rows == []


def test_validate_provider_against_itself_passes_exactly(tmp_path):
    out = tmp_path / "val.csv"
    code = main(
        [
            "validate",
            "--preset",
            "case1",
            "--provider",
            "analytic-closed",
            "--baseline-provider",
            "analytic-closed",
            "--lambda-grid",
            "10:100:1",
            "--gamma-db",
            "0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, rows = read_csv(out)
    assert rows and all(r["status"] == "PASS" for r in rows)
    assert all(float(r["abs_delta"]) == 0.0 for r in rows)


def test_validate_monte_carlo_against_closed(tmp_path):
    out = tmp_path / "val.csv"
    code = main(
        [
            "validate",
            "--preset",
            "case1",
            "--provider",
            "monte-carlo",
            "--trials",
            "4000",
            "--seed",
            "11",
            "--lambda-grid",
            "10:10:1",
            "--gamma-db",
            "0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 1 and rows[0]["status"] == "PASS"


def test_validate_failure_exit_code(tmp_path):
    # Comparing two different presets with a tolerance of zero must fail.
    out = tmp_path / "val.csv"
    code = main(
        [
            "validate",
            "--preset",
            "single-slope",
            "--provider",
            "analytic-general",
            "--baseline-preset",
            "case1",
            "--baseline-provider",
            "analytic-closed",
            "--tol",
            "1e-9",
            "--lambda-grid",
            "100:100:1",
            "--gamma-db",
            "0",
            "--out",
            str(out),
        ]
    )
    assert code == 1


def test_config_file_defaults_and_cli_override(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text(
        "preset=case1\nprovider=analytic-closed\nlambda-grid=100:100:1\n"
        "gamma-db=0\n# comment line\n"
    )
    out = tmp_path / "cov.csv"
    code = main(
        ["coverage", "--config", str(cfg), "--gamma-db", "3", "--out", str(out)]
    )
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["provider"] == "analytic-closed"
    assert len(rows) == 1
    assert float(rows[0]["gamma_db"]) == 3.0


def test_peak_malformed_range_is_config_error(tmp_path):
    code = main(
        [
            "peak",
            "--preset",
            "case1",
            "--lambda-range",
            "abc",
            "--out",
            str(tmp_path / "p.csv"),
        ]
    )
    assert code == 2
