import json
from pathlib import Path

import numpy as np
import pytest

from rfi_mvue.cli import (
    EXIT_DIMENSION,
    EXIT_INPUT,
    EXIT_IO,
    EXIT_NOT_PD,
    EXIT_OK,
    build_cli_config,
    main,
    parse_config_text,
    UsageError,
)
from rfi_mvue.core import RfiStatistics, SampleSet
from rfi_mvue.formats import (
    FormatError,
    parse_samples,
    parse_statistics,
    read_statistics,
    write_samples,
    write_statistics,
)
from rfi_mvue.harness import records_from_csv
from rfi_mvue.solver import evaluate_error_variance


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def stats_file(tmp_path, mean, cov, name="stats.txt"):
    path = tmp_path / name
    write_statistics(path, RfiStatistics(mean, cov))
    return str(path)


def samples_file(tmp_path, values, name="samples.txt"):
    path = tmp_path / name
    write_samples(path, SampleSet(values))
    return str(path)


def output_map(text):
    return {line.split()[0]: line.split()[1:] for line in text.strip().splitlines()}


# --- file formats --------------------------------------------------------


def test_statistics_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5, 5))
    stats = RfiStatistics(rng.standard_normal(5), x @ x.T)
    path = tmp_path / "s.txt"
    write_statistics(path, stats)
    back = read_statistics(path)
    np.testing.assert_array_equal(back.mean, stats.mean)
    np.testing.assert_array_equal(back.covariance, stats.covariance)


def test_parse_statistics_text():
    stats = parse_statistics("2\n0 0\n\n2 0\n0 4\n")
    np.testing.assert_array_equal(stats.covariance, np.diag([2.0, 4.0]))


@pytest.mark.parametrize(
    "text",
    ["", "x\n", "2\n0 0\n1 0\n", "2\n0 0\n1 0\n0 1 2\n", "2\n0 zero\n1 0\n0 1\n", "2 3\n0 0\n"],
)
def test_malformed_statistics(text):
    with pytest.raises(FormatError):
        parse_statistics(text)


def test_samples_parse():
    assert parse_samples("4\n0 0 0 4\n").values.tolist() == [0, 0, 0, 4]
    with pytest.raises(FormatError):
        parse_samples("4\n0 0 0\n")


# --- weights -------------------------------------------------------------


def test_weights_closed_form(tmp_path, capsys):
    path = write(tmp_path, "s.txt", "2\n0 0\n2 0\n0 4\n")
    assert main(["weights", "--stats", path]) == EXIT_OK
    out = output_map(capsys.readouterr().out)
    assert out["weights"] == ["0.6666666666666666", "0.3333333333333333"]
    assert out["min_variance"] == ["1.3333333333333333"]
    assert out["multiplier"] == ["-1.3333333333333333"]


def test_weights_not_positive_definite(tmp_path, capsys):
    path = write(tmp_path, "s.txt", "2\n0 0\n1 1\n1 1\n")
    assert main(["weights", "--stats", path]) == EXIT_NOT_PD
    assert "not positive definite" in capsys.readouterr().err


def test_weights_truncated_file(tmp_path):
    path = write(tmp_path, "s.txt", "3\n0 0 0\n1 0 0\n0 1 0\n")
    assert main(["weights", "--stats", path]) == EXIT_INPUT


def test_weights_missing_file(tmp_path):
    assert main(["weights", "--stats", str(tmp_path / "nope.txt")]) == EXIT_INPUT


def test_weights_round_trip_through_error_variance(tmp_path, capsys):
    rng = np.random.default_rng(12)
    x = rng.standard_normal((6, 6))
    cov = x @ x.T + np.eye(6)
    path = stats_file(tmp_path, np.zeros(6), cov)
    assert main(["weights", "--stats", path]) == EXIT_OK
    out = output_map(capsys.readouterr().out)
    weights = [float(w) for w in out["weights"]]
    printed = float(out["min_variance"][0])
    recomputed = evaluate_error_variance(weights, read_statistics(path))
    assert recomputed == pytest.approx(printed, rel=1e-12)


# --- estimate ------------------------------------------------------------


def test_estimate_baseline(tmp_path, capsys):
    s = samples_file(tmp_path, [0, 0, 0, 4])
    st = stats_file(tmp_path, np.zeros(4), np.eye(4))
    assert main(["estimate", "--samples", s, "--stats", st, "--method", "baseline", "--beta", "1"]) == 0
    out = output_map(capsys.readouterr().out)
    assert float(out["estimate"][0]) == 0.0
    assert out["g"] == ["3"]
    assert out["fallback"] == ["false"]


def test_estimate_baseline_fallback_reported(tmp_path, capsys):
    s = samples_file(tmp_path, [1, 3])
    st = stats_file(tmp_path, np.zeros(2), np.eye(2))
    assert main(["estimate", "--samples", s, "--stats", st, "--method", "baseline"]) == 0
    out = output_map(capsys.readouterr().out)
    assert out["g"] == ["0"] and out["fallback"] == ["true"]
    assert float(out["estimate"][0]) == 2.0


def test_estimate_weighted_translation(tmp_path, capsys):
    mu = np.array([1.0, 3.0, 2.0, 5.0])
    s = samples_file(tmp_path, mu + 7)
    st = stats_file(tmp_path, mu, np.diag(2 * mu))
    assert main(["estimate", "--samples", s, "--stats", st, "--method", "weighted"]) == 0
    out = output_map(capsys.readouterr().out)
    assert float(out["estimate"][0]) == pytest.approx(7.0, abs=1e-12)
    assert "theoretical_variance" in out


def test_estimate_dimension_mismatch(tmp_path):
    s = samples_file(tmp_path, [1, 2, 3])
    st = stats_file(tmp_path, np.zeros(4), np.eye(4))
    assert main(["estimate", "--samples", s, "--stats", st, "--method", "weighted"]) == EXIT_DIMENSION


def test_estimate_parse_error(tmp_path):
    s = write(tmp_path, "s.txt", "3\n1 2\n")
    st = stats_file(tmp_path, np.zeros(3), np.eye(3))
    assert main(["estimate", "--samples", s, "--stats", st]) == EXIT_INPUT


def test_bad_arguments_exit_2(tmp_path):
    assert main(["estimate", "--method", "median"]) == EXIT_INPUT
    assert main([]) == EXIT_INPUT


# --- simulate ------------------------------------------------------------


def test_config_parsing():
    values = parse_config_text(
        "# sweep\nm_values = 1..3\ntrials_per_m = 5  # small\nbeta = 1.5\nredraw_counts = no\n"
    )
    assert values == {"m_values": (1, 2, 3), "trials_per_m": 5, "beta": 1.5, "redraw_counts": False}
    assert parse_config_text("m_values = 2, 4 6")["m_values"] == (2, 4, 6)
    with pytest.raises(UsageError):
        parse_config_text("colour = blue\n")
    with pytest.raises(UsageError):
        parse_config_text("trials_per_m\n")


def test_flags_override_file_and_env_fallback():
    cfg = build_cli_config({"master_seed": 1, "trials_per_m": 3}, {"master_seed": 9}, env={})
    assert cfg.sweep.master_seed == 9
    cfg = build_cli_config({"trials_per_m": 3}, {}, env={"RFI_MVUE_SEED": "44"})
    assert cfg.sweep.master_seed == 44
    cfg = build_cli_config({"trials_per_m": 3, "master_seed": 2}, {}, env={"RFI_MVUE_SEED": "44"})
    assert cfg.sweep.master_seed == 2
    with pytest.raises(UsageError):
        build_cli_config({}, {}, env={"RFI_MVUE_SEED": "abc"})


def run_simulate(tmp_path, config_text, *extra, out="out"):
    cfg = write(tmp_path, "sim.cfg", config_text)
    out_dir = tmp_path / out
    code = main(["simulate", "--config", cfg, "--out", str(out_dir), *extra])
    return code, out_dir


def test_simulate_outputs(tmp_path):
    code, out = run_simulate(tmp_path, "trials_per_m = 20\n", "--seed", "3", "--workers", "1")
    assert code == EXIT_OK
    csv_text = (out / "sweep.csv").read_text()
    assert len(csv_text.strip().splitlines()) == 11
    recs = records_from_csv(csv_text)
    assert [r.M for r in recs] == list(range(1, 11))
    assert all(r.seed == 3 for r in recs)
    doc = json.loads((out / "sweep.json").read_text())
    assert doc["config"]["master_seed"] == 3 and len(doc["records"]) == 10
    for name in ("error_vs_M.dat", "variance_vs_M.dat"):
        assert (out / name).read_text().count("# ") == 2


def test_simulate_csv_only(tmp_path):
    code, out = run_simulate(tmp_path, "trials_per_m = 2\nm_values = 1\n", "--format", "csv")
    assert code == EXIT_OK
    assert (out / "sweep.csv").exists() and not (out / "sweep.json").exists()


def test_simulate_deterministic(tmp_path):
    text = "trials_per_m = 30\nm_values = 1..4\nmaster_seed = 11\n"
    _, a = run_simulate(tmp_path, text, "--workers", "1", out="a")
    _, b = run_simulate(tmp_path, text, "--workers", "2", out="b")
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert (a / "sweep.json").read_bytes() == (b / "sweep.json").read_bytes()


@pytest.mark.parametrize(
    "text", ["trials_per_m = 0\n", "trials_per_m = many\n", "bogus = 1\n", "format = xml\n"]
)
def test_simulate_config_errors(tmp_path, text):
    code, _ = run_simulate(tmp_path, text)
    assert code == EXIT_INPUT


def test_simulate_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    cfg = write(tmp_path, "sim.cfg", "trials_per_m = 1\nm_values = 1\n")
    assert main(["simulate", "--config", cfg, "--out", str(blocker / "sub")]) == EXIT_IO
