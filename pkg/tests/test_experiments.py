import csv
import io

import pytest

from colgen import (ExperimentConfig, GaBlockProblem, generate_ga_instance,
                    generate_mc_instance, parse_ga_instance, parse_mc_instance)
from colgen import experiments
from colgen.cli import main
from colgen.experiments import (CSV_COLUMNS, STRATEGIES, emit_csv,
                                emit_markdown, emit_report, format_objective,
                                format_pct, gap_pct, pct_reduction,
                                run_experiment)


def ga_batch(count=3, bins=6, items=5, seed=0):
    return [(f"ga-s{seed + i}", generate_ga_instance(bins, items, seed + i))
            for i in range(count)]


def csv_rows(csv_text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(csv_text)))


def strip_time_columns(csv_text: str) -> list[list[str]]:
    drop = {CSV_COLUMNS.index("time_s"), CSV_COLUMNS.index("r_time_pct")}
    return [[c for i, c in enumerate(cells) if i not in drop]
            for cells in csv_rows(csv_text)]


# ----------------------------------------------------------------------
# metric arithmetic and formatting

def test_pct_reduction_examples():
    assert pct_reduction(180, 90) == 50.0
    assert pct_reduction(100, 100) == 0.0
    assert pct_reduction(100, 120) == -20.0


def test_format_pct_examples():
    assert format_pct(50.0) == "50.00%"
    assert format_pct(pct_reduction(145, 180)) == "-24.14%"


def test_gap_is_zero_at_reference():
    assert gap_pct(123.456, 123.456) == 0.0
    assert gap_pct(110.0, 100.0) == pytest.approx(10.0)


def test_objective_formatting():
    assert format_objective(123456.0) == "1.23E+05"


def test_strategy_table():
    assert set(STRATEGIES) == {"baseline", "exact-all", "exact-computed",
                               "exact-add", "heur-all", "heur-computed", "heur-add"}


# ----------------------------------------------------------------------
# experiment runner

def test_baseline_always_anchors_the_row():
    config = ExperimentConfig(problem="ga", strategies=("exact-all",))
    report = run_experiment(config, ga_batch(2))
    assert report.ok
    for row in report.rows:
        assert list(row.results) == ["baseline", "exact-all"]
        base = row.results["baseline"]
        assert base.r_calls is None and base.r_time is None and base.gap is None
        sr = row.results["exact-all"]
        assert sr.r_calls is not None and sr.r_time is not None
        assert sr.gap == pytest.approx(0.0, abs=1e-6)


UNROUTABLE_MC = "nodes 2\narc 0 1 10 9 1\ncommodity 0 1 1 2\n"  # delay 9 > budget 2


def test_failures_are_isolated():
    bad = parse_mc_instance(UNROUTABLE_MC)
    good = generate_mc_instance(5, 12, 2, seed=1)
    config = ExperimentConfig(problem="mc", strategies=("exact-all",))
    report = run_experiment(config, [("bad", bad), ("good", good)])
    assert not report.ok
    assert {f.instance for f in report.failures} == {"bad"}
    names = {row.instance: row for row in report.rows}
    assert not names["bad"].results
    assert list(names["good"].results) == ["baseline", "exact-all"]


class OverclaimingBounds(GaBlockProblem):
    def hypercube_bound_term(self, block, pi_prev, pi_now):
        return 1e6


def test_audit_violations_reach_the_report(monkeypatch):
    monkeypatch.setattr(experiments, "make_problem",
                        lambda problem, inst: OverclaimingBounds(inst))
    config = ExperimentConfig(problem="ga", strategies=("exact-all",), audit=True)
    report = run_experiment(config, ga_batch(1))
    assert report.audit_violations
    assert not report.ok


def test_deterministic_apart_from_timing():
    config = ExperimentConfig(problem="ga",
                              strategies=("exact-all", "heur-computed"))
    first = emit_csv(run_experiment(config, ga_batch(3)).rows)
    second = emit_csv(run_experiment(config, ga_batch(3)).rows)
    assert strip_time_columns(first) == strip_time_columns(second)


def test_parallel_runs_match_serial_and_drop_rtime():
    instances = ga_batch(3)
    serial = run_experiment(
        ExperimentConfig(problem="ga", strategies=("exact-all",)), instances)
    parallel = run_experiment(
        ExperimentConfig(problem="ga", strategies=("exact-all",), jobs=2), instances)
    assert strip_time_columns(emit_csv(serial.rows)) == \
        strip_time_columns(emit_csv(parallel.rows))
    for row in parallel.rows:
        assert row.results["exact-all"].r_time is None


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(problem="lp")
    with pytest.raises(ValueError):
        ExperimentConfig(problem="ga", strategies=("exact-all", "nope"))
    with pytest.raises(ValueError):
        ExperimentConfig(problem="ga", jobs=0)


# ----------------------------------------------------------------------
# report emission

def test_csv_empty_is_header_only():
    assert emit_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_csv_layout():
    config = ExperimentConfig(problem="ga", strategies=("exact-all",))
    report = run_experiment(config, ga_batch(1))
    rows = csv_rows(emit_csv(report.rows))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 3  # header + baseline + exact-all
    base_cells = rows[1]
    assert base_cells[3] == "baseline"
    for name in ("r_calls_pct", "r_time_pct", "gap_pct"):
        assert base_cells[CSV_COLUMNS.index(name)] == ""
    strat_cells = rows[2]
    assert strat_cells[CSV_COLUMNS.index("gap_pct")] == "0.00"
    float(strat_cells[CSV_COLUMNS.index("r_calls_pct")])  # bare number, no sign noise


def test_markdown_groups_exact_and_heuristic():
    config = ExperimentConfig(problem="ga",
                              strategies=("exact-all", "heur-computed"))
    report = run_experiment(config, ga_batch(2))
    text = emit_markdown(report.rows)
    assert "### Exact filtering" in text
    assert "### Heuristic filtering" in text
    assert "exact-all %rCalls" in text
    assert "heur-computed GAP" in text
    assert "exact-all GAP" not in text  # gap column belongs to the heuristics table
    assert "ga-s0" in text and "ga-s1" in text


def test_markdown_heuristic_only_drops_exact_table():
    config = ExperimentConfig(problem="ga", strategies=("heur-all",))
    report = run_experiment(config, ga_batch(1))
    text = emit_markdown(report.rows)
    assert "### Exact filtering" not in text
    assert "### Heuristic filtering" in text


def test_markdown_empty():
    assert emit_markdown([]) == "_no instances_\n"


def test_emit_report_dispatch():
    assert emit_report([], "csv").startswith("problem,")
    assert emit_report([], "md") == emit_report([], "markdown")
    with pytest.raises(ValueError):
        emit_report([], "xml")


# ----------------------------------------------------------------------
# command line

def test_cli_generate_then_run(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["generate", "--problem", "ga", "--count", "2", "--seed", "3",
                 "--bins", "5", "--items", "4", "--out-dir", str(data)]) == 0
    files = sorted(p.name for p in data.iterdir())
    assert files == ["ga_s3.txt", "ga_s4.txt"]
    parse_ga_instance((data / "ga_s3.txt").read_text())  # round-trips

    out = tmp_path / "report.csv"
    code = main(["run", "--problem", "ga", "--instances", str(data / "*.txt"),
                 "--strategies", "baseline,exact-all", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5  # two instances, two strategies each
    capsys.readouterr()


def test_cli_generated_batch_to_stdout(capsys):
    code = main(["run", "--problem", "ga",
                 "--generate", "bins=5,items=4,count=2", "--seed", "7",
                 "--strategies", "exact-all,heur-add", "--format", "md"])
    captured = capsys.readouterr()
    assert code == 0
    assert "### Exact filtering" in captured.out
    assert "ga-s7" in captured.out and "ga-s8" in captured.out


def test_cli_bad_inputs(tmp_path, capsys):
    assert main(["run", "--problem", "ga", "--instances",
                 str(tmp_path / "nothing-*.txt")]) == 2
    assert main(["run", "--problem", "ga", "--generate", "bins=5"]) == 2
    assert main(["generate", "--problem", "ga", "--count", "1",
                 "--out-dir", str(tmp_path)]) == 2
    capsys.readouterr()


def test_cli_failing_instance_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(UNROUTABLE_MC)
    code = main(["run", "--problem", "mc", "--instances", str(path),
                 "--out", str(tmp_path / "r.csv")])
    captured = capsys.readouterr()
    assert code == 1
    assert "FAILED" in captured.err


def test_cli_audit_violation_exits_nonzero(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(experiments, "make_problem",
                        lambda problem, inst: OverclaimingBounds(inst))
    code = main(["run", "--problem", "ga", "--generate", "bins=6,items=5,count=1",
                 "--strategies", "exact-all", "--audit",
                 "--out", str(tmp_path / "r.csv")])
    captured = capsys.readouterr()
    assert code == 1
    assert "AUDIT" in captured.err
