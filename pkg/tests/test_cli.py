"""Tests for the command-line interface and benchmark runs."""

import csv
import json

import pytest

from planforge.bench import BenchConfig, load_bench_config, run_bench, suite_instances
from planforge.cli import EXIT_NOT_SOLVED, EXIT_OK, EXIT_USAGE, main
from planforge.errors import SchemaViolation

from conftest import INSTANCES, ROOT, write_instance, write_schedule


def instance(name):
    return str(INSTANCES / f"{name}.json")


class TestSolve:
    def test_solves_and_writes_plan(self, tmp_path, capsys):
        plan_out = tmp_path / "plan.json"
        code = main(["solve", "--instance", instance("counters_n2"), "--algorithm", "bfs",
                     "--heuristic", "blind", "--plan-out", str(plan_out)])
        assert code == EXIT_OK
        assert json.loads(plan_out.read_text(encoding="utf-8"))["plan"] == ["inc c1"]
        assert "=== Run Results ===" in capsys.readouterr().out

    def test_not_solved(self):
        assert main(["solve", "--instance", instance("pacman_unavoidable")]) == EXIT_NOT_SOLVED

    def test_unknown_heuristic(self):
        assert main(["solve", "--instance", instance("counters_n2"),
                     "--heuristic", "ff"]) == EXIT_USAGE

    def test_missing_instance_file(self, tmp_path):
        assert main(["solve", "--instance", str(tmp_path / "nope.json")]) == EXIT_USAGE

    def test_domain_mismatch(self):
        assert main(["solve", "--domain", "pacman",
                     "--instance", instance("counters_n2")]) == EXIT_USAGE

    def test_bad_arguments(self):
        assert main(["solve"]) == EXIT_USAGE
        assert main([]) == EXIT_USAGE
        assert main(["--help"]) == EXIT_OK


class TestValidate:
    def test_valid_and_invalid_plans(self, tmp_path):
        good = tmp_path / "good.json"
        good.write_text('{"plan": ["inc c1"]}', encoding="utf-8")
        bad = tmp_path / "bad.json"
        bad.write_text('["dec c0"]', encoding="utf-8")
        assert main(["validate", "--instance", instance("counters_n2"),
                     "--plan", str(good)]) == EXIT_OK
        assert main(["validate", "--instance", instance("counters_n2"),
                     "--plan", str(bad)]) == EXIT_NOT_SOLVED

    def test_malformed_plan_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"plan": 3}', encoding="utf-8")
        assert main(["validate", "--instance", instance("counters_n2"),
                     "--plan", str(bad)]) == EXIT_USAGE


@pytest.mark.slow
class TestSynth:
    def test_offline_tsr(self, tmp_path, llm_root):
        write_schedule(llm_root, "counters", ["broken", "good"])
        record_out = tmp_path / "record.json"
        code = main(["synth", "--instance", instance("counters_n3"), "--strategy", "tsr",
                     "--provider", "offline", "--fixtures", str(llm_root),
                     "--no-strategize", "--budget", "30", "--slice", "10",
                     "--work-dir", str(tmp_path / "work"), "--record-out", str(record_out)])
        assert code == EXIT_OK
        doc = json.loads(record_out.read_text(encoding="utf-8"))
        assert doc["outcome"] == "Solved"
        assert len(doc["attempts"]) == 2

    def test_offline_needs_fixtures(self):
        assert main(["synth", "--instance", instance("counters_n3"),
                     "--provider", "offline"]) == EXIT_USAGE

    def test_mix_without_refine(self, llm_root):
        assert main(["synth", "--instance", instance("counters_n3"), "--fixtures",
                     str(llm_root), "--mix", "both"]) == EXIT_USAGE


def _bench_config(tmp_path, configurations):
    path = tmp_path / "bench.json"
    path.write_text(json.dumps({"work_dir": "build", "configurations": configurations}),
                    encoding="utf-8")
    return path


class TestBench:
    def test_builtin_bench_report(self, tmp_path):
        suite = tmp_path / "suite"
        for name in ("counters_n2", "pacman_unavoidable"):
            doc = json.loads((INSTANCES / f"{name}.json").read_text(encoding="utf-8"))
            write_instance(suite / doc["domain"], name, doc)
        config = _bench_config(tmp_path, [
            {"name": "bfs-blind", "kind": "builtin", "algorithm": "bfs", "heuristic": "blind",
             "limits": {"wall_clock_seconds": 10}},
            {"name": "gbfs-hmd", "kind": "builtin", "limits": {"wall_clock_seconds": 10}},
        ])
        out = tmp_path / "coverage.csv"
        code = main(["bench", "--suite", str(suite), "--config", str(config),
                     "--report", str(out)])
        assert code == EXIT_OK
        with out.open(newline="", encoding="utf-8") as f:
            rows = {(r["domain"], r["configuration"]): r for r in csv.DictReader(f)}
        assert rows[("counters", "bfs-blind")]["solved"] == "1"
        assert rows[("pacman", "gbfs-hmd")]["solved"] == "0"
        assert (tmp_path / "coverage_instances.csv").is_file()

    def test_config_paths_resolve_against_file(self, tmp_path, llm_root):
        path = tmp_path / "bench.json"
        path.write_text(json.dumps({
            "work_dir": "build",
            "configurations": [{"name": "tsr", "kind": "tsr",
                                "llm": {"provider": "offline_fixtures", "fixtures_dir": "llm"}}],
        }), encoding="utf-8")
        config = load_bench_config(path)
        assert config.work_dir == (tmp_path / "build").resolve()
        assert config.configurations[0].llm.fixtures_dir == llm_root.resolve()

    @pytest.mark.parametrize("configurations", [
        [],
        [{"name": "x", "kind": "tsr"}],
        [{"name": "x", "kind": "builtin"}, {"name": "x", "kind": "builtin"}],
        [{"name": "x", "kind": "builtin", "heuristic": "plugin:h.py"}],
    ])
    def test_invalid_configs(self, tmp_path, configurations):
        with pytest.raises(SchemaViolation):
            load_bench_config(_bench_config(tmp_path, configurations))

    def test_bad_instances_are_skipped(self, tmp_path):
        suite = tmp_path / "suite"
        write_instance(suite, "ok", json.loads((INSTANCES / "counters_n2.json").read_text()))
        write_instance(suite, "broken", {"domain": "sokoban"})
        config = BenchConfig.model_validate({"configurations": [
            {"name": "bfs", "kind": "builtin", "algorithm": "bfs", "heuristic": "blind"}]})
        records = run_bench(suite, config)
        assert [r.instance_id for r in records] == ["ok"]

    def test_missing_suite(self, tmp_path):
        with pytest.raises(SchemaViolation):
            suite_instances(tmp_path / "missing")

    @pytest.mark.slow
    def test_parallel_jobs_match_serial(self, tmp_path):
        suite = tmp_path / "suite"
        for name in ("counters_n2", "counters_n3", "pacman_5x5", "pacman_unavoidable"):
            write_instance(suite, name, json.loads((INSTANCES / f"{name}.json").read_text()))
        config = BenchConfig.model_validate({"configurations": [
            {"name": "gbfs-hmd", "kind": "builtin", "limits": {"wall_clock_seconds": 20}}]})
        serial = run_bench(suite, config, jobs=1)
        parallel = run_bench(suite, config, jobs=2)
        assert len(serial) == 4
        assert [(r.instance_id, r.outcome, r.plan) for r in serial] == \
            [(r.instance_id, r.outcome, r.plan) for r in parallel]

    def test_shipped_bench_config_loads(self):
        config = load_bench_config(ROOT / "fixtures" / "bench.json")
        assert [c.name for c in config.configurations] == ["bfs-blind", "gbfs-hmd",
                                                           "tsr-offline"]
