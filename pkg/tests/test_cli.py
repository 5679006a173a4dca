import json

import pytest

from scenariolab.cli import main
from scenariolab.judgement import JudgementPool, JudgementRecord
from scenariolab.levels import level_spec
from scenariolab.metrics import read_metric_csv
from scenariolab.service import SessionManager
from scenariolab.service.store import EventLog


def run(*argv):
    return main([str(a) for a in argv])


class TestSynth:
    def test_writes_level_files_and_report(self, tmp_path):
        out = tmp_path / "synth"
        assert run("synth", "--out", out, "--levels", "all", "--n", 50,
                   "--calibration-n", 2000, "--seed", 7) == 0
        for lv in range(1, 6):
            assert (out / f"level{lv}.jsonl").exists()
        assert (out / "all.jsonl").exists()
        assert (out / "calibration_report.txt").exists()
        assert json.loads((out / "effective_config.json").read_text())["seed"] == 7

    def test_level_subset(self, tmp_path):
        out = tmp_path / "synth"
        assert run("synth", "--out", out, "--levels", "2", "--n", 10,
                   "--calibration-n", 1000) == 0
        assert (out / "level2.jsonl").exists()
        assert not (out / "level1.jsonl").exists()


class TestBenchmark:
    def test_aggregate_includes_accuracy(self, tmp_path):
        out = tmp_path / "bench"
        assert run("benchmark", "--out", out, "--episodes", 100) == 0
        rows = read_metric_csv(out / "aggregate.csv")
        names = {r["metric"] for r in rows}
        assert "is_correct" in names and "tree_score" in names
        assert (out / "analytic_oracle.json").exists()

    def test_file_source(self, tmp_path):
        synth_out = tmp_path / "synth"
        run("synth", "--out", synth_out, "--n", 400, "--calibration-n", 1000)
        out = tmp_path / "bench"
        assert run("benchmark", "--out", out, "--source",
                   synth_out / "all.jsonl", "--episodes", 20) == 0
        assert (out / "per_scenario.csv").exists()

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run("benchmark", "--out", out, "--episodes", 50, "--seed", 3)
        assert (a / "aggregate.csv").read_bytes() == (b / "aggregate.csv").read_bytes()
        assert (a / "per_scenario.csv").read_bytes() == (b / "per_scenario.csv").read_bytes()


class TestTrainEval:
    def test_train_logs_every_interval_then_eval(self, tmp_path):
        out = tmp_path / "train"
        assert run("train", "--out", out, "--total-steps", 5000, "--seed", 1) == 0
        rows = read_metric_csv(out / "metrics.csv")
        steps = sorted({r["step"] for r in rows})
        assert steps == [1000, 2000, 3000, 4000, 5000]
        eval_out = tmp_path / "eval"
        assert run("eval", "--checkpoint", out / "checkpoint.json",
                   "--out", eval_out, "--episodes", 50) == 0
        summary = json.loads((eval_out / "eval_summary.json").read_text())
        assert set(summary) >= {"M.T.S", "M.C.A", "M.W.A", "M.A.D"}

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "a2c.json"
        cfg.write_text(json.dumps({"total_steps": 2000, "seed": 5}))
        out = tmp_path / "train"
        assert run("train", "--out", out, "--config", cfg,
                   "--total-steps", 3000) == 0
        effective = json.loads((out / "effective_config.json").read_text())
        assert effective["total_steps"] == 3000   # flag wins
        assert effective["seed"] == 5             # file wins over default

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"learning_rte": 1e-3}))
        with pytest.raises(SystemExit):
            run("train", "--out", tmp_path / "x", "--config", cfg)


class TestGridsearch:
    def test_tiny_grid(self, tmp_path):
        out = tmp_path / "grid"
        assert run("gridsearch", "--out", out, "--n-combos", 1,
                   "--seeds-per-combo", 1, "--steps-per-trial", 1024,
                   "--holdout-scenarios", 10) == 0
        assert (out / "trials.csv").exists()
        winner = json.loads((out / "winner.json").read_text())
        assert "winner" in winner


class TestReport:
    def make_store(self, tmp_path):
        records = {}
        for lv in range(1, 6):
            n = level_spec(lv).n_classes
            conf = tuple(1.0 if i == 0 else 0.0 for i in range(n))
            records[lv] = tuple(JudgementRecord(lv, conf, 0, f"x{lv}-{i}")
                                for i in range(40))
        pool = JudgementPool(records)
        store = EventLog(tmp_path / "store")
        manager = SessionManager(pool, store)
        sid = manager.create_session("volunteer")
        for _ in range(3):
            manager.next_item(sid)
            done = False
            while not done:
                done = manager.submit_action(sid, 0)["scenario_done"]
        manager.finish_session(sid)
        return tmp_path / "store"

    def test_report_rows(self, tmp_path):
        store = self.make_store(tmp_path)
        rl = tmp_path / "rl.json"
        rl.write_text(json.dumps({"M.T.S": 1.4, "M.C.A": 0.88,
                                  "M.W.A": 0.12, "M.A.D": 0.0}))
        out = tmp_path / "rep"
        assert run("report", "--store", store, "--out", out, "--rl-eval", rl) == 0
        text = (out / "comparison.txt").read_text()
        assert "Volunteer A (Collective)" in text
        assert "RL Agent" in text and "1.4000" in text
        csv_text = (out / "comparison.csv").read_text()
        assert csv_text.startswith("agent,n_scenarios,M.T.S,M.C.A,M.W.A,M.A.D")


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("flyme")
    assert exc.value.code == 2
