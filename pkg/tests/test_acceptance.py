"""Acceptance suite: one test per release criterion, stated tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL
line per criterion.  The desk-scale training fixture takes a few
minutes; everything else is seconds.
"""
import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from scenariolab.a2c import (
    Batch,
    TrainConfig,
    clip_gradients,
    evaluate,
    global_norm,
    gradients,
    init_params,
    loss,
    masked_probs,
    sample_actions,
    train,
)
from scenariolab.agents import benchmark_expectations, run_benchmark
from scenariolab.env import Event, Mode, ScenarioEnv
from scenariolab.judgement import (
    ConfusionSpec,
    JudgementPool,
    JudgementRecord,
    SynthConfig,
    SyntheticSource,
    calibration_report,
    default_confusion_specs,
)
from scenariolab.levels import level_spec
from scenariolab.metrics import (
    ScenarioMetrics,
    comparison_table,
    format_comparison_text,
    scenario_metrics,
)
from scenariolab.service import create_app, replay_events
from scenariolab.service.store import EventLog
from scenariolab.tuner import GridSpec, read_trials_csv, run_grid, write_trials_csv


def report(name: str, ok: bool, detail: str = ""):
    print(f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} - {name}"
          + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def identity_specs():
    out = {}
    for lv, spec in default_confusion_specs().items():
        n = spec.n_classes
        eye = tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n))
        out[lv] = ConfusionSpec(lv, spec.priors, (1.0,) * n, eye)
    return out


# ---------------------------------------------------------------------------
# 1. Environment reward algebra
# ---------------------------------------------------------------------------

def test_environment_reward_algebra():
    started = time.monotonic()
    rng = np.random.default_rng(0)
    source = SyntheticSource(config=SynthConfig(seed=1))
    envs = {mode: ScenarioEnv(source, mode=mode)
            for mode in (Mode.TERMINATE_ON_WRONG, Mode.CONTINUE_THROUGH)}
    checked = perfect = 0
    for episode in range(10_000):
        mode = Mode.TERMINATE_ON_WRONG if episode % 2 else Mode.CONTINUE_THROUGH
        env = envs[mode]
        env.reset()
        counts = {Event.CORRECT: 0, Event.WRONG: 0, Event.GATHERED: 0}
        done = False
        force_perfect = episode % 20 == 0
        while not done:
            mask = env.valid_actions()
            if force_perfect:
                slot = env.state.current_record.ground_truth
            else:
                slot = int(rng.choice(np.flatnonzero(mask)))
            out = env.step(slot)
            if out.event in counts:
                counts[out.event] += 1
            done = out.episode_done
        expected = (counts[Event.CORRECT] - 5 * counts[Event.WRONG]
                    - counts[Event.GATHERED])
        assert env.state.accumulated_reward == expected
        checked += 1
        if force_perfect:
            assert env.state.accumulated_reward == 5.0
            perfect += 1
    elapsed = time.monotonic() - started
    report("environment reward algebra",
           checked == 10_000 and perfect == 500 and elapsed < 10.0,
           f"{checked} episodes ({perfect} forced-perfect) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. Calibration
# ---------------------------------------------------------------------------

def test_calibration_all_levels():
    started = time.monotonic()
    specs = default_confusion_specs()
    source = SyntheticSource(specs, SynthConfig(seed=42))
    worst_recall = worst_precision = 0.0
    for lv in range(1, 6):
        rep = calibration_report(source, specs[lv], 100_000)
        for row in rep["classes"]:
            worst_recall = max(worst_recall, row["recall_abs_dev"])
            worst_precision = max(worst_precision, row["precision_abs_dev"])
    elapsed = time.monotonic() - started
    report("synthetic calibration (recall +/-0.01, implied precision +/-0.03)",
           worst_recall < 0.01 and worst_precision < 0.03 and elapsed < 30.0,
           f"max |recall dev| {worst_recall:.4f}, max |precision dev| "
           f"{worst_precision:.4f}, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 3. Benchmark reproduction band + analytic oracle
# ---------------------------------------------------------------------------

def test_benchmark_band_and_analytic_oracle():
    specs = default_confusion_specs()
    source = SyntheticSource(specs, SynthConfig(seed=7))
    scenarios, agg = run_benchmark(source, mode=Mode.CONTINUE_THROUGH,
                                   n_scenarios=10_000)
    oracle = benchmark_expectations(specs)
    in_band = abs(agg["is_correct_mean"] - 0.82) <= 0.05
    se_mean = oracle["tree_score_std"] / math.sqrt(10_000)
    mean_ok = abs(agg["tree_score_mean"] - oracle["tree_score_mean"]) <= 5 * se_mean
    std_ok = abs(agg["tree_score_std"] - oracle["tree_score_std"]) <= 0.25
    report("benchmark band + analytic tree-score oracle",
           in_band and mean_ok and std_ok,
           f"is_correct {agg['is_correct_mean']:.4f} (band 0.82+/-0.05), "
           f"tree mean {agg['tree_score_mean']:.4f} vs {oracle['tree_score_mean']:.4f}"
           f" (tol {5 * se_mean:.3f}), "
           f"tree std {agg['tree_score_std']:.4f} vs {oracle['tree_score_std']:.4f}")


# ---------------------------------------------------------------------------
# 4. A2C correctness
# ---------------------------------------------------------------------------

def test_a2c_gradients_masking_clipping():
    rng = np.random.default_rng(3)
    worst = 0.0
    for seed in range(3):
        params = init_params(9, seed=seed)
        n = 4
        obs = rng.normal(size=(n, 9))
        masks = np.zeros((n, 5), dtype=bool)
        for i in range(n):
            masks[i, rng.choice(5, size=rng.integers(2, 5), replace=False)] = True
        actions = np.array([rng.choice(np.flatnonzero(m)) for m in masks])
        batch = Batch(obs, actions, masks, rng.normal(size=n), rng.normal(size=n))
        grads, _ = gradients(params, batch, 0.02, 0.5)
        h = 1e-6
        for key, g in grads.items():
            w = params.weights[key]
            for flat in rng.choice(w.size, size=min(8, w.size), replace=False):
                idx = np.unravel_index(flat, w.shape)
                orig = w[idx]
                w[idx] = orig + h
                up, _ = loss(params, batch, 0.02, 0.5)
                w[idx] = orig - h
                down, _ = loss(params, batch, 0.02, 0.5)
                w[idx] = orig
                fd = (up - down) / (2 * h)
                denom = max(abs(fd), abs(g[idx]), 1e-8)
                worst = max(worst, abs(fd - g[idx]) / denom)
    grad_ok = worst < 1e-4

    logits = rng.normal(size=(1, 5))
    mask = np.array([[True, False, True, False, True]])
    probs = np.repeat(masked_probs(logits, mask), 1_000_000, axis=0)
    draws = sample_actions(probs, np.random.default_rng(0))
    counts = np.bincount(draws, minlength=5)
    mask_ok = counts[1] == 0 and counts[3] == 0

    raw = {"w": rng.normal(size=(64, 64))}
    raw = {"w": raw["w"] * (10.0 / global_norm(raw))}
    clipped, pre = clip_gradients(raw, 1.0)
    clip_ok = (abs(pre - 10.0) < 1e-9
               and abs(global_norm(clipped) - 1.0) <= 1e-9)

    report("a2c gradients (fd < 1e-4), masked sampling (0 of 1e6), clipping",
           grad_ok and mask_ok and clip_ok,
           f"max rel err {worst:.2e}, masked draws {counts[1] + counts[3]}, "
           f"post-clip norm {global_norm(clipped):.12f}")


# ---------------------------------------------------------------------------
# 5 & 6. Learning signal and gather rationality (shared desk-scale policy)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def desk_run():
    specs = default_confusion_specs()
    started = time.monotonic()
    config = TrainConfig(total_steps=2_000_000, gamma=0.995, ent_coef=0.02,
                         learning_rate=5e-4, seed=1)
    result = train(config, SyntheticSource(specs, SynthConfig(seed=10)))
    train_elapsed = time.monotonic() - started
    ev = evaluate(result.params, SyntheticSource(specs, SynthConfig(seed=777)),
                  3000, trace=True)
    _, bench = run_benchmark(SyntheticSource(specs, SynthConfig(seed=778)),
                             mode=Mode.CONTINUE_THROUGH, n_scenarios=3000)
    return {"eval": ev, "bench": bench, "train_elapsed": train_elapsed}


def test_learning_signal(desk_run):
    ev, bench = desk_run["eval"], desk_run["bench"]
    non_inferior = ev.aggregate["is_correct_mean"] >= bench["is_correct_mean"]
    better_tree = ev.aggregate["tree_score_mean"] > bench["tree_score_mean"]

    id_started = time.monotonic()
    id_cfg = TrainConfig(total_steps=100_000, seed=0)
    id_result = train(id_cfg, SyntheticSource(identity_specs(), SynthConfig(seed=0)))
    id_eval = evaluate(id_result.params,
                       SyntheticSource(identity_specs(), SynthConfig(seed=99)), 500)
    id_ok = id_eval.aggregate["is_correct_mean"] >= 0.98
    id_elapsed = time.monotonic() - id_started

    total_elapsed = desk_run["train_elapsed"] + id_elapsed
    report("learning signal (non-inferior accuracy, strictly better tree score, "
           "identity >= 0.98 at 100k, < 30 min)",
           non_inferior and better_tree and id_ok and total_elapsed < 1800,
           f"eval acc {ev.aggregate['is_correct_mean']:.4f} vs benchmark "
           f"{bench['is_correct_mean']:.4f}; tree {ev.aggregate['tree_score_mean']:.3f}"
           f" vs {bench['tree_score_mean']:.3f}; identity acc "
           f"{id_eval.aggregate['is_correct_mean']:.4f}; {total_elapsed:.0f}s")


def test_gather_rationality(desk_run):
    steps = desk_run["eval"].steps
    low = [s for s in steps if s.max_confidence < 0.6]
    high = [s for s in steps if s.max_confidence > 0.9]
    freq_low = float(np.mean([s.action_slot == 4 for s in low]))
    freq_high = float(np.mean([s.action_slot == 4 for s in high]))
    n_scen = desk_run["eval"].aggregate["n_scenarios"]
    report("gather rationality (freq below conf 0.6 > freq above 0.9)",
           n_scen >= 1000 and len(low) > 50 and len(high) > 50
           and freq_low > freq_high,
           f"{freq_low:.4f} (n={len(low)}) vs {freq_high:.4f} (n={len(high)}) "
           f"over {n_scen} scenarios")


# ---------------------------------------------------------------------------
# 7. Metrics fidelity
# ---------------------------------------------------------------------------

def test_metrics_fidelity_and_single_engine(tmp_path):
    # hand-constructed groups in the collective-row format
    collective = [
        ScenarioMetrics(-1.0, 0.6, 0.4, 0.2, 5),
        ScenarioMetrics(-1.1302, 0.6668, 0.2602, 0.0084, 5),
    ]
    rows = comparison_table({"All (Collective)": collective,
                             "RL Agent": [ScenarioMetrics(1.4, 0.88, 0.12, 0.0, 5)]})
    text = format_comparison_text(rows)
    header_ok = text.splitlines()[0].split() == ["Agent", "M.T.S", "M.C.A",
                                                 "M.W.A", "M.A.D"]
    format_ok = "-1.0651" in text and "0.6334" in text and "1.4000" in text

    # one engine: service scoring equals offline metrics bit for bit
    records = {}
    for lv in range(1, 6):
        n = level_spec(lv).n_classes
        conf = tuple(1.0 if i == 0 else 0.0 for i in range(n))
        records[lv] = tuple(JudgementRecord(lv, conf, 0, f"a{lv}-{i}")
                            for i in range(60))
    app = create_app(JudgementPool(records), tmp_path / "store")
    engine_ok = True
    with TestClient(app) as client:
        sid = client.post("/sessions", json={"role": "victim"}).json()["session_id"]
        script = [([], 0), ([2], 0), ([1, 1], 1)]   # (#gathers first, answer)
        for scenario, (gathers, answer) in enumerate(script + [([], 0)]):
            while True:
                item = client.get(f"/sessions/{sid}/next").json()
                spec = level_spec(item["level"])
                if gathers and item["credits_remaining"] > 0:
                    gathers.pop()
                    client.post(f"/sessions/{sid}/action",
                                json={"action": spec.n_classes})
                    continue
                act = min(answer, spec.n_classes - 1)
                out = client.post(f"/sessions/{sid}/action",
                                  json={"action": act}).json()
                if out["scenario_done"]:
                    break
        summary = client.post(f"/sessions/{sid}/finish").json()
    events = EventLog(tmp_path / "store").read_all()
    offline = [scenario_metrics(evts) for evts
               in replay_events(events)[sid]["scenarios"]]
    for server_row, local in zip(summary["per_scenario"], offline):
        engine_ok &= (server_row["tree_score"] == local.tree_score
                      and server_row["is_correct"] == local.is_correct
                      and server_row["is_wrong"] == local.is_wrong
                      and server_row["gather_rate"] == local.gather_rate)
    engine_ok &= len(offline) == len(summary["per_scenario"]) == 3

    report("metrics fidelity (row format + single scoring engine)",
           header_ok and format_ok and engine_ok,
           f"rows ok={format_ok}, engine bit-exact over {len(offline)} scenarios")


# ---------------------------------------------------------------------------
# 8. Tuner
# ---------------------------------------------------------------------------

def test_tuner_desk_grid(tmp_path):
    grid = GridSpec(gammas=(0.99,), ent_coefs=(0.01, 0.02), lrs=(5e-4,),
                    n_combos=2, seeds=(0, 1), steps_per_trial=2048,
                    holdout_scenarios=40)
    base = TrainConfig(total_steps=2048)
    specs = default_confusion_specs()
    t1, r1 = run_grid(grid, base, specs, SynthConfig(seed=5))
    t2, r2 = run_grid(grid, base, specs, SynthConfig(seed=5))
    deterministic = ([ (t.combo_id, t.seed, t.mean_reward) for t in t1]
                     == [(t.combo_id, t.seed, t.mean_reward) for t in t2]
                     and r1["winner"] == r2["winner"])
    path = tmp_path / "trials.csv"
    write_trials_csv(path, t1)
    round_trip = read_trials_csv(path) == t1
    report("tuner desk grid (completes, deterministic ranking, csv round-trip)",
           len(t1) == 4 and deterministic and round_trip,
           f"{len(t1)} trials, winner ent_coef={r1['winner']['ent_coef']}")
