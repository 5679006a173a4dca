"""Non-learning decision-maker baselines.

The benchmark agent answers every level with the argmax of the enabler
confidence vector and never gathers.  Because the synthetic stream's
argmax equals its sampled prediction by construction, the benchmark's
per-level accuracy equals the stream's top-1 accuracy exactly, which
makes its scenario statistics available in closed form
(``benchmark_expectations``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .env import Mode, RewardSpec, ScenarioEnv
from .judgement import ConfusionSpec, JudgementRecord, SourceExhausted
from .levels import N_LEVELS
from .metrics import ScenarioMetrics, scenario_metrics, summarize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkPolicy:
    """Deterministic argmax policy; ties break to the lowest index."""

    def act(self, record_or_confidences) -> int:
        return benchmark_act(record_or_confidences)


def benchmark_act(record_or_confidences) -> int:
    """Canonical action slot for the confidence argmax (never gather)."""
    if isinstance(record_or_confidences, JudgementRecord):
        conf = record_or_confidences.confidences
    else:
        conf = record_or_confidences
    conf = np.asarray(conf, dtype=np.float64)
    if conf.size == 0:
        raise ValueError("empty confidence vector")
    return int(np.argmax(conf))


def run_benchmark(
    source,
    mode: Mode = Mode.CONTINUE_THROUGH,
    n_scenarios: int = 1000,
    reward_spec: RewardSpec = RewardSpec(),
) -> tuple[list[ScenarioMetrics], dict]:
    """Play n scenarios with the argmax policy; returns (per-scenario, aggregate).

    A scenario cut short by source exhaustion is discarded with a warning.
    """
    env = ScenarioEnv(source, mode=mode, reward_spec=reward_spec)
    per_scenario: list[ScenarioMetrics] = []
    for _ in range(n_scenarios):
        try:
            env.reset()
            done = False
            while not done:
                slot = benchmark_act(env.state.current_record)
                done = env.step(slot).episode_done
        except SourceExhausted:
            log.warning("source exhausted mid-scenario; scenario discarded")
            break
        per_scenario.append(scenario_metrics(env.state.events, reward_spec))
    return per_scenario, summarize(per_scenario)


def benchmark_expectations(
    specs: dict[int, ConfusionSpec],
    reward_spec: RewardSpec = RewardSpec(),
) -> dict:
    """Closed-form benchmark statistics under CONTINUE_THROUGH.

    Per level the argmax answer is correct with probability
    p = sum_i prior_i * recall_i, independently across levels, so the
    tree score is a sum of independent two-point variables and
    is_correct is their indicator mean.
    """
    ps = [specs[lv].top1_accuracy() for lv in range(1, N_LEVELS + 1)]
    rc, rw = reward_spec.correct, reward_spec.wrong
    mean_tree = sum(p * rc + (1 - p) * rw for p in ps)
    var_tree = sum((rc - rw) ** 2 * p * (1 - p) for p in ps)
    mean_correct = sum(ps) / N_LEVELS
    var_correct = sum(p * (1 - p) for p in ps) / N_LEVELS**2
    return {
        "per_level_accuracy": ps,
        "tree_score_mean": mean_tree,
        "tree_score_std": math.sqrt(var_tree),
        "is_correct_mean": mean_correct,
        "is_correct_std": math.sqrt(var_correct),
    }
