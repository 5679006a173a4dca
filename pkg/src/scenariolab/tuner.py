"""Two-stage hyperparameter selection.

Stage 1 fixes the established defaults; stage 2 is a coarse grid over
(gamma, ent_coef, lr) scored by mean episodic reward on a held-out
scenario set, several seeds per combination.  The full product has
4 * 4 * 3 = 48 cells; ``n_combos`` of them are drawn uniformly without
replacement.  Ties rank by lower learning rate, then lower ent_coef.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .a2c import TrainConfig, evaluate, train
from .env import RewardSpec
from .judgement import ConfusionSpec, SynthConfig, SyntheticSource

log = logging.getLogger(__name__)

GAMMA_GRID = (0.95, 0.99, 0.995, 0.999)
ENT_COEF_GRID = (0.0, 0.01, 0.02, 0.05)
LR_GRID = (1e-3, 5e-4, 1e-4)


@dataclass(frozen=True)
class GridSpec:
    gammas: tuple[float, ...] = GAMMA_GRID
    ent_coefs: tuple[float, ...] = ENT_COEF_GRID
    lrs: tuple[float, ...] = LR_GRID
    n_combos: int = 20
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    steps_per_trial: int = 200_000
    holdout_scenarios: int = 500
    combo_seed: int = 0

    def __post_init__(self):
        if self.n_combos > len(self.gammas) * len(self.ent_coefs) * len(self.lrs):
            raise ValueError("n_combos exceeds the grid size")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")

    def all_combos(self) -> list[tuple[float, float, float]]:
        return [(g, e, l) for g in self.gammas for e in self.ent_coefs
                for l in self.lrs]

    def sampled_combos(self) -> list[tuple[float, float, float]]:
        combos = self.all_combos()
        rng = np.random.default_rng(self.combo_seed)
        picked = rng.choice(len(combos), size=self.n_combos, replace=False)
        return [combos[i] for i in sorted(picked)]


@dataclass
class TrialResult:
    combo_id: int
    gamma: float
    ent_coef: float
    lr: float
    seed: int
    mean_reward: float
    status: str = "ok"


def _run_trial(args) -> TrialResult:
    combo_id, gamma, ent_coef, lr, seed, base, specs, synth, steps, holdout = args
    try:
        config = replace(base, gamma=gamma, ent_coef=ent_coef, learning_rate=lr,
                         total_steps=steps, seed=seed)
        source = SyntheticSource(
            specs, SynthConfig(synth.alpha_hit, synth.alpha_miss,
                               synth.seed + 7919 * (combo_id * 100 + seed)))
        result = train(config, source)
        holdout_src = SyntheticSource(
            specs, SynthConfig(synth.alpha_hit, synth.alpha_miss, synth.seed + 104729))
        ev = evaluate(result.params, holdout_src, holdout)
        return TrialResult(combo_id, gamma, ent_coef, lr, seed,
                           ev.aggregate["tree_score_mean"])
    except Exception as exc:  # noqa: BLE001 - a crashed trial must not sink the grid
        log.warning("trial combo=%d seed=%d failed: %s", combo_id, seed, exc)
        return TrialResult(combo_id, gamma, ent_coef, lr, seed,
                           float("nan"), status="failed")


def run_grid(
    grid: GridSpec,
    base: TrainConfig,
    specs: dict[int, ConfusionSpec],
    synth: SynthConfig = SynthConfig(),
    n_jobs: int = 1,
) -> tuple[list[TrialResult], dict]:
    """Train every sampled combo once per seed; returns (trials, ranking).

    The ranking dict holds per-combo mean scores plus the winner config.
    Failed trials are excluded from a combo's score; a combo with no
    surviving trial is excluded from the ranking.
    """
    combos = grid.sampled_combos()
    jobs = []
    for combo_id, (gamma, ent_coef, lr) in enumerate(combos):
        for seed in grid.seeds:
            jobs.append((combo_id, gamma, ent_coef, lr, seed, base, specs,
                         synth, grid.steps_per_trial, grid.holdout_scenarios))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            trials = list(pool.map(_run_trial, jobs))
    else:
        trials = [_run_trial(job) for job in jobs]
    trials.sort(key=lambda t: (t.combo_id, t.seed))

    scores = {}
    for combo_id, (gamma, ent_coef, lr) in enumerate(combos):
        vals = [t.mean_reward for t in trials
                if t.combo_id == combo_id and t.status == "ok"]
        if not vals:
            log.warning("combo %d has no surviving trials", combo_id)
            continue
        scores[combo_id] = {"combo_id": combo_id, "gamma": gamma,
                            "ent_coef": ent_coef, "lr": lr,
                            "score": float(np.mean(vals)), "n_ok": len(vals)}
    if not scores:
        raise RuntimeError("every trial failed")
    ranked = sorted(scores.values(),
                    key=lambda s: (-s["score"], s["lr"], s["ent_coef"]))
    winner = ranked[0]
    ranking = {
        "ranked": ranked,
        "winner": {
            "gamma": winner["gamma"],
            "ent_coef": winner["ent_coef"],
            "learning_rate": winner["lr"],
            "score": winner["score"],
        },
    }
    return trials, ranking


TRIAL_COLUMNS = ("combo_id", "gamma", "ent_coef", "lr", "seed",
                 "mean_reward", "status")


def write_trials_csv(path, trials: list[TrialResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIAL_COLUMNS)
        for t in trials:
            writer.writerow((t.combo_id, repr(t.gamma), repr(t.ent_coef),
                             repr(t.lr), t.seed, repr(t.mean_reward), t.status))


def read_trials_csv(path) -> list[TrialResult]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [TrialResult(int(r["combo_id"]), float(r["gamma"]),
                            float(r["ent_coef"]), float(r["lr"]),
                            int(r["seed"]), float(r["mean_reward"]),
                            r["status"])
                for r in reader]
