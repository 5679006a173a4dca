"""Desk-size version of the two-stage hyperparameter search.

The real stage-2 grid samples 20 of the 48 (gamma, ent_coef, lr) cells
with five seeds each; here we run a 3-combo, 2-seed miniature so the
whole thing finishes in about half a minute.
"""
from scenariolab.a2c import TrainConfig
from scenariolab.judgement import SynthConfig, default_confusion_specs
from scenariolab.tuner import GridSpec, run_grid

grid = GridSpec(n_combos=3, seeds=(0, 1), steps_per_trial=20_000,
                holdout_scenarios=200, combo_seed=1)
print("sampled combos (gamma, ent_coef, lr):")
for combo in grid.sampled_combos():
    print("  ", combo)

base = TrainConfig()
trials, ranking = run_grid(grid, base, default_confusion_specs(),
                           SynthConfig(seed=2))

print("\ntrials:")
for t in trials:
    print(f"  combo {t.combo_id} seed {t.seed}: mean reward "
          f"{t.mean_reward:+.3f} [{t.status}]")

print("\nranking (score = mean episodic reward on the holdout):")
for row in ranking["ranked"]:
    print(f"  gamma={row['gamma']:<6} ent={row['ent_coef']:<5} lr={row['lr']:<7}"
          f" score {row['score']:+.3f}")
print("\nwinner:", ranking["winner"])
