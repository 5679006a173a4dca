"""The metrics suite: per-scenario scores, interval statistics,
smoothing, and the four-column comparison tables.
"""
import numpy as np

from scenariolab import (
    Mode,
    ScenarioEnv,
    SynthConfig,
    SyntheticSource,
    scenario_metrics,
)
from scenariolab.metrics import (
    aggregate_intervals,
    comparison_table,
    format_comparison_text,
    smooth,
)

# play a handful of random scenarios and fold each event log into metrics
source = SyntheticSource(config=SynthConfig(seed=5))
env = ScenarioEnv(source, mode=Mode.CONTINUE_THROUGH)
rng = np.random.default_rng(0)

tagged = []
step = 0
for _ in range(200):
    env.reset()
    done = False
    while not done:
        mask = env.valid_actions()
        done = env.step(int(rng.choice(np.flatnonzero(mask)))).episode_done
        step += 1
    tagged.append((step, scenario_metrics(env.state.events)))

sm = tagged[0][1]
print(f"first scenario: tree={sm.tree_score} correct={sm.is_correct:.2f} "
      f"wrong={sm.is_wrong:.2f} gather={sm.gather_rate:.2f}")

# interval aggregation: mean and population std every 1000 steps
rows = aggregate_intervals(tagged, interval=1000)
print("\nfirst intervals of the metric log:")
for row in rows[:8]:
    print(f"  step {row['step']:>5} {row['metric']:<12} "
          f"mean {row['mean']:+.3f} std {row['std']:.3f}")

# the two smoothing flavours used on the learning curves
series = [m.tree_score for _, m in tagged]
run10 = smooth(series, "running")     # 10% trailing running average
gauss5 = smooth(series, "gaussian")   # 5% Gaussian kernel
print(f"\nraw tree-score mean {np.mean(series):+.3f}; smoothed heads "
      f"{[round(v, 2) for v in run10[:4]]} / {[round(v, 2) for v in gauss5[:4]]}")

# the comparison-table layout used for humans vs the RL agent
groups = {
    "Random play (Collective)": [m for _, m in tagged],
    "RL Agent": [],
}
print("\n" + format_comparison_text(comparison_table(groups)))
print("\n(the RL row reads N/A until a checkpoint evaluation is injected)")
