"""The benchmark agent: always answer the confidence argmax, never gather.

Played in CONTINUE_THROUGH mode (all five levels regardless of
mistakes), its scenario statistics have a closed form, which the
simulation should match within Monte-Carlo error.
"""
from scenariolab import (
    Mode,
    SynthConfig,
    SyntheticSource,
    benchmark_expectations,
    default_confusion_specs,
    run_benchmark,
)

specs = default_confusion_specs()
oracle = benchmark_expectations(specs)
print("analytic expectations under CONTINUE_THROUGH:")
print("  per-level accuracy:", [round(p, 4) for p in oracle["per_level_accuracy"]])
print(f"  tree score: mean {oracle['tree_score_mean']:.4f} "
      f"std {oracle['tree_score_std']:.4f}")
print(f"  is_correct: mean {oracle['is_correct_mean']:.4f}")

source = SyntheticSource(specs, SynthConfig(seed=21))
scenarios, agg = run_benchmark(source, mode=Mode.CONTINUE_THROUGH,
                               n_scenarios=10_000)
print("\nsimulated over 10k scenarios:")
print(f"  tree score: mean {agg['tree_score_mean']:.4f} std {agg['tree_score_std']:.4f}")
print(f"  is_correct: mean {agg['is_correct_mean']:.4f} std {agg['is_correct_std']:.4f}")
print(f"  gathers: {agg['gather_rate_mean']:.4f} (the benchmark never gathers)")

# terminate-on-wrong is much harsher for a pure argmax player
_, tw = run_benchmark(SyntheticSource(specs, SynthConfig(seed=22)),
                      mode=Mode.TERMINATE_ON_WRONG, n_scenarios=10_000)
print(f"\nsame policy, TERMINATE_ON_WRONG: is_correct {tw['is_correct_mean']:.4f}, "
      f"tree score {tw['tree_score_mean']:.4f}")
