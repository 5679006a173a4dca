"""scenariolab: structured decision-making over five-level disaster scenarios.

The package bundles the scenario MDP (``env``), calibrated judgement
sources (``judgement``), the benchmark argmax agent (``agents``), a
from-scratch A2C decision maker (``a2c``), the metrics suite
(``metrics``), a two-stage hyperparameter tuner (``tuner``), a survey
backend for human operators (``service``), and a CLI tying it together
(``cli``).
"""
from .agents import BenchmarkPolicy, benchmark_act, benchmark_expectations, run_benchmark
from .env import (
    DecisionEvent,
    EnvState,
    EpisodeFinished,
    Event,
    InvalidAction,
    Mode,
    ObservationConfig,
    RewardSpec,
    ScenarioEnv,
    StepOutcome,
    encode_observation,
    valid_actions,
)
from .judgement import (
    ConfusionSpec,
    JudgementPool,
    JudgementRecord,
    PoolSampler,
    SourceExhausted,
    SynthConfig,
    SyntheticSource,
    calibration_report,
    classification_metrics,
    default_confusion_specs,
    derive_confusion,
    load_confusion_specs,
    load_dataset,
    save_confusion_specs,
    save_dataset,
)
from .levels import GATHER_SLOT, LEVELS, N_LEVELS, N_SLOTS, LevelSpec, level_spec
from .metrics import (
    ScenarioMetrics,
    aggregate_intervals,
    comparison_csv,
    comparison_table,
    format_comparison_text,
    scenario_metrics,
    smooth,
    summarize,
)

__version__ = "0.1.0"
