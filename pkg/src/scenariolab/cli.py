"""Command line entry point.

Subcommands: synth, benchmark, train, eval, gridsearch, report, serve.
Each accepts --config FILE (JSON, keys matching the flag names); flags
override file values, and the effective configuration is echoed into
the output directory for reproducibility.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .a2c import TrainConfig, evaluate, load_checkpoint, save_checkpoint, train
from .agents import benchmark_expectations, run_benchmark
from .env import Mode, RewardSpec
from .judgement import (
    JudgementPool,
    SynthConfig,
    SyntheticSource,
    calibration_report,
    default_confusion_specs,
    format_calibration_report,
    load_confusion_specs,
    load_dataset,
    save_dataset,
)
from .metrics import comparison_csv, format_comparison_text, write_metric_csv
from .service import build_comparison, create_app
from .service.store import EventLog
from .tuner import GridSpec, run_grid, write_trials_csv

log = logging.getLogger(__name__)

MODES = {"continue": Mode.CONTINUE_THROUGH, "terminate": Mode.TERMINATE_ON_WRONG}


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _effective(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults <- config file <- explicit flags."""
    file_cfg = _load_config_file(args.config)
    merged = dict(defaults)
    for key, value in file_cfg.items():
        if key not in defaults:
            raise SystemExit(f"unknown config key {key!r}")
        merged[key] = value
    for key in defaults:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


def _prepare_out(args, subcommand: str, effective: dict) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    echo = {"subcommand": subcommand, **effective}
    (out / "effective_config.json").write_text(json.dumps(echo, indent=2))
    return out


def _build_specs(cfg: dict):
    if cfg.get("spec_file"):
        return load_confusion_specs(cfg["spec_file"])
    return default_confusion_specs()


def _build_source(cfg: dict, seed_shift: int = 0):
    """A judgement source from either recorded files or the synthesizer."""
    if cfg.get("source"):
        pool = load_dataset(cfg["source"], split=cfg.get("split"))
        return pool.sampler(seed=cfg["seed"] + seed_shift, recycle=True)
    specs = _build_specs(cfg)
    synth = SynthConfig(cfg["alpha_hit"], cfg["alpha_miss"],
                        cfg["seed"] + seed_shift)
    return SyntheticSource(specs, synth)


SOURCE_DEFAULTS = {"source": None, "split": None, "spec_file": None,
                   "alpha_hit": 8.0, "alpha_miss": 1.0, "seed": 0}


def _add_source_flags(p: argparse.ArgumentParser):
    p.add_argument("--source", nargs="+", help="judgement JSONL file(s); "
                   "omit to use the calibrated synthesizer")
    p.add_argument("--split", choices=("train", "val"))
    p.add_argument("--spec-file", dest="spec_file",
                   help="confusion-spec JSON overriding the built-in calibration")
    p.add_argument("--alpha-hit", dest="alpha_hit", type=float)
    p.add_argument("--alpha-miss", dest="alpha_miss", type=float)
    p.add_argument("--seed", type=int)


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

SYNTH_DEFAULTS = {**SOURCE_DEFAULTS, "levels": "all", "n": 10_000,
                  "split": "val", "calibration_n": 100_000}


def cmd_synth(args) -> int:
    cfg = _effective(args, SYNTH_DEFAULTS)
    out = _prepare_out(args, "synth", cfg)
    levels = (range(1, 6) if cfg["levels"] == "all"
              else [int(x) for x in str(cfg["levels"]).split(",")])
    specs = _build_specs(cfg)
    source = SyntheticSource(specs, SynthConfig(cfg["alpha_hit"],
                                                cfg["alpha_miss"], cfg["seed"]),
                             split=cfg["split"])
    report_lines = []
    for lv in levels:
        records = source.sample_batch(lv, cfg["n"])
        path = out / f"level{lv}.jsonl"
        save_dataset(path, records)
        print(f"wrote {len(records)} records -> {path}")
        rep = calibration_report(source, specs[lv], cfg["calibration_n"])
        report_lines.append(format_calibration_report(rep))
    combined = out / "all.jsonl"
    with open(combined, "w", encoding="utf-8") as fh:
        for lv in levels:
            fh.write((out / f"level{lv}.jsonl").read_text())
    (out / "calibration_report.txt").write_text("\n\n".join(report_lines) + "\n")
    print(f"calibration report -> {out / 'calibration_report.txt'}")
    return 0


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

BENCHMARK_DEFAULTS = {**SOURCE_DEFAULTS, "episodes": 1000, "mode": "continue"}


def cmd_benchmark(args) -> int:
    cfg = _effective(args, BENCHMARK_DEFAULTS)
    out = _prepare_out(args, "benchmark", cfg)
    source = _build_source(cfg)
    scenarios, agg = run_benchmark(source, mode=MODES[cfg["mode"]],
                                   n_scenarios=cfg["episodes"])
    with open(out / "per_scenario.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("tree_score", "is_correct", "is_wrong", "gather_rate",
                         "levels_attempted"))
        for m in scenarios:
            writer.writerow((repr(m.tree_score), repr(m.is_correct),
                             repr(m.is_wrong), repr(m.gather_rate),
                             m.levels_attempted))
    rows = [{"step": 0, "metric": k[: -len("_mean")], "mean": v,
             "std": agg[k.replace("_mean", "_std")]}
            for k, v in agg.items() if k.endswith("_mean")]
    write_metric_csv(out / "aggregate.csv", rows)
    print(json.dumps({k: round(v, 6) for k, v in agg.items()}, indent=2))
    if not cfg.get("source"):
        oracle = benchmark_expectations(_build_specs(cfg))
        (out / "analytic_oracle.json").write_text(json.dumps(oracle, indent=2))
        print("analytic oracle:", json.dumps(
            {k: round(v, 4) for k, v in oracle.items() if isinstance(v, float)}))
    return 0


# ---------------------------------------------------------------------------
# train / eval
# ---------------------------------------------------------------------------

TRAIN_DEFAULTS = {
    **SOURCE_DEFAULTS,
    "gamma": 0.995, "n_steps": 128, "ent_coef": 0.02, "vf_coef": 0.5,
    "max_grad_norm": 1.0, "learning_rate": 5e-4, "adam_epsilon": 1e-7,
    "gae_lambda": 1.0, "total_steps": 2_000_000, "eval_interval": 1000,
    "n_envs": 1, "advantage_normalization": False, "include_credit": False,
    "mode": "terminate", "early_stop": False, "eval_source": None,
    "eval_episodes": 32,
}


def _train_config(cfg: dict) -> TrainConfig:
    keys = ("gamma", "n_steps", "ent_coef", "vf_coef", "max_grad_norm",
            "learning_rate", "adam_epsilon", "gae_lambda", "total_steps",
            "eval_interval", "n_envs", "advantage_normalization", "seed",
            "include_credit")
    return TrainConfig(**{k: cfg[k] for k in keys})


def cmd_train(args) -> int:
    cfg = _effective(args, TRAIN_DEFAULTS)
    out = _prepare_out(args, "train", cfg)
    config = _train_config(cfg)
    source = _build_source(cfg)
    eval_source = None
    if cfg["eval_source"]:
        eval_source = load_dataset(cfg["eval_source"]).sampler(
            seed=config.seed + 9999, recycle=True)
    stop_targets = None
    if cfg["early_stop"]:
        if cfg.get("source"):
            _, bench = run_benchmark(_build_source(cfg, seed_shift=51), n_scenarios=2000)
            stop_targets = {"is_correct_mean": bench["is_correct_mean"],
                            "tree_score_mean": bench["tree_score_mean"]}
        else:
            oracle = benchmark_expectations(_build_specs(cfg))
            stop_targets = {"is_correct_mean": oracle["is_correct_mean"],
                            "tree_score_mean": oracle["tree_score_mean"]}
        print("early-stop targets:", stop_targets)
    result = train(config, source, mode=MODES[cfg["mode"]],
                   eval_source=eval_source, eval_episodes=cfg["eval_episodes"],
                   stop_targets=stop_targets)
    ckpt = out / "checkpoint.json"
    save_checkpoint(ckpt, result.params, config,
                    extra={"global_step": result.global_step,
                           "episodes": result.episodes,
                           "stopped_early": result.stopped_early})
    write_metric_csv(out / "metrics.csv", result.metric_rows)
    print(f"trained {result.global_step} steps over {result.episodes} episodes"
          f"{' (early stop)' if result.stopped_early else ''}")
    print(f"checkpoint -> {ckpt}")
    return 0


EVAL_DEFAULTS = {**SOURCE_DEFAULTS, "episodes": 1000, "mode": "terminate",
                 "stochastic": False}


def cmd_eval(args) -> int:
    cfg = _effective(args, EVAL_DEFAULTS)
    out = _prepare_out(args, "eval", cfg)
    params, train_cfg, extra = load_checkpoint(args.checkpoint)
    source = _build_source(cfg, seed_shift=31)
    result = evaluate(params, source, cfg["episodes"], mode=MODES[cfg["mode"]],
                      deterministic=not cfg["stochastic"], seed=cfg["seed"],
                      trace=True)
    agg = result.aggregate
    rows = [{"step": extra.get("global_step", 0), "metric": k[: -len("_mean")],
             "mean": v, "std": agg[k.replace("_mean", "_std")]}
            for k, v in agg.items() if k.endswith("_mean")]
    write_metric_csv(out / "eval_metrics.csv", rows)
    summary = {
        "aggregate": agg,
        "n_steps_traced": len(result.steps),
        "M.T.S": agg["tree_score_mean"], "M.C.A": agg["is_correct_mean"],
        "M.W.A": agg["is_wrong_mean"], "M.A.D": agg["gather_rate_mean"],
        "n_scenarios": agg["n_scenarios"],
    }
    (out / "eval_summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps({k: round(v, 6) for k, v in agg.items()}, indent=2))
    return 0


# ---------------------------------------------------------------------------
# gridsearch
# ---------------------------------------------------------------------------

GRID_DEFAULTS = {
    **SOURCE_DEFAULTS,
    "n_combos": 20, "seeds_per_combo": 5, "steps_per_trial": 200_000,
    "holdout_scenarios": 500, "combo_seed": 0, "n_jobs": 1,
}


def cmd_gridsearch(args) -> int:
    cfg = _effective(args, GRID_DEFAULTS)
    out = _prepare_out(args, "gridsearch", cfg)
    grid = GridSpec(n_combos=cfg["n_combos"],
                    seeds=tuple(range(cfg["seeds_per_combo"])),
                    steps_per_trial=cfg["steps_per_trial"],
                    holdout_scenarios=cfg["holdout_scenarios"],
                    combo_seed=cfg["combo_seed"])
    base = TrainConfig(seed=cfg["seed"])
    synth = SynthConfig(cfg["alpha_hit"], cfg["alpha_miss"], cfg["seed"])
    trials, ranking = run_grid(grid, base, _build_specs(cfg), synth,
                               n_jobs=cfg["n_jobs"])
    write_trials_csv(out / "trials.csv", trials)
    (out / "winner.json").write_text(json.dumps(ranking, indent=2))
    print("winner:", json.dumps(ranking["winner"]))
    print(f"trial table -> {out / 'trials.csv'}")
    return 0


# ---------------------------------------------------------------------------
# report / serve
# ---------------------------------------------------------------------------

REPORT_DEFAULTS = {"store": None, "rl_eval": None, "role": None}


def _rl_baseline_from(path) -> dict | None:
    if path is None:
        return None
    doc = json.loads(Path(path).read_text())
    if "M.T.S" in doc:
        return doc
    agg = doc["aggregate"]
    return {"M.T.S": agg["tree_score_mean"], "M.C.A": agg["is_correct_mean"],
            "M.W.A": agg["is_wrong_mean"], "M.A.D": agg["gather_rate_mean"],
            "n_scenarios": agg.get("n_scenarios", 0)}


def cmd_report(args) -> int:
    cfg = _effective(args, REPORT_DEFAULTS)
    if not cfg["store"]:
        raise SystemExit("report needs --store pointing at a session store")
    out = _prepare_out(args, "report", cfg)
    events = EventLog(cfg["store"]).read_all()
    report = build_comparison(events, rl_baseline=_rl_baseline_from(cfg["rl_eval"]),
                              role=cfg["role"])
    text = format_comparison_text(report["rows"]) if report["rows"] else "no finished sessions"
    (out / "comparison.txt").write_text(text + "\n")
    (out / "comparison.csv").write_text(comparison_csv(report["rows"]))
    print(text)
    return 0


SERVE_DEFAULTS = {**SOURCE_DEFAULTS, "store": "operator_store", "host": "127.0.0.1",
                  "port": 8000, "rl_eval": None, "static_dir": None}


def cmd_serve(args) -> int:
    import uvicorn

    cfg = _effective(args, SERVE_DEFAULTS)
    out = _prepare_out(args, "serve", cfg)
    if cfg.get("source"):
        pool = load_dataset(cfg["source"], split=cfg.get("split"))
    else:
        # no recorded judgements: synthesize a small validation pool
        source = SyntheticSource(_build_specs(cfg),
                                 SynthConfig(cfg["alpha_hit"], cfg["alpha_miss"],
                                             cfg["seed"]))
        pool = JudgementPool({lv: tuple(source.sample_batch(lv, 500))
                              for lv in range(1, 6)})
    app = create_app(pool, cfg["store"], rl_baseline=_rl_baseline_from(cfg["rl_eval"]),
                     static_dir=cfg["static_dir"], seed=cfg["seed"])
    print(f"serving on http://{cfg['host']}:{cfg['port']} "
          f"(store: {cfg['store']}, pool: {pool.sizes()})")
    uvicorn.run(app, host=cfg["host"], port=cfg["port"], log_level="warning")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenariolab")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="write calibrated synthetic judgement files")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--levels")
    p.add_argument("--n", type=int)
    p.add_argument("--calibration-n", dest="calibration_n", type=int)
    _add_source_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("benchmark", help="run the argmax benchmark agent")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--episodes", type=int)
    p.add_argument("--mode", choices=tuple(MODES))
    _add_source_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("train", help="train the A2C decision maker")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    for flag, typ in (("gamma", float), ("n-steps", int), ("ent-coef", float),
                      ("vf-coef", float), ("max-grad-norm", float),
                      ("learning-rate", float), ("adam-epsilon", float),
                      ("gae-lambda", float), ("total-steps", int),
                      ("eval-interval", int), ("n-envs", int),
                      ("eval-episodes", int)):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=typ)
    p.add_argument("--advantage-normalization", dest="advantage_normalization",
                   action="store_const", const=True)
    p.add_argument("--include-credit", dest="include_credit",
                   action="store_const", const=True)
    p.add_argument("--mode", choices=tuple(MODES))
    p.add_argument("--early-stop", dest="early_stop",
                   action="store_const", const=True)
    p.add_argument("--eval-source", dest="eval_source", nargs="+")
    _add_source_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--episodes", type=int)
    p.add_argument("--mode", choices=tuple(MODES))
    p.add_argument("--stochastic", action="store_const", const=True)
    _add_source_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gridsearch", help="two-stage hyperparameter grid search")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--n-combos", dest="n_combos", type=int)
    p.add_argument("--seeds-per-combo", dest="seeds_per_combo", type=int)
    p.add_argument("--steps-per-trial", dest="steps_per_trial", type=int)
    p.add_argument("--holdout-scenarios", dest="holdout_scenarios", type=int)
    p.add_argument("--combo-seed", dest="combo_seed", type=int)
    p.add_argument("--n-jobs", dest="n_jobs", type=int)
    _add_source_flags(p)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("report", help="human-vs-RL comparison tables")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--store")
    p.add_argument("--rl-eval", dest="rl_eval")
    p.add_argument("--role", choices=("stakeholder", "volunteer", "victim"))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the operator survey service")
    p.add_argument("--out", default="serve_out")
    p.add_argument("--config")
    p.add_argument("--store")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--rl-eval", dest="rl_eval")
    p.add_argument("--static-dir", dest="static_dir")
    _add_source_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
