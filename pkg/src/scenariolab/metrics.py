"""Scenario- and run-level metrics, interval aggregation, smoothing.

All functions are pure; the operator service and the offline tools call
the same code so their numbers agree bit for bit.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .env import DecisionEvent, Event, RewardSpec


@dataclass(frozen=True)
class ScenarioMetrics:
    tree_score: float
    is_correct: float
    is_wrong: float
    gather_rate: float
    levels_attempted: int


def scenario_metrics(events: Sequence[DecisionEvent],
                     reward_spec: RewardSpec = RewardSpec()) -> ScenarioMetrics:
    """Fold one scenario's event log into its metrics.

    Fractions are over the levels at which a classification decision was
    made; gather_rate is the fraction of those levels with at least one
    gather.  tree_score is the plain reward sum.
    """
    if not events:
        raise ValueError("empty event log")
    corrects = sum(1 for e in events if e.event is Event.CORRECT)
    wrongs = sum(1 for e in events if e.event is Event.WRONG)
    gathers = sum(1 for e in events if e.event is Event.GATHERED)
    decided_levels = {e.level for e in events
                      if e.event in (Event.CORRECT, Event.WRONG)}
    gathered_levels = {e.level for e in events if e.event is Event.GATHERED}
    attempted = len(decided_levels)
    tree_score = (corrects * reward_spec.correct + wrongs * reward_spec.wrong
                  + gathers * reward_spec.gather)
    if attempted == 0:
        return ScenarioMetrics(tree_score, 0.0, 0.0, 0.0, 0)
    return ScenarioMetrics(
        tree_score=tree_score,
        is_correct=corrects / attempted,
        is_wrong=wrongs / attempted,
        gather_rate=len(gathered_levels & decided_levels) / attempted,
        levels_attempted=attempted,
    )


METRIC_NAMES = ("tree_score", "is_correct", "is_wrong", "gather_rate")


def aggregate_intervals(tagged: Iterable[tuple[int, ScenarioMetrics]],
                        interval: int = 1000) -> list[dict]:
    """Per-interval mean and population std for each metric.

    ``tagged`` yields (step, metrics) with monotone steps.  Returns rows
    {step, metric, mean, std} where step is the interval start; empty
    intervals emit nothing.
    """
    buckets: dict[int, list[ScenarioMetrics]] = {}
    last_step = None
    for step, sm in tagged:
        if last_step is not None and step < last_step:
            raise ValueError("step tags must be monotone")
        last_step = step
        buckets.setdefault(step // interval, []).append(sm)
    rows = []
    for idx in sorted(buckets):
        group = buckets[idx]
        for name in METRIC_NAMES:
            vals = np.array([getattr(sm, name) for sm in group], dtype=np.float64)
            rows.append({
                "step": idx * interval,
                "metric": name,
                "mean": float(vals.mean()),
                "std": float(vals.std()),  # population std
            })
    return rows


def smooth(series: Sequence[float], kind: str = "running") -> np.ndarray:
    """10% trailing running average or 5% Gaussian smoothing."""
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty series")
    if kind == "running":
        window = math.ceil(0.10 * x.size)
        out = np.empty_like(x)
        csum = np.concatenate(([0.0], np.cumsum(x)))
        for i in range(x.size):
            lo = max(0, i - window + 1)
            out[i] = (csum[i + 1] - csum[lo]) / (i + 1 - lo)
        return out
    if kind == "gaussian":
        sigma = 0.05 * x.size
        radius = math.ceil(3 * sigma)
        offsets = np.arange(-radius, radius + 1)
        kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
        out = np.empty_like(x)
        for i in range(x.size):
            lo = max(0, i - radius)
            hi = min(x.size - 1, i + radius)
            k = kernel[(lo - i) + radius: (hi - i) + radius + 1]
            out[i] = np.dot(k, x[lo: hi + 1]) / k.sum()
        return out
    raise ValueError(f"unknown smoothing kind {kind!r}")


# ---------------------------------------------------------------------------
# Comparison reports (agent/participant groups side by side)
# ---------------------------------------------------------------------------

COMPARISON_COLUMNS = ("M.T.S", "M.C.A", "M.W.A", "M.A.D")


def comparison_table(groups: Mapping[str, Sequence[ScenarioMetrics]]) -> list[dict]:
    """One row per group: mean tree score, correct/wrong/gather means."""
    if not groups:
        raise ValueError("need at least one group")
    rows = []
    for name, metrics in groups.items():
        if len(metrics) == 0:
            rows.append({"agent": name, "n_scenarios": 0,
                         "M.T.S": None, "M.C.A": None, "M.W.A": None, "M.A.D": None})
            continue
        rows.append({
            "agent": name,
            "n_scenarios": len(metrics),
            "M.T.S": float(np.mean([m.tree_score for m in metrics])),
            "M.C.A": float(np.mean([m.is_correct for m in metrics])),
            "M.W.A": float(np.mean([m.is_wrong for m in metrics])),
            "M.A.D": float(np.mean([m.gather_rate for m in metrics])),
        })
    return rows


def _fmt(value) -> str:
    return "N/A" if value is None else f"{value:.4f}"


def format_comparison_text(rows: Sequence[dict]) -> str:
    width = max([len("Agent")] + [len(r["agent"]) for r in rows])
    header = f"{'Agent':<{width}} " + " ".join(f"{c:>9}" for c in COMPARISON_COLUMNS)
    lines = [header, "-" * len(header)]
    for r in rows:
        cells = " ".join(f"{_fmt(r[c]):>9}" for c in COMPARISON_COLUMNS)
        lines.append(f"{r['agent']:<{width}} {cells}")
    return "\n".join(lines)


def comparison_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("agent", "n_scenarios") + COMPARISON_COLUMNS)
    for r in rows:
        writer.writerow([r["agent"], r["n_scenarios"]] +
                        [_fmt(r[c]) for c in COMPARISON_COLUMNS])
    return buf.getvalue()


def write_metric_csv(path, rows: Iterable[dict]) -> None:
    """Write (step, metric, mean, std) rows in the metric-log format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("step", "metric", "mean", "std"))
        for row in rows:
            writer.writerow((row["step"], row["metric"],
                             repr(row["mean"]), repr(row["std"])))


def read_metric_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [{"step": int(r["step"]), "metric": r["metric"],
                 "mean": float(r["mean"]), "std": float(r["std"])}
                for r in reader]


def summarize(metrics: Sequence[ScenarioMetrics]) -> dict:
    """Aggregate mean/std per metric over a batch of scenarios."""
    out: dict[str, float] = {"n_scenarios": len(metrics)}
    for name in METRIC_NAMES:
        vals = np.array([getattr(m, name) for m in metrics], dtype=np.float64)
        out[f"{name}_mean"] = float(vals.mean()) if len(metrics) else float("nan")
        out[f"{name}_std"] = float(vals.std()) if len(metrics) else float("nan")
    return out
