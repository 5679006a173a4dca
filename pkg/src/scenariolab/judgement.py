"""Judgement record supply.

Two interchangeable sources feed the scenario environment with enabler
judgements (confidence vector + ground truth):

* ``JudgementPool`` / ``PoolSampler`` -- recorded enabler outputs loaded
  from a JSON-lines file, drawn without replacement within an epoch.
* ``SyntheticSource`` -- an infinite stream calibrated to the per-class
  recall/support statistics of the five pretrained enabler classifiers,
  so per-class recalls and implied precisions of the stream converge to
  the published validation numbers.

The synthetic generator draws a ground truth from the class priors, a
predicted class from the corresponding confusion-matrix row, and then a
confidence vector from a Dirichlet whose concentration is ``alpha_hit``
on the predicted class and ``alpha_miss`` elsewhere.  When the sampled
prediction is wrong the concentration is also raised on the true class:
a confused classifier splits its mass between the two candidates, so
wrong predictions come with visibly flatter confidence vectors.  The
final vector is rearranged so its argmax always lands on the predicted
class.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .levels import LEVELS, MAX_CLASSES, level_spec

SPLITS = ("train", "val")


class SourceExhausted(RuntimeError):
    """A record pool has no unused record left for the requested level."""


@dataclass(frozen=True)
class JudgementRecord:
    """One enabler inference: what the classifier saw and said."""

    level_id: int
    confidences: tuple[float, ...]
    ground_truth: int
    record_id: str
    split: str = "val"
    text: str | None = None
    image_uri: str | None = None

    def __post_init__(self):
        spec = level_spec(self.level_id)
        if len(self.confidences) != spec.n_classes:
            raise ValueError(
                f"level {self.level_id} expects {spec.n_classes} confidences, "
                f"got {len(self.confidences)}"
            )
        if not 0 <= self.ground_truth < spec.n_classes:
            raise ValueError(f"ground_truth {self.ground_truth} out of range")
        if any(c < 0.0 or c > 1.0 for c in self.confidences):
            raise ValueError("confidences must lie in [0, 1]")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}")

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.confidences))

    @property
    def max_confidence(self) -> float:
        return float(max(self.confidences))

    def to_json(self) -> str:
        doc = {
            "level": self.level_id,
            "record_id": self.record_id,
            "confidences": [round(float(c), 6) for c in self.confidences],
            "label": self.ground_truth,
            "split": self.split,
        }
        if self.text is not None:
            doc["text"] = self.text
        if self.image_uri is not None:
            doc["image_uri"] = self.image_uri
        return json.dumps(doc)

    @staticmethod
    def from_json(line: str) -> "JudgementRecord":
        doc = json.loads(line)
        return JudgementRecord(
            level_id=int(doc["level"]),
            confidences=tuple(float(c) for c in doc["confidences"]),
            ground_truth=int(doc["label"]),
            record_id=str(doc["record_id"]),
            split=doc.get("split", "val"),
            text=doc.get("text"),
            image_uri=doc.get("image_uri"),
        )


# ---------------------------------------------------------------------------
# Calibration targets: validation metrics of the five enabler classifiers.
# recalls/precisions/supports are per class, in class-label order.
# ---------------------------------------------------------------------------

ENABLER_METRICS: dict[int, dict[str, tuple[float, ...]]] = {
    1: {
        "recalls": (0.7730, 0.8731),
        "precisions": (0.8665, 0.7832),
        "supports": (1855, 1742),
    },
    2: {
        "recalls": (0.5109, 0.8930, 0.8814, 0.6906),
        "precisions": (0.4667, 0.8486, 0.9158, 0.7476),
        "supports": (137, 766, 506, 446),
    },
    3: {
        "recalls": (0.7148, 0.7652),
        "precisions": (0.6438, 0.8188),
        "supports": (263, 443),
    },
    4: {
        "recalls": (1.0000, 0.9938),
        "precisions": (1.0000, 0.9985),
        "supports": (29856, 12355),
    },
    5: {
        "recalls": (0.7244, 0.4724),
        "precisions": (0.7475, 0.7176),
        "supports": (1974, 1232),
    },
}


@dataclass(frozen=True)
class ConfusionSpec:
    """Row-stochastic error model for one level's enabler."""

    level_id: int
    priors: tuple[float, ...]
    recalls: tuple[float, ...]
    confusion: tuple[tuple[float, ...], ...]
    precisions: tuple[float, ...] | None = None  # consistency targets only

    def __post_init__(self):
        n = level_spec(self.level_id).n_classes
        if not (len(self.priors) == len(self.recalls) == len(self.confusion) == n):
            raise ValueError(f"level {self.level_id} spec needs {n} classes")
        if abs(sum(self.priors) - 1.0) > 1e-9:
            raise ValueError("priors must sum to 1")
        for i, row in enumerate(self.confusion):
            if abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(f"confusion row {i} must sum to 1")
            if abs(row[i] - self.recalls[i]) > 1e-12:
                raise ValueError(f"confusion diagonal {i} must equal recall")

    @property
    def n_classes(self) -> int:
        return len(self.priors)

    def predicted_marginals(self) -> np.ndarray:
        """P(predicted = j) under priors and confusion."""
        return np.asarray(self.priors) @ np.asarray(self.confusion)

    def implied_precisions(self) -> np.ndarray:
        """Per-class precision implied by priors and confusion."""
        joint = np.asarray(self.priors)[:, None] * np.asarray(self.confusion)
        marginals = joint.sum(axis=0)
        return np.diag(joint) / marginals

    def top1_accuracy(self) -> float:
        """P(predicted = ground truth) for an argmax consumer."""
        return float(np.dot(self.priors, self.recalls))

    def to_dict(self) -> dict:
        doc = {
            "level": self.level_id,
            "priors": list(self.priors),
            "recalls": list(self.recalls),
            "confusion": [list(row) for row in self.confusion],
        }
        if self.precisions is not None:
            doc["precisions"] = list(self.precisions)
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "ConfusionSpec":
        return ConfusionSpec(
            level_id=int(doc["level"]),
            priors=tuple(doc["priors"]),
            recalls=tuple(doc["recalls"]),
            confusion=tuple(tuple(row) for row in doc["confusion"]),
            precisions=tuple(doc["precisions"]) if "precisions" in doc else None,
        )


def derive_confusion(
    level_id: int,
    recalls: Sequence[float],
    supports: Sequence[int],
    precisions: Sequence[float] | None = None,
) -> ConfusionSpec:
    """Build a ConfusionSpec from per-class recall and support counts.

    The diagonal is the recall.  Each row's remaining mass (1 - recall)
    is split across the other classes proportionally to their priors;
    for binary levels this is forced.  The published precisions, when
    given, are kept for consistency reporting only -- the implied
    precisions of the returned spec are what the synthetic stream can
    actually reproduce.
    """
    recalls = tuple(float(r) for r in recalls)
    supports = tuple(int(s) for s in supports)
    if any(s <= 0 for s in supports):
        raise ValueError("supports must be positive")
    if any(r < 0.0 or r > 1.0 for r in recalls):
        raise ValueError("recalls must lie in [0, 1]")
    total = sum(supports)
    priors = tuple(s / total for s in supports)
    n = len(recalls)
    confusion = []
    for i in range(n):
        row = [0.0] * n
        row[i] = recalls[i]
        off_mass = 1.0 - recalls[i]
        other = sum(priors[j] for j in range(n) if j != i)
        for j in range(n):
            if j != i:
                row[j] = off_mass * priors[j] / other
        confusion.append(tuple(row))
    return ConfusionSpec(
        level_id=level_id,
        priors=priors,
        recalls=recalls,
        confusion=tuple(confusion),
        precisions=tuple(float(p) for p in precisions) if precisions is not None else None,
    )


def default_confusion_specs() -> dict[int, ConfusionSpec]:
    """Calibration specs for all five levels from the enabler metrics."""
    return {
        lv: derive_confusion(lv, m["recalls"], m["supports"], m["precisions"])
        for lv, m in ENABLER_METRICS.items()
    }


def save_confusion_specs(path, specs: dict[int, ConfusionSpec]) -> None:
    doc = {"levels": [specs[lv].to_dict() for lv in sorted(specs)]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_confusion_specs(path) -> dict[int, ConfusionSpec]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    specs = [ConfusionSpec.from_dict(d) for d in doc["levels"]]
    return {spec.level_id: spec for spec in specs}


# ---------------------------------------------------------------------------
# Synthetic stream
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    alpha_hit: float = 8.0
    alpha_miss: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.alpha_hit > self.alpha_miss > 0:
            raise ValueError("need alpha_hit > alpha_miss > 0")


class SyntheticSource:
    """Infinite calibrated judgement stream.

    Each level owns an independent random stream derived from
    (seed, level), so the records produced for one level do not depend
    on how draws interleave across levels.  Same config => bit-identical
    streams.
    """

    def __init__(
        self,
        specs: dict[int, ConfusionSpec] | None = None,
        config: SynthConfig | None = None,
        split: str = "val",
        batch: int = 512,
    ):
        self.specs = dict(specs) if specs is not None else default_confusion_specs()
        self.config = config or SynthConfig()
        self.split = split
        self._batch = batch
        self._rngs = {
            lv: np.random.default_rng(np.random.SeedSequence((self.config.seed, lv)))
            for lv in self.specs
        }
        self._buffers: dict[int, list[JudgementRecord]] = {lv: [] for lv in self.specs}
        self._counters = {lv: 0 for lv in self.specs}

    def spawn(self, offset: int) -> "SyntheticSource":
        """Independent source with a derived seed (for parallel envs)."""
        cfg = SynthConfig(self.config.alpha_hit, self.config.alpha_miss,
                          self.config.seed + 1_000_003 * (offset + 1))
        return SyntheticSource(self.specs, cfg, self.split, self._batch)

    def draw(self, level_id: int) -> JudgementRecord:
        buf = self._buffers[level_id]
        if not buf:
            buf.extend(reversed(self.sample_batch(level_id, self._batch)))
        return buf.pop()

    def sample_batch(self, level_id: int, n: int) -> list[JudgementRecord]:
        spec = self.specs[level_id]
        rng = self._rngs[level_id]
        k = spec.n_classes
        priors = np.asarray(spec.priors)
        confusion = np.asarray(spec.confusion)

        truths = np.searchsorted(np.cumsum(priors), rng.random(n), side="right")
        truths = np.minimum(truths, k - 1)
        # inverse-CDF along each row picked by the ground truth
        u = rng.random(n)
        row_cdf = np.cumsum(confusion[truths], axis=1)
        preds = np.minimum((u[:, None] > row_cdf).sum(axis=1), k - 1)

        alpha = np.full((n, k), self.config.alpha_miss)
        alpha[np.arange(n), preds] = self.config.alpha_hit
        wrong = preds != truths
        alpha[wrong, truths[wrong]] = self.config.alpha_hit

        gammas = rng.gamma(alpha)
        conf = gammas / gammas.sum(axis=1, keepdims=True)
        # force argmax onto the predicted class
        arg = conf.argmax(axis=1)
        rows = np.arange(n)
        conf[rows, arg], conf[rows, preds] = conf[rows, preds], conf[rows, arg].copy()

        start = self._counters[level_id]
        self._counters[level_id] = start + n
        out = []
        for i in range(n):
            out.append(
                JudgementRecord(
                    level_id=level_id,
                    confidences=tuple(float(c) for c in conf[i]),
                    ground_truth=int(truths[i]),
                    record_id=f"synth-L{level_id}-{start + i:08d}",
                    split=self.split,
                )
            )
        return out


# ---------------------------------------------------------------------------
# Recorded pools
# ---------------------------------------------------------------------------

@dataclass
class JudgementPool:
    """Immutable per-level record store; sampling lives in PoolSampler."""

    records: dict[int, tuple[JudgementRecord, ...]] = field(default_factory=dict)

    def size(self, level_id: int) -> int:
        return len(self.records.get(level_id, ()))

    def sizes(self) -> dict[int, int]:
        return {lv: len(recs) for lv, recs in sorted(self.records.items())}

    def sampler(self, seed: int = 0, recycle: bool = False) -> "PoolSampler":
        return PoolSampler(self, seed=seed, recycle=recycle)


class PoolSampler:
    """Draws records from a pool without replacement within an epoch.

    With ``recycle`` the sampler silently starts a fresh shuffled epoch
    when a level runs dry; otherwise it raises SourceExhausted.
    """

    def __init__(self, pool: JudgementPool, seed: int = 0, recycle: bool = False):
        self.pool = pool
        self.recycle = recycle
        self._rng = np.random.default_rng(seed)
        self._order: dict[int, list[int]] = {}
        for lv in pool.records:
            self._reshuffle(lv)

    def _reshuffle(self, level_id: int) -> None:
        idx = list(self._rng.permutation(self.pool.size(level_id)))
        self._order[level_id] = idx

    def remaining(self, level_id: int) -> int:
        return len(self._order.get(level_id, ()))

    def reset_epoch(self, level_id: int | None = None) -> None:
        levels = [level_id] if level_id is not None else list(self.pool.records)
        for lv in levels:
            self._reshuffle(lv)

    def draw(self, level_id: int) -> JudgementRecord:
        order = self._order.get(level_id)
        if not order:
            if self.recycle and self.pool.size(level_id) > 0:
                self._reshuffle(level_id)
                order = self._order[level_id]
            else:
                raise SourceExhausted(
                    f"source exhausted: no unused level-{level_id} record"
                )
        return self.pool.records[level_id][order.pop()]


def load_dataset(paths, split: str | None = None) -> JudgementPool:
    """Load a JSON-lines judgement file (or several) into a pool.

    Malformed lines are reported with their file and line number.
    """
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    grouped: dict[int, list[JudgementRecord]] = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = JudgementRecord.from_json(line)
                except (ValueError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad record: {exc}") from exc
                if split is not None and rec.split != split:
                    continue
                grouped.setdefault(rec.level_id, []).append(rec)
    return JudgementPool({lv: tuple(recs) for lv, recs in grouped.items()})


def save_dataset(path, records: Iterable[JudgementRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# Calibration checking
# ---------------------------------------------------------------------------

def classification_metrics(y_true, y_pred, n_classes: int) -> dict:
    """Per-class precision/recall/F1/support plus macro averages."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    support = counts.sum(axis=1)
    pred_totals = counts.sum(axis=0)
    tp = np.diag(counts).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        f1 = np.where(precision + recall > 0,
                      2 * precision * recall / (precision + recall), 0.0)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "support": support,
        "accuracy": float(tp.sum() / max(len(y_true), 1)),
        "macro_precision": float(precision.mean()),
        "macro_recall": float(recall.mean()),
        "macro_f1": float(f1.mean()),
    }


def calibration_report(source: SyntheticSource, spec: ConfusionSpec, n: int) -> dict:
    """Empirical stream metrics vs the ConfusionSpec targets over n draws."""
    if n < 1000:
        raise ValueError("calibration needs n >= 1000")
    records = source.sample_batch(spec.level_id, n)
    y_true = np.array([r.ground_truth for r in records])
    y_pred = np.array([r.predicted for r in records])
    stats = classification_metrics(y_true, y_pred, spec.n_classes)

    implied_prec = spec.implied_precisions()
    emp_conf = np.zeros((spec.n_classes, spec.n_classes))
    np.add.at(emp_conf, (y_true, y_pred), 1.0)
    emp_conf /= np.maximum(emp_conf.sum(axis=1, keepdims=True), 1.0)

    rows = []
    for c, label in enumerate(level_spec(spec.level_id).class_labels):
        row = {
            "class": label,
            "recall": float(stats["recall"][c]),
            "recall_target": spec.recalls[c],
            "recall_abs_dev": abs(float(stats["recall"][c]) - spec.recalls[c]),
            "precision": float(stats["precision"][c]),
            "precision_target": float(implied_prec[c]),
            "precision_abs_dev": abs(float(stats["precision"][c]) - float(implied_prec[c])),
            "f1": float(stats["f1"][c]),
            "support": int(stats["support"][c]),
        }
        if spec.precisions is not None:
            row["precision_published"] = spec.precisions[c]
        rows.append(row)
    return {
        "level": spec.level_id,
        "n": n,
        "accuracy": stats["accuracy"],
        "accuracy_target": spec.top1_accuracy(),
        "confusion_linf": float(np.abs(emp_conf - np.asarray(spec.confusion)).max()),
        "classes": rows,
    }


def format_calibration_report(report: dict) -> str:
    lines = [
        f"Level {report['level']}  (n={report['n']})  "
        f"accuracy {report['accuracy']:.4f} vs target {report['accuracy_target']:.4f}  "
        f"confusion Linf {report['confusion_linf']:.4f}",
        f"{'class':<40} {'recall':>8} {'target':>8} {'dev':>7}"
        f" {'prec':>8} {'target':>8} {'dev':>7}",
    ]
    for row in report["classes"]:
        lines.append(
            f"{row['class']:<40} {row['recall']:>8.4f} {row['recall_target']:>8.4f}"
            f" {row['recall_abs_dev']:>7.4f} {row['precision']:>8.4f}"
            f" {row['precision_target']:>8.4f} {row['precision_abs_dev']:>7.4f}"
        )
    return "\n".join(lines)
