"""Classification and multi-label evaluation machinery.

Covers top-k accuracy with per-class breakdowns for zero-shot category
classification, and support-weighted precision/recall/F1 for multi-label
element prediction. Zero-denominator precision or recall is reported as 0
and flagged rather than hidden; weighted averages use each label's gold
occurrence count as its weight, and labels with zero support are excluded
from the averages.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import MetricError


@dataclass(frozen=True)
class ClassificationSample:
    item_id: str
    gold: str
    ranked_predictions: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranked_predictions", tuple(self.ranked_predictions))
        if not self.ranked_predictions:
            raise MetricError(f"{self.item_id}: needs at least one prediction")
        if len(set(self.ranked_predictions)) != len(self.ranked_predictions):
            raise MetricError(f"{self.item_id}: ranked predictions contain duplicates")


@dataclass(frozen=True)
class MultiLabelSample:
    item_id: str
    gold_labels: frozenset[str]
    predicted_labels: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gold_labels", frozenset(self.gold_labels))
        object.__setattr__(self, "predicted_labels", frozenset(self.predicted_labels))


@dataclass(frozen=True)
class MetricReport:
    overall: dict[str, float]
    per_class: dict[str, dict[str, float]]
    flags: tuple[str, ...] = ()


def topk_accuracy(samples: Sequence[ClassificationSample], k: int) -> float:
    """Fraction of samples whose gold label is among the first
    min(k, available) confidence-ranked predictions."""
    if not samples:
        raise MetricError("no samples")
    if k < 1:
        raise MetricError("k must be positive")
    hits = sum(1 for s in samples if s.gold in s.ranked_predictions[:k])
    return hits / len(samples)


def per_class_classification_report(
    samples: Sequence[ClassificationSample],
    label_set: Sequence[str],
) -> MetricReport:
    """Per gold label: support plus correct-at-1 and correct-at-3 counts;
    overall accuracies agree with :func:`topk_accuracy` by construction."""
    if not samples:
        raise MetricError("no samples")
    labels = list(dict.fromkeys(label_set))
    if not labels:
        raise MetricError("label set is empty")
    known = set(labels)
    for sample in samples:
        if sample.gold not in known:
            raise MetricError(f"gold label outside label set: {sample.gold!r}")

    per_class = {
        label: {"support": 0.0, "correct_at_1": 0.0, "correct_at_3": 0.0}
        for label in labels
    }
    for sample in samples:
        row = per_class[sample.gold]
        row["support"] += 1
        if sample.gold in sample.ranked_predictions[:1]:
            row["correct_at_1"] += 1
        if sample.gold in sample.ranked_predictions[:3]:
            row["correct_at_3"] += 1

    overall = {
        "top1_accuracy": topk_accuracy(samples, 1),
        "top3_accuracy": topk_accuracy(samples, 3),
    }
    return MetricReport(overall=overall, per_class=per_class)


def apply_label_exclusions(
    samples: Iterable[MultiLabelSample],
    excluded: set[str],
) -> list[MultiLabelSample]:
    """Remove excluded labels from both gold and predicted sets; samples that
    end up empty on both sides stay in (they match trivially)."""
    return [
        MultiLabelSample(
            s.item_id,
            frozenset(s.gold_labels - excluded),
            frozenset(s.predicted_labels - excluded),
        )
        for s in samples
    ]


def multilabel_prf(
    samples: Sequence[MultiLabelSample],
    label_set: Sequence[str],
) -> MetricReport:
    """Per-label precision/recall/F1 with support-weighted averages.

    support = gold occurrences of the label; precision = tp/(tp+fp) and
    recall = tp/(tp+fn), each 0-and-flagged when the denominator is 0;
    F1 is the harmonic mean (0 when precision and recall are both 0).
    """
    if not samples:
        raise MetricError("no samples")
    labels = list(dict.fromkeys(label_set))
    if not labels:
        raise MetricError("label set is empty")
    known = set(labels)
    for sample in samples:
        stray = (sample.gold_labels | sample.predicted_labels) - known
        if stray:
            raise MetricError(f"{sample.item_id}: labels outside label set: {sorted(stray)}")

    per_class: dict[str, dict[str, float]] = {}
    flags: list[str] = []
    for label in labels:
        tp = sum(1 for s in samples if label in s.gold_labels and label in s.predicted_labels)
        fp = sum(1 for s in samples if label in s.predicted_labels and label not in s.gold_labels)
        fn = sum(1 for s in samples if label in s.gold_labels and label not in s.predicted_labels)
        support = tp + fn
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 0.0
            flags.append(f"{label}: precision undefined (never predicted); reported 0")
        if support > 0:
            recall = tp / support
        else:
            recall = 0.0
            flags.append(f"{label}: recall undefined (no gold occurrences); reported 0")
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        per_class[label] = {
            "support": float(support),
            "precision": precision,
            "recall": recall,
            "f1": f1,
        }

    weighted = [(label, row) for label, row in per_class.items() if row["support"] > 0]
    total_support = sum(row["support"] for _, row in weighted)
    if total_support == 0:
        overall = {"weighted_precision": 0.0, "weighted_recall": 0.0, "weighted_f1": 0.0}
        flags.append("no label has gold support; weighted averages reported 0")
    else:
        overall = {
            "weighted_precision": sum(r["support"] * r["precision"] for _, r in weighted) / total_support,
            "weighted_recall": sum(r["support"] * r["recall"] for _, r in weighted) / total_support,
            "weighted_f1": sum(r["support"] * r["f1"] for _, r in weighted) / total_support,
        }
    return MetricReport(overall=overall, per_class=per_class, flags=tuple(flags))


# --- file formats ---------------------------------------------------------


def _read_jsonl(path: str | Path) -> list[dict]:
    docs = []
    for line_number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MetricError(f"{path}:{line_number}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise MetricError(f"{path}:{line_number}: expected an object")
        docs.append(doc)
    return docs


def load_classification_samples(path: str | Path) -> list[ClassificationSample]:
    """One sample per line: {"id", "gold", "predictions": [..]}."""
    samples = []
    for doc in _read_jsonl(path):
        try:
            samples.append(ClassificationSample(
                item_id=str(doc["id"]),
                gold=str(doc["gold"]),
                ranked_predictions=tuple(str(p) for p in doc["predictions"]),
            ))
        except KeyError as exc:
            raise MetricError(f"{path}: sample missing field {exc}") from exc
    return samples


def load_multilabel_samples(path: str | Path) -> list[MultiLabelSample]:
    """One sample per line: {"id", "gold": [..], "predicted": [..]}."""
    samples = []
    for doc in _read_jsonl(path):
        try:
            samples.append(MultiLabelSample(
                item_id=str(doc["id"]),
                gold_labels=frozenset(str(l) for l in doc["gold"]),
                predicted_labels=frozenset(str(l) for l in doc["predicted"]),
            ))
        except KeyError as exc:
            raise MetricError(f"{path}: sample missing field {exc}") from exc
    return samples


def load_label_set(path: str | Path) -> list[str]:
    """One label per line; blank lines and # comments ignored."""
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if entry and not entry.startswith("#"):
            labels.append(entry)
    if not labels:
        raise MetricError(f"{path}: no labels")
    return labels


def report_to_json(report: MetricReport) -> dict:
    return {
        "overall": dict(report.overall),
        "per_class": {label: dict(row) for label, row in report.per_class.items()},
        "flags": list(report.flags),
    }


def format_report_table(report: MetricReport) -> str:
    """Aligned plain-text rendering: one row per label plus the overall line."""
    metric_names = list(next(iter(report.per_class.values())).keys()) if report.per_class else []
    width = max([len("label")] + [len(label) for label in report.per_class])
    header = "label".ljust(width) + "".join(f"  {name:>12}" for name in metric_names)
    lines = [header, "-" * len(header)]
    for label, row in report.per_class.items():
        cells = "".join(
            f"  {row[name]:>12.0f}" if name == "support" or name.startswith("correct")
            else f"  {row[name]:>12.4f}"
            for name in metric_names
        )
        lines.append(label.ljust(width) + cells)
    lines.append("-" * len(header))
    for name, value in report.overall.items():
        lines.append(f"{name}: {value:.4f}")
    for flag in report.flags:
        lines.append(f"note: {flag}")
    return "\n".join(lines)
