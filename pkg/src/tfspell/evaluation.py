"""Accuracy, per-class true-positive rates, bootstrap repeats, t-test, audits."""

from __future__ import annotations

import csv
import json
import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .landmarks import HandLandmarks
from .mlp import Encoding, TrainConfig, encode_batch, predict_labels, train

REJECTED = "<rejected>"


class UnknownLabel(ValueError):
    pass


class EmptyMatrix(ValueError):
    pass


class DegenerateSample(ValueError):
    pass


class RepeatFailed(RuntimeError):
    def __init__(self, repeat: int, cause: Exception):
        super().__init__(f"bootstrap repeat {repeat} failed: {cause}")
        self.repeat = repeat


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true labels; columns are predicted labels plus a final rejected column."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def rejected(self) -> np.ndarray:
        return self.counts[:, -1]


def confusion(pairs: Iterable[tuple[str, str | None]], labels: Sequence[str] | None = None) -> ConfusionMatrix:
    """Tally ``(truth, prediction)`` pairs; ``None`` predictions land in the rejected column.

    Without an explicit label set, the sorted union of every label seen is used.
    """
    pairs = list(pairs)
    if labels is None:
        seen = {t for t, _ in pairs} | {p for _, p in pairs if p is not None}
        labels = sorted(seen)
    labels = tuple(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels) + 1), dtype=np.int64)
    for truth, pred in pairs:
        if truth not in index:
            raise UnknownLabel(f"true label {truth!r} is not in the label set")
        if pred is None:
            col = len(labels)
        elif pred in index:
            col = index[pred]
        else:
            raise UnknownLabel(f"predicted label {pred!r} is not in the label set")
        counts[index[truth], col] += 1
    return ConfusionMatrix(labels, counts)


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise EmptyMatrix("accuracy of an empty confusion matrix is undefined")
    n = len(cm.labels)
    return float(np.trace(cm.counts[:, :n]) / total)


def tp_rate_per_class(cm: ConfusionMatrix) -> dict[str, float | None]:
    """Diagonal over row total for each label; ``None`` for labels with no samples."""
    rows = cm.counts.sum(axis=1)
    return {
        lab: (float(cm.counts[i, i] / rows[i]) if rows[i] else None)
        for i, lab in enumerate(cm.labels)
    }


def evaluate_model(model, test_set: Sequence[tuple[HandLandmarks, str]]) -> float:
    x = encode_batch([h for h, _ in test_set], model.encoding)
    preds = predict_labels(model, x)
    return float(np.mean([p == t for p, (_, t) in zip(preds, test_set)]))


def bootstrap_eval(
    train_set: Sequence[tuple[HandLandmarks, str]],
    test_set: Sequence[tuple[HandLandmarks, str]],
    cfg: TrainConfig,
    enc: Encoding | str,
    repeats: int = 10,
) -> list[float]:
    """Held-out accuracy of ``repeats`` models, each trained on a bootstrap resample.

    Repeat ``r`` draws ``len(train_set)`` samples with replacement and trains
    with seed ``cfg.seed + r``; the test set never changes.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    n = len(train_set)
    accs = []
    for r in range(repeats):
        seed = cfg.seed + r
        idx = np.random.default_rng(seed).integers(0, n, size=n)
        try:
            model, _ = train([train_set[i] for i in idx], replace(cfg, seed=seed), enc)
        except Exception as exc:
            raise RepeatFailed(r, exc) from exc
        accs.append(evaluate_model(model, test_set))
    return accs


# Student t distribution ---------------------------------------------------

def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    return float(2.0 * stats.t.sf(abs(t), df))


def t_test(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Two-sample Student t-test with pooled variance; returns ``(t, two-sided p)``."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    nx, ny = len(x), len(y)
    if nx < 2 or ny < 2:
        raise DegenerateSample("each sample needs at least 2 values")
    df = nx + ny - 2
    pooled = (((x - x.mean()) ** 2).sum() + ((y - y.mean()) ** 2).sum()) / df
    if pooled <= 0.0:
        raise DegenerateSample("pooled variance is zero")
    t = float((x.mean() - y.mean()) / math.sqrt(pooled * (1.0 / nx + 1.0 / ny)))
    return t, t_sf_two_sided(t, df)


# Detection audits ---------------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    group: str
    hand_detect_ok: bool
    keypoints_ok: bool
    handedness_ok: bool | None = None

    def __post_init__(self):
        if self.keypoints_ok and not self.hand_detect_ok:
            raise ValueError("keypoints_ok requires hand_detect_ok")


@dataclass(frozen=True)
class GroupSummary:
    n: int
    both_ok: int
    hand_fail: int
    keypoint_fail: int
    handedness_accuracy: float | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "both_ok": self.both_ok,
            "hand_fail": self.hand_fail,
            "keypoint_fail": self.keypoint_fail,
            "handedness_accuracy": self.handedness_accuracy,
        }


def audit_summary(records: Iterable[AuditRecord]) -> dict[str, GroupSummary]:
    groups: OrderedDict[str, list[AuditRecord]] = OrderedDict()
    for rec in records:
        groups.setdefault(rec.group, []).append(rec)
    out = {}
    for name, recs in groups.items():
        hd = [r.handedness_ok for r in recs if r.handedness_ok is not None]
        out[name] = GroupSummary(
            n=len(recs),
            both_ok=sum(r.hand_detect_ok and r.keypoints_ok for r in recs),
            hand_fail=sum(not r.hand_detect_ok for r in recs),
            keypoint_fail=sum(r.hand_detect_ok and not r.keypoints_ok for r in recs),
            handedness_accuracy=(sum(hd) / len(hd)) if hd else None,
        )
    return out


_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


def _parse_bool(text: str, lineno: int, column: str, optional: bool = False) -> bool | None:
    v = text.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    if optional and v == "":
        return None
    raise ValueError(f"line {lineno}: column {column!r} has non-boolean value {text!r}")


def read_audit_csv(path) -> list[AuditRecord]:
    """Audit CSV with header ``group,hand_detect_ok,keypoints_ok[,handedness_ok]``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        needed = {"group", "hand_detect_ok", "keypoints_ok"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise ValueError(f"audit CSV needs columns {sorted(needed)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            hd = row.get("handedness_ok") or ""
            try:
                out.append(AuditRecord(
                    row["group"],
                    _parse_bool(row["hand_detect_ok"], lineno, "hand_detect_ok"),
                    _parse_bool(row["keypoints_ok"], lineno, "keypoints_ok"),
                    _parse_bool(hd, lineno, "handedness_ok", optional=True),
                ))
            except ValueError as exc:
                if str(exc).startswith("line "):
                    raise
                raise ValueError(f"line {lineno}: {exc}") from None
        return out


# Reports -------------------------------------------------------------------

def write_confusion_csv(cm: ConfusionMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["truth\\predicted", *cm.labels, REJECTED])
        for lab, row in zip(cm.labels, cm.counts):
            w.writerow([lab, *row.tolist()])


def write_rates_csv(cm: ConfusionMatrix, path) -> None:
    rows = cm.counts.sum(axis=1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "support", "tp_rate"])
        for (lab, rate), n in zip(tp_rate_per_class(cm).items(), rows):
            w.writerow([lab, int(n), "" if rate is None else repr(rate)])


def summary_dict(cm: ConfusionMatrix) -> dict:
    return {
        "n": cm.total,
        "accuracy": accuracy(cm) if cm.total else None,
        "rejected": int(cm.rejected.sum()),
        "tp_rate": tp_rate_per_class(cm),
    }


def write_summary_json(cm: ConfusionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(cm), fh, indent=2)
