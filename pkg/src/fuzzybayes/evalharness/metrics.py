"""Classification metrics: accuracy, precision, recall, F1 and CEP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    cep: float
    labels: tuple[str, ...]
    confusion: np.ndarray = field(repr=False)
    per_class: dict = field(default_factory=dict, repr=False)
    average: str = "macro"

    @property
    def support(self) -> np.ndarray:
        return self.confusion.sum(axis=1)


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def confusion_matrix(predictions, truths, labels) -> np.ndarray:
    """Rows are true classes, columns predicted classes, both in ``labels`` order."""
    index = {lab: i for i, lab in enumerate(labels)}
    cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, t in zip(predictions, truths):
        try:
            cm[index[t], index[p]] += 1
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in {list(labels)}") from None
    return cm


def compute_metrics(predictions, truths, labels, average: str = "macro") -> EvalReport:
    """Score predictions against ground truth.

    Per-class precision, recall and F1 treat 0/0 as 0. Macro averages are
    unweighted means over the classes that occur among truths or
    predictions; micro averages pool all decisions. CEP is ``1 - accuracy``.
    """
    predictions = list(predictions)
    truths = list(truths)
    if len(predictions) != len(truths):
        raise ValueError(f"{len(predictions)} predictions for {len(truths)} truths")
    if not truths:
        raise ValueError("need at least one prediction")
    labels = tuple(labels)
    cm = confusion_matrix(predictions, truths, labels)
    tp = np.diag(cm).astype(float)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = _safe_div(tp, predicted)
    recall = _safe_div(tp, actual)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    correct = int(tp.sum())
    total = len(truths)
    accuracy = correct / total
    cep = (total - correct) / total

    if average == "macro":
        present = (predicted + actual) > 0
        p_avg, r_avg, f_avg = (float(v[present].mean()) for v in (precision, recall, f1))
    elif average == "micro":
        p_avg = r_avg = f_avg = accuracy
    else:
        raise ValueError(f"average must be 'macro' or 'micro', got {average!r}")

    per_class = {
        lab: {"precision": float(precision[i]), "recall": float(recall[i]), "f1": float(f1[i]), "support": int(actual[i])}
        for i, lab in enumerate(labels)
    }
    return EvalReport(accuracy, p_avg, r_avg, f_avg, cep, labels, cm, per_class, average)


def format_report(report: EvalReport, title: str = "Evaluation report") -> str:
    """Structured plain-text rendering, percentages to two decimals."""
    lines = [title, "=" * len(title)]
    for name, value in (
        ("Accuracy", report.accuracy),
        ("Precision", report.precision),
        ("Recall", report.recall),
        ("F1", report.f1),
        ("CEP", report.cep),
    ):
        lines.append(f"{name:<10}{value * 100:>8.2f}%")
    lines.append(f"(averaging: {report.average})")
    lines.append("")
    width = max(len(str(lab)) for lab in report.labels) + 2
    lines.append(f"{'class':<{width}}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>9}")
    for lab in report.labels:
        pc = report.per_class[lab]
        lines.append(f"{lab:<{width}}{pc['precision']:>10.4f}{pc['recall']:>10.4f}{pc['f1']:>10.4f}{pc['support']:>9d}")
    lines.append("")
    lines.append("confusion (rows = truth, columns = prediction)")
    lines.append(" " * width + "".join(f"{lab:>8}" for lab in report.labels))
    for lab, row in zip(report.labels, report.confusion):
        lines.append(f"{lab:<{width}}" + "".join(f"{v:>8d}" for v in row))
    return "\n".join(lines) + "\n"
