"""Confusion matrices and support-weighted classification metrics."""

import json
from dataclasses import dataclass

import numpy as np

from .agent import greedy_predict
from .errors import ShapeError


def confusion_matrix(y_true, y_pred, n_classes):
    """Counts with rows = true class and columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


@dataclass
class EvaluationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_precision: np.ndarray
    per_class_recall: np.ndarray
    per_class_f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray
    label_names: tuple
    zero_division: list  # classes that were never predicted (precision set to 0)

    @classmethod
    def from_confusion(cls, cm, label_names=None):
        cm = np.asarray(cm, dtype=np.int64)
        n = cm.shape[0]
        label_names = tuple(label_names) if label_names is not None else tuple(str(i) for i in range(n))
        total = cm.sum()
        tp = np.diag(cm).astype(np.float64)
        predicted = cm.sum(axis=0)
        support = cm.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            prec = np.where(predicted > 0, tp / predicted, 0.0)
            rec = np.where(support > 0, tp / support, 0.0)
            f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
        weights = support / total if total else np.zeros(n)
        return cls(
            accuracy=float(tp.sum() / total) if total else 0.0,
            precision=float(np.sum(weights * prec)),
            recall=float(np.sum(weights * rec)),
            f1=float(np.sum(weights * f1)),
            per_class_precision=prec,
            per_class_recall=rec,
            per_class_f1=f1,
            support=support,
            confusion=cm,
            label_names=label_names,
            zero_division=[label_names[i] for i in np.flatnonzero(predicted == 0)],
        )

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class": {
                name: {
                    "precision": float(self.per_class_precision[i]),
                    "recall": float(self.per_class_recall[i]),
                    "f1": float(self.per_class_f1[i]),
                    "support": int(self.support[i]),
                }
                for i, name in enumerate(self.label_names)
            },
            "confusion": self.confusion.tolist(),
            "zero_division": list(self.zero_division),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render(self):
        width = max(12, *(len(n) for n in self.label_names))
        lines = [
            f"{'Accuracy':<10}{'Precision':>11}{'Recall':>9}{'F1 Score':>10}",
            f"{self.accuracy:<10.4f}{self.precision:>11.4f}{self.recall:>9.4f}{self.f1:>10.4f}",
            "",
            f"{'class':<{width}}{'precision':>11}{'recall':>9}{'f1':>9}{'support':>9}",
        ]
        for i, name in enumerate(self.label_names):
            lines.append(f"{name:<{width}}{self.per_class_precision[i]:>11.4f}"
                         f"{self.per_class_recall[i]:>9.4f}{self.per_class_f1[i]:>9.4f}"
                         f"{int(self.support[i]):>9d}")
        if self.zero_division:
            lines.append(f"never predicted (precision defined as 0): {', '.join(self.zero_division)}")
        return "\n".join(lines) + "\n"

    def confusion_csv(self):
        rows = ["true\\pred," + ",".join(self.label_names)]
        for name, row in zip(self.label_names, self.confusion):
            rows.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(rows) + "\n"


def evaluate(params, dataset, spec=None):
    """Greedy-argmax evaluation of a Q-network on an encoded dataset."""
    spec = spec or params.spec
    if spec.n_outputs != dataset.n_classes:
        raise ShapeError(f"model head width {spec.n_outputs} != dataset class count {dataset.n_classes}")
    if spec.input_length * spec.input_channels != dataset.n_features:
        raise ShapeError(f"model expects {spec.input_length} features, dataset has {dataset.n_features}")
    pred = greedy_predict(params, dataset.matrix)
    cm = confusion_matrix(dataset.labels, pred, dataset.n_classes)
    return EvaluationReport.from_confusion(cm, dataset.label_names)


def sweep_table(reports, title="method"):
    """Side-by-side table of ``{name: EvaluationReport}`` rows."""
    width = max(len(title), *(len(n) for n in reports)) + 2
    lines = [f"{title:<{width}}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}{'F1 Score':>10}"]
    for name, r in reports.items():
        lines.append(f"{name:<{width}}{r.accuracy:>10.4f}{r.precision:>11.4f}{r.recall:>9.4f}{r.f1:>10.4f}")
    return "\n".join(lines) + "\n"
