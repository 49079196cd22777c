"""Loss functions on Q-vectors and the TD-target vector construction.

Four losses are supported, selected by name: ``mse``, ``cce``, ``kld`` and
``huber``. Each returns its value and the gradient with respect to the
prediction. A batch (2-D input) is reduced by the arithmetic mean over rows.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ModeError, NumericError, ShapeError

LOG_FLOOR = 1e-12
LOSS_NAMES = ("mse", "cce", "kld", "huber")
DISPLAY_NAMES = {
    "mse": "MSE",
    "cce": "CategoricalCrossentropy",
    "kld": "KLDivergence",
    "huber": "Huber",
}

REGRESSION = "regression"
DISTRIBUTION = "distribution"


@dataclass(frozen=True)
class LossKind:
    name: str
    delta: float = 1.0

    def __post_init__(self):
        if self.name not in LOSS_NAMES:
            raise ValueError(f"unknown loss {self.name!r}; choose from {', '.join(LOSS_NAMES)}")
        if not self.delta > 0:
            raise ValueError("huber delta must be > 0")

    @property
    def target_mode(self):
        return DISTRIBUTION if self.name in ("cce", "kld") else REGRESSION


def parse_loss(name, delta=1.0):
    return LossKind(name.strip().lower(), delta)


@dataclass(frozen=True)
class TargetVector:
    values: np.ndarray
    mode: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise NumericError("target vector has non-finite entries")
        if self.mode == DISTRIBUTION:
            if np.any(values < 0) or np.any(np.abs(values.sum(axis=-1) - 1.0) > 1e-9):
                raise ModeError("distribution target must be non-negative and sum to 1")
        elif self.mode != REGRESSION:
            raise ValueError(f"unknown target mode {self.mode!r}")


def loss_and_grad(kind, prediction, target):
    """Return ``(value, d value / d prediction)``.

    ``target`` is a :class:`TargetVector`. For ``cce``/``kld`` it must be in
    distribution mode; predictions are floored at ``LOG_FLOOR`` inside the
    logarithm (the floor has zero gradient).
    """
    if isinstance(kind, str):
        kind = parse_loss(kind)
    f = np.asarray(prediction, dtype=np.float64)
    y = target.values
    if f.shape != y.shape:
        raise ShapeError(f"prediction shape {f.shape} != target shape {y.shape}")
    single = f.ndim == 1
    if single:
        f, y = f[None, :], y[None, :]
    n, width = f.shape

    if kind.name in ("cce", "kld"):
        if target.mode != DISTRIBUTION:
            raise ModeError(f"{kind.name} needs a distribution-mode target")
        safe = np.maximum(f, LOG_FLOOR)
        grad = np.where(f > LOG_FLOOR, -y / safe, 0.0)
        if kind.name == "cce":
            per_row = -np.sum(y * np.log(safe), axis=1)
        else:
            pos = y > 0
            terms = np.zeros_like(y)
            terms[pos] = y[pos] * (np.log(y[pos]) - np.log(safe[pos]))
            per_row = terms.sum(axis=1)
    elif kind.name == "mse":
        err = f - y
        per_row = np.mean(err * err, axis=1)
        grad = 2.0 * err / width
    else:
        err = f - y
        a = np.abs(err)
        d = kind.delta
        quad = a <= d
        per_row = np.mean(np.where(quad, 0.5 * err * err, d * a - 0.5 * d * d), axis=1)
        grad = np.where(quad, err, d * np.sign(err)) / width

    value = float(per_row.mean())
    grad = grad / n
    return value, (grad[0] if single else grad)


def build_q_targets(current_q, actions, td_targets, kind):
    """Batched target construction; returns a ``(n, L)`` array.

    Each row starts as a copy of ``current_q`` with ``[action]`` replaced by
    the TD target. Distribution-mode losses then clamp to [0, 1] and
    renormalise, falling back to a one-hot at the action when nothing is left.
    """
    q = np.array(current_q, dtype=np.float64, copy=True)
    actions = np.asarray(actions, dtype=np.int64)
    td = np.asarray(td_targets, dtype=np.float64)
    if not np.all(np.isfinite(td)):
        raise NumericError("non-finite TD target")
    if np.any(actions < 0) or np.any(actions >= q.shape[1]):
        raise ShapeError("action index out of range")
    rows = np.arange(q.shape[0])
    q[rows, actions] = td
    if kind.target_mode == REGRESSION:
        return q
    q = np.clip(q, 0.0, 1.0)
    total = q.sum(axis=1)
    dead = total <= 1e-9
    q[~dead] /= total[~dead, None]
    q[dead] = 0.0
    q[np.flatnonzero(dead), actions[dead]] = 1.0
    return q


def build_q_target(current_q, action, td_target, kind):
    """Single-sample form of :func:`build_q_targets`."""
    if isinstance(kind, str):
        kind = parse_loss(kind)
    q = np.asarray(current_q, dtype=np.float64)
    values = build_q_targets(q[None, :], [action], [td_target], kind)[0]
    return TargetVector(values, kind.target_mode)
