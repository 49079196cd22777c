"""Re-use a trained convolutional backbone under a fresh dense head."""

import numpy as np

from . import nn
from .errors import PlanError

# parameter counts published for the UNSW -> BoT-IoT transfer network
PUBLISHED_TOTAL = 9587
PUBLISHED_TRAINABLE = 3875


def build_transfer_net(source_params, target_classes, input_length=None, hidden=(5, 5), seed=0):
    """Freeze everything before ``Flatten`` and graft ``hidden`` Dense+ReLU layers
    followed by a softmax of width ``target_classes``.

    ``input_length`` defaults to the source input length; the convolutional
    stack is length-agnostic, so a target dataset with a different feature
    count only changes the flatten width feeding the new head.
    Returns ``(spec, params)``.
    """
    src = source_params.spec
    if target_classes < 2:
        raise PlanError("target dataset needs at least two classes")
    flat = next((i for i, layer in enumerate(src.layers) if isinstance(layer, nn.Flatten)), None)
    if flat is None:
        raise PlanError("source network has no Flatten layer to cut at")
    frozen = [i for i in source_params.layers if i < flat]
    if not frozen:
        raise PlanError("nothing to freeze: no parameterized layer before Flatten")
    head = []
    for units in hidden:
        head += [nn.Dense(units), nn.ReLU()]
    head.append(nn.SoftmaxOutput(target_classes))
    spec = nn.NetworkSpec(input_length or src.input_length, src.layers[:flat + 1] + tuple(head),
                          src.input_channels)
    fresh = nn.init_params(spec, seed)
    layers = {}
    for i, p in fresh.layers.items():
        if i < flat:
            s = source_params.layers[i]
            layers[i] = nn.LayerParams(s.weights.copy(), s.biases.copy(), trainable=False)
        else:
            layers[i] = p
    return spec, nn.NetworkParams(spec, layers)


def frozen_unchanged(source_params, params):
    """True when every pre-Flatten tensor is bitwise equal to the source."""
    for i, p in params.layers.items():
        if p.trainable:
            continue
        s = source_params.layers[i]
        if not (np.array_equal(s.weights, p.weights) and np.array_equal(s.biases, p.biases)):
            return False
        if s.weights.tobytes() != p.weights.tobytes() or s.biases.tobytes() != p.biases.tobytes():
            return False
    return True


def accounting(params):
    total, trainable = nn.param_count(params)
    return {
        "total": total,
        "trainable": trainable,
        "frozen": total - trainable,
        "published_total": PUBLISHED_TOTAL,
        "published_trainable": PUBLISHED_TRAINABLE,
    }
