"""Shared test utilities: random small networks and a finite-difference checker."""

import numpy as np

from cmdp_ids import nn


def random_small_spec(rng):
    """A random valid network with at most three hidden blocks and a softmax head."""
    length = int(rng.integers(4, 13))
    channels = int(rng.integers(1, 3))
    layers, shape = [], (channels, length)
    flat = False
    for _ in range(int(rng.integers(0, 4))):
        choice = rng.integers(3) if not flat else 2
        if choice == 0 and shape[1] >= 2:
            k = int(rng.integers(1, min(3, shape[1]) + 1))
            layers.append(nn.Conv1D(int(rng.integers(1, 5)), k))
            shape = (layers[-1].filters, shape[1] - k + 1)
            if rng.random() < 0.7:
                layers.append(nn.ReLU())
        elif choice == 1 and shape[1] >= 2:
            w = int(rng.integers(1, min(3, shape[1]) + 1))
            layers.append(nn.MaxPool1D(w))
            shape = (shape[0], shape[1] // w)
        else:
            if not flat:
                layers.append(nn.Flatten())
                flat = True
            layers.append(nn.Dense(int(rng.integers(1, 6))))
            if rng.random() < 0.7:
                layers.append(nn.ReLU())
    if not flat:
        layers.append(nn.Flatten())
    layers.append(nn.SoftmaxOutput(int(rng.integers(2, 6))))
    return nn.NetworkSpec(length, tuple(layers), channels)


def gradient_check(params, x, weights, h=1e-5, floor=1e-6):
    """Max relative error between analytic and central-difference gradients.

    The objective is ``sum(weights * forward(x))``; relative error is
    ``|a - n| / max(|a|, |n|, floor)``.
    """
    out, cache = nn.forward(params, x)
    grads = nn.backward(params, cache, weights)

    def objective(p):
        return float(np.sum(weights * nn.forward(p, x)[0]))

    worst = 0.0
    for i, (dw, db) in grads.items():
        for which, analytic in (("weights", dw), ("biases", db)):
            base = getattr(params.layers[i], which)
            for idx in np.ndindex(base.shape):
                orig = base[idx]
                base[idx] = orig + h
                up = objective(params)
                base[idx] = orig - h
                down = objective(params)
                base[idx] = orig
                num = (up - down) / (2 * h)
                a = analytic[idx]
                err = abs(a - num) / max(abs(a), abs(num), floor)
                worst = max(worst, err)
    return worst
