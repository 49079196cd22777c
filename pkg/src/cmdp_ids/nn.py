"""A small feed-forward engine: 1-D convolution, max-pooling, dense layers.

Only the layer types needed by the Q-network exist here. Everything is
float64 and functional: ``forward``/``backward``/``adam_step`` never mutate
their inputs.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import container, kernels
from .errors import InconsistentModelError, NumericError, ShapeError


# --------------------------------------------------------------------------
# layer descriptions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Conv1D:
    filters: int
    kernel_width: int
    stride: int = 1
    kind = "conv1d"


@dataclass(frozen=True)
class MaxPool1D:
    width: int
    kind = "maxpool1d"


@dataclass(frozen=True)
class Flatten:
    kind = "flatten"


@dataclass(frozen=True)
class Dense:
    units: int
    kind = "dense"


@dataclass(frozen=True)
class ReLU:
    kind = "relu"


@dataclass(frozen=True)
class SoftmaxOutput:
    """Dense projection to ``units`` logits followed by softmax."""
    units: int
    kind = "softmax"


LAYER_TYPES = {cls.kind: cls for cls in (Conv1D, MaxPool1D, Flatten, Dense, ReLU, SoftmaxOutput)}
PARAMETERIZED = (Conv1D, Dense, SoftmaxOutput)


def layer_to_dict(layer):
    d = {"type": layer.kind}
    d.update({k: v for k, v in vars(layer).items()})
    return d


def layer_from_dict(d):
    d = dict(d)
    cls = LAYER_TYPES[d.pop("type")]
    return cls(**d)


@dataclass(frozen=True)
class NetworkSpec:
    input_length: int
    layers: tuple
    input_channels: int = 1

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_length < 1 or self.input_channels < 1:
            raise ShapeError("input_length and input_channels must be >= 1")
        for i, layer in enumerate(self.layers):
            for name, value in vars(layer).items():
                if value < 1:
                    raise ShapeError(f"layer {i} ({layer}): {name} must be >= 1")
            if isinstance(layer, SoftmaxOutput) and i != len(self.layers) - 1:
                raise ShapeError(f"layer {i}: SoftmaxOutput is only allowed as the final layer")

    @property
    def n_outputs(self):
        return infer_shapes(self)[-1][0]


def unsw_qnet(input_length, n_classes=6):
    """Q-network used for the source dataset: three convs, two pools, Dense(40)."""
    return NetworkSpec(input_length, (
        Conv1D(16, 2), ReLU(),
        Conv1D(32, 2), ReLU(),
        MaxPool1D(2),
        Conv1D(64, 2), ReLU(),
        MaxPool1D(2),
        Flatten(),
        Dense(40), ReLU(),
        SoftmaxOutput(n_classes),
    ))


def infer_shapes(spec):
    """Per-layer output shapes: ``(channels, length)`` before Flatten, ``(width,)`` after."""
    shape = (spec.input_channels, spec.input_length)
    shapes = []
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, (Conv1D, MaxPool1D)):
            if len(shape) != 2:
                raise ShapeError(f"layer {i} ({layer}) needs a (channels, length) input, got {shape}")
            c, length = shape
            if isinstance(layer, Conv1D):
                out = (length - layer.kernel_width) // layer.stride + 1
                if length < layer.kernel_width:
                    out = 0
                shape = (layer.filters, out)
            else:
                out = length // layer.width
                shape = (c, out)
            if out < 1:
                raise ShapeError(f"layer {i} ({layer}): output length {out} < 1 for input length {length}")
        elif isinstance(layer, Flatten):
            shape = (int(np.prod(shape)),)
        elif isinstance(layer, (Dense, SoftmaxOutput)):
            if len(shape) != 1:
                raise ShapeError(f"layer {i} ({layer}) needs a flat input; insert Flatten first")
            shape = (layer.units,)
        elif isinstance(layer, ReLU):
            pass
        else:
            raise ShapeError(f"layer {i}: unknown layer {layer!r}")
        shapes.append(shape)
    if not shapes or len(shapes[-1]) != 1:
        raise ShapeError("network must end in a flat output (Dense or SoftmaxOutput)")
    return shapes


def _param_shapes(spec):
    """Yield ``(index, weight_shape, bias_shape)`` for each parameterized layer."""
    shapes = infer_shapes(spec)
    prev = (spec.input_channels, spec.input_length)
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv1D):
            yield i, (layer.filters, prev[0], layer.kernel_width), (layer.filters,)
        elif isinstance(layer, (Dense, SoftmaxOutput)):
            yield i, (prev[0], layer.units), (layer.units,)
        prev = shapes[i]


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------

@dataclass
class LayerParams:
    weights: np.ndarray
    biases: np.ndarray
    trainable: bool = True

    def copy(self):
        return LayerParams(self.weights.copy(), self.biases.copy(), self.trainable)


@dataclass
class NetworkParams:
    spec: NetworkSpec
    layers: dict = field(default_factory=dict)  # layer index -> LayerParams

    def copy(self):
        return NetworkParams(self.spec, {i: p.copy() for i, p in self.layers.items()})

    def trainable_indices(self):
        return [i for i, p in self.layers.items() if p.trainable]


def init_params(spec, seed):
    """He-normal for layers feeding ReLU, Glorot-uniform otherwise; zero biases."""
    rng = np.random.default_rng(seed)
    layers = {}
    for i, wshape, bshape in _param_shapes(spec):
        if len(wshape) == 3:
            fan_in, fan_out = wshape[1] * wshape[2], wshape[0] * wshape[2]
        else:
            fan_in, fan_out = wshape
        nxt = spec.layers[i + 1] if i + 1 < len(spec.layers) else None
        if isinstance(nxt, ReLU):
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=wshape)
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=wshape)
        layers[i] = LayerParams(w, np.zeros(bshape))
    return NetworkParams(spec, layers)


def param_count(params):
    """Return ``(total, trainable)`` scalar parameter counts."""
    total = trainable = 0
    for p in params.layers.values():
        n = p.weights.size + p.biases.size
        total += n
        if p.trainable:
            trainable += n
    return total, trainable


# --------------------------------------------------------------------------
# forward / backward
# --------------------------------------------------------------------------

def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params, x):
    """Run the network on one sample ``(length,)`` or a batch ``(n, length)``.

    Returns ``(output, cache)``; ``output`` has the same leading batch
    structure as ``x``.
    """
    spec = params.spec
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim == 2:
        x = x.reshape(x.shape[0], spec.input_channels, -1)
    if x.shape[1:] != (spec.input_channels, spec.input_length):
        raise ShapeError(f"input shape {x.shape[1:]} does not match network input "
                         f"{(spec.input_channels, spec.input_length)}")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite value in network input")
    k = kernels.active
    cache = []
    h = x
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv1D):
            p = params.layers[i]
            cache.append(h)
            h = k.conv1d_forward(h, p.weights, p.biases, layer.stride)
        elif isinstance(layer, MaxPool1D):
            y, idx = k.maxpool1d_forward(h, layer.width)
            cache.append((idx, h.shape[2]))
            h = y
        elif isinstance(layer, Flatten):
            cache.append(h.shape)
            h = h.reshape(h.shape[0], -1)
        elif isinstance(layer, ReLU):
            cache.append(h > 0)
            h = np.maximum(h, 0.0)
        elif isinstance(layer, Dense):
            p = params.layers[i]
            cache.append(h)
            h = h @ p.weights + p.biases
        elif isinstance(layer, SoftmaxOutput):
            p = params.layers[i]
            prob = _softmax(h @ p.weights + p.biases)
            cache.append((h, prob))
            h = prob
    return (h[0] if single else h), cache


def backward(params, cache, output_gradient):
    """Gradients of a scalar objective given ``d objective / d output``.

    Returns ``{layer_index: (dW, db)}`` for trainable layers only.
    """
    spec = params.spec
    g = np.asarray(output_gradient, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if len(cache) != len(spec.layers):
        raise ShapeError("cache does not belong to this network")
    expected = cache[-1][1].shape if isinstance(spec.layers[-1], SoftmaxOutput) else None
    if expected is not None and g.shape != expected:
        raise ShapeError(f"output gradient shape {g.shape} != output shape {expected}")
    k = kernels.active
    grads = {}
    # first layer whose input gradient matters: nothing below a frozen prefix needs dx
    needed = min(params.trainable_indices(), default=len(spec.layers))
    for i in range(len(spec.layers) - 1, -1, -1):
        if i < needed:
            break
        layer, c = spec.layers[i], cache[i]
        p = params.layers.get(i)
        if isinstance(layer, SoftmaxOutput):
            h, prob = c
            dz = prob * (g - np.sum(g * prob, axis=1, keepdims=True))
            if p.trainable:
                grads[i] = (h.T @ dz, dz.sum(axis=0))
            g = dz @ p.weights.T
        elif isinstance(layer, Dense):
            if g.shape[1] != p.weights.shape[1]:
                raise ShapeError(f"gradient width {g.shape[1]} != layer {i} units")
            if p.trainable:
                grads[i] = (c.T @ g, g.sum(axis=0))
            g = g @ p.weights.T
        elif isinstance(layer, ReLU):
            g = g * c
        elif isinstance(layer, Flatten):
            g = g.reshape(c)
        elif isinstance(layer, MaxPool1D):
            idx, in_len = c
            g = k.maxpool1d_backward(np.ascontiguousarray(g), idx, layer.width, in_len)
        elif isinstance(layer, Conv1D):
            dx, dw, db = k.conv1d_backward(c, p.weights, np.ascontiguousarray(g), layer.stride)
            if p.trainable:
                grads[i] = (dw, db)
            g = dx
    return grads


# --------------------------------------------------------------------------
# Adam
# --------------------------------------------------------------------------

@dataclass
class AdamState:
    m: dict
    v: dict
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(params, beta1=0.9, beta2=0.999, epsilon=1e-8):
    m = {i: (np.zeros_like(p.weights), np.zeros_like(p.biases))
         for i, p in params.layers.items() if p.trainable}
    v = {i: (np.zeros_like(a), np.zeros_like(b)) for i, (a, b) in m.items()}
    return AdamState(m, v, 0, beta1, beta2, epsilon)


def adam_step(params, grads, state, learning_rate):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``.

    Frozen layers are carried over by reference and never touched.
    """
    trainable = params.trainable_indices()
    if sorted(grads) != sorted(trainable):
        raise ShapeError(f"gradients for layers {sorted(grads)} but trainable layers are {trainable}")
    for i in trainable:
        dw, db = grads[i]
        p = params.layers[i]
        if dw.shape != p.weights.shape or db.shape != p.biases.shape:
            raise ShapeError(f"layer {i}: gradient shapes {dw.shape}/{db.shape} do not match parameters")
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            raise NumericError(f"layer {i}: non-finite gradient")
    b1, b2, eps = state.beta1, state.beta2, state.epsilon
    t = state.step_count + 1
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new_layers = dict(params.layers)
    new_m, new_v = {}, {}
    for i in trainable:
        p = params.layers[i]
        updated = []
        ms, vs = [], []
        for value, grad, m, v in zip((p.weights, p.biases), grads[i], state.m[i], state.v[i]):
            m = b1 * m + (1.0 - b1) * grad
            v = b2 * v + (1.0 - b2) * (grad * grad)
            updated.append(value - learning_rate * (m / bc1) / (np.sqrt(v / bc2) + eps))
            ms.append(m)
            vs.append(v)
        new_layers[i] = LayerParams(updated[0], updated[1], True)
        new_m[i], new_v[i] = tuple(ms), tuple(vs)
    return NetworkParams(params.spec, new_layers), replace(state, m=new_m, v=new_v, step_count=t)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def model_to_container(params, extra=None):
    spec = params.spec
    layers = []
    for i, layer in enumerate(spec.layers):
        d = layer_to_dict(layer)
        if i in params.layers:
            d["trainable"] = bool(params.layers[i].trainable)
        layers.append(d)
    meta = {
        "artifact": "model",
        "input_length": spec.input_length,
        "input_channels": spec.input_channels,
        "layer_count": len(layers),
        "layers": layers,
        "extra": extra or {},
    }
    arrays = {}
    for i, p in sorted(params.layers.items()):
        arrays[f"layer{i}.weights"] = p.weights
        arrays[f"layer{i}.biases"] = p.biases
    return meta, arrays


def model_from_container(meta, arrays):
    if meta.get("artifact") != "model":
        raise InconsistentModelError(f"container holds {meta.get('artifact')!r}, not a model")
    try:
        layer_dicts = meta["layers"]
        if meta["layer_count"] != len(layer_dicts):
            raise InconsistentModelError("layer_count disagrees with the layer list")
        flags = {i: d.get("trainable", True) for i, d in enumerate(layer_dicts)}
        layers = [layer_from_dict({k: v for k, v in d.items() if k != "trainable"}) for d in layer_dicts]
        spec = NetworkSpec(meta["input_length"], layers, meta["input_channels"])
        plist = list(_param_shapes(spec))
    except (KeyError, TypeError, ShapeError) as exc:
        raise InconsistentModelError(f"bad layer description: {exc}") from None
    expected = {f"layer{i}.{part}" for i, _, _ in plist for part in ("weights", "biases")}
    if set(arrays) != expected:
        raise InconsistentModelError(f"tensor names {sorted(arrays)} do not match layers")
    out = {}
    for i, wshape, bshape in plist:
        w, b = arrays[f"layer{i}.weights"], arrays[f"layer{i}.biases"]
        if w.shape != wshape or b.shape != bshape:
            raise InconsistentModelError(
                f"layer {i}: stored shapes {w.shape}/{b.shape}, expected {wshape}/{bshape}")
        out[i] = LayerParams(np.array(w, dtype=np.float64), np.array(b, dtype=np.float64), bool(flags[i]))
    return spec, NetworkParams(spec, out)


def save_params(params, spec, path, extra=None):
    if spec != params.spec:
        raise ShapeError("spec does not match the parameters' spec")
    container.write(path, *model_to_container(params, extra))


def load_params(path, with_extra=False):
    """Read a model file; returns ``(spec, params)`` (plus ``extra`` if asked)."""
    meta, arrays = container.read(path)
    spec, params = model_from_container(meta, arrays)
    if with_extra:
        return spec, params, meta.get("extra", {})
    return spec, params
