"""Convolution and max-pool kernels with a numba path and a pure-numpy path.

The active backend is chosen once at import time from ``CMDP_IDS_BACKEND``
(``numba`` or ``numpy``). When the variable is unset, numba is used if it
imports cleanly. Both implementations live side by side so tests and the
benchmark can compare them directly through :func:`get_backend`.

Array layout is ``(batch, channels, length)`` for activations and
``(filters, in_channels, kernel_width)`` for convolution weights.
"""

import os
from types import SimpleNamespace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _np_conv1d_forward(x, w, b, stride):
    n, c, _ = x.shape
    f, _, k = w.shape
    win = sliding_window_view(x, k, axis=2)[:, :, ::stride]  # (n, c, lout, k)
    lout = win.shape[2]
    cols = win.transpose(0, 2, 1, 3).reshape(n * lout, c * k)
    y = cols @ w.reshape(f, c * k).T + b
    return np.ascontiguousarray(y.reshape(n, lout, f).transpose(0, 2, 1))


def _np_conv1d_backward(x, w, dy, stride):
    n, c, _ = x.shape
    f, _, k = w.shape
    lout = dy.shape[2]
    win = sliding_window_view(x, k, axis=2)[:, :, ::stride][:, :, :lout]
    cols = win.transpose(0, 2, 1, 3).reshape(n * lout, c * k)
    dy_mat = dy.transpose(0, 2, 1).reshape(n * lout, f)
    dw = (dy_mat.T @ cols).reshape(f, c, k)
    db = dy.sum(axis=(0, 2))
    dcols = (dy_mat @ w.reshape(f, c * k)).reshape(n, lout, c, k)
    dx = np.zeros_like(x)
    span = stride * (lout - 1) + 1
    for j in range(k):
        dx[:, :, j:j + span:stride] += dcols[:, :, :, j].transpose(0, 2, 1)
    return dx, dw, db


def _np_maxpool1d_forward(x, width):
    n, c, length = x.shape
    lout = length // width
    xr = x[:, :, :lout * width].reshape(n, c, lout, width)
    idx = np.argmax(xr, axis=3)  # first maximum on ties
    return xr.max(axis=3), idx


def _np_maxpool1d_backward(dy, idx, width, in_length):
    n, c, lout = dy.shape
    dx = np.zeros((n, c, in_length))
    pos = idx + width * np.arange(lout)
    np.put_along_axis(dx, pos, dy, axis=2)
    return dx


NUMPY = SimpleNamespace(
    name="numpy",
    conv1d_forward=_np_conv1d_forward,
    conv1d_backward=_np_conv1d_backward,
    maxpool1d_forward=_np_maxpool1d_forward,
    maxpool1d_backward=_np_maxpool1d_backward,
)


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_conv1d_forward(x, w, b, stride):
        n, c, length = x.shape
        f, _, k = w.shape
        lout = (length - k) // stride + 1
        ck = c * k
        cols = np.empty((n * lout, ck))
        for i in range(n):
            for t in range(lout):
                row = i * lout + t
                base = t * stride
                for ch in range(c):
                    for j in range(k):
                        cols[row, ch * k + j] = x[i, ch, base + j]
        z = np.dot(cols, np.ascontiguousarray(w).reshape(f, ck).T)
        y = np.empty((n, f, lout))
        for i in range(n):
            for t in range(lout):
                row = i * lout + t
                for o in range(f):
                    y[i, o, t] = z[row, o] + b[o]
        return y

    @njit(cache=True)
    def _nb_conv1d_backward(x, w, dy, stride):
        # Skips zero upstream gradients, which ReLU makes common; that beats
        # a dense BLAS product at these sizes.
        n, c, _ = x.shape
        f, _, k = w.shape
        lout = dy.shape[2]
        ck = c * k
        wf = np.ascontiguousarray(w).reshape(f, ck)
        dwf = np.zeros((f, ck))
        dx = np.zeros_like(x)
        db = np.zeros(f)
        col = np.empty(ck)
        dcol = np.empty(ck)
        for i in range(n):
            for t in range(lout):
                base = t * stride
                for ch in range(c):
                    for j in range(k):
                        col[ch * k + j] = x[i, ch, base + j]
                dcol[:] = 0.0
                for o in range(f):
                    go = dy[i, o, t]
                    if go == 0.0:
                        continue
                    db[o] += go
                    for m in range(ck):
                        dwf[o, m] += go * col[m]
                        dcol[m] += go * wf[o, m]
                for ch in range(c):
                    for j in range(k):
                        dx[i, ch, base + j] += dcol[ch * k + j]
        return dx, dwf.reshape(f, c, k), db

    @njit(cache=True)
    def _nb_maxpool1d_forward(x, width):
        n, c, length = x.shape
        lout = length // width
        y = np.empty((n, c, lout))
        idx = np.empty((n, c, lout), dtype=np.int64)
        for i in range(n):
            for ch in range(c):
                for t in range(lout):
                    base = t * width
                    best = x[i, ch, base]
                    arg = 0
                    for j in range(1, width):
                        v = x[i, ch, base + j]
                        if v > best:
                            best = v
                            arg = j
                    y[i, ch, t] = best
                    idx[i, ch, t] = arg
        return y, idx

    @njit(cache=True)
    def _nb_maxpool1d_backward(dy, idx, width, in_length):
        n, c, lout = dy.shape
        dx = np.zeros((n, c, in_length))
        for i in range(n):
            for ch in range(c):
                for t in range(lout):
                    dx[i, ch, t * width + idx[i, ch, t]] = dy[i, ch, t]
        return dx

    NUMBA = SimpleNamespace(
        name="numba",
        conv1d_forward=_nb_conv1d_forward,
        conv1d_backward=_nb_conv1d_backward,
        maxpool1d_forward=_nb_maxpool1d_forward,
        maxpool1d_backward=_nb_maxpool1d_backward,
    )
else:  # pragma: no cover
    NUMBA = None


def get_backend(name):
    """Return the kernel namespace for ``name`` ("numba" or "numpy")."""
    if name == "numpy":
        return NUMPY
    if name == "numba":
        if NUMBA is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return NUMBA
    raise ValueError(f"unknown kernel backend {name!r}")


def _select_default():
    requested = os.environ.get("CMDP_IDS_BACKEND", "").strip().lower()
    if requested:
        return get_backend(requested)
    return NUMBA if NUMBA is not None else NUMPY


active = _select_default()
