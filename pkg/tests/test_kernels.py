import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmdp_ids import kernels

NB = kernels.get_backend("numba")
NP = kernels.get_backend("numpy")


def naive_conv(x, w, b, stride):
    n, c, length = x.shape
    f, _, k = w.shape
    lout = (length - k) // stride + 1
    y = np.zeros((n, f, lout))
    for i in range(n):
        for o in range(f):
            for t in range(lout):
                y[i, o, t] = b[o] + np.sum(w[o] * x[i, :, t * stride:t * stride + k])
    return y


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 3), c=st.integers(1, 3), f=st.integers(1, 4), k=st.integers(1, 3),
       extra=st.integers(0, 6), stride=st.integers(1, 2), seed=st.integers(0, 2**31))
def test_conv_backends_agree_with_naive(n, c, f, k, extra, stride, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, c, k + extra))
    w = rng.normal(size=(f, c, k))
    b = rng.normal(size=f)
    ref = naive_conv(x, w, b, stride)
    np.testing.assert_allclose(NP.conv1d_forward(x, w, b, stride), ref, atol=1e-12)
    np.testing.assert_allclose(NB.conv1d_forward(x, w, b, stride), ref, atol=1e-12)
    dy = rng.normal(size=ref.shape)
    for a, bb in zip(NP.conv1d_backward(x, w, dy, stride), NB.conv1d_backward(x, w, dy, stride)):
        np.testing.assert_allclose(a, bb, atol=1e-12)


def test_conv_backward_matches_adjoint():
    # <dy, conv(x)> is linear in x and w, so its gradients are exact adjoints
    rng = np.random.default_rng(1)
    x, w, b = rng.normal(size=(2, 3, 9)), rng.normal(size=(4, 3, 2)), np.zeros(4)
    dy = rng.normal(size=(2, 4, 8))
    dx, dw, db = NP.conv1d_backward(x, w, dy, 1)
    h = 1e-6
    e = np.zeros_like(x)
    e[1, 2, 4] = h
    num = (np.sum(dy * NP.conv1d_forward(x + e, w, b, 1)) - np.sum(dy * NP.conv1d_forward(x - e, w, b, 1))) / (2 * h)
    assert num == pytest.approx(dx[1, 2, 4], rel=1e-7)
    np.testing.assert_allclose(db, dy.sum(axis=(0, 2)))


def test_maxpool_first_index_on_ties_and_truncation():
    x = np.array([[[3.0, 3.0, 1.0, 5.0, 9.0]]])
    for be in (NP, NB):
        y, idx = be.maxpool1d_forward(x, 2)
        np.testing.assert_array_equal(y, [[[3.0, 5.0]]])
        np.testing.assert_array_equal(idx, [[[0, 1]]])
        dx = be.maxpool1d_backward(np.array([[[1.0, 2.0]]]), idx, 2, 5)
        np.testing.assert_array_equal(dx, [[[1.0, 0.0, 0.0, 2.0, 0.0]]])


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 3), c=st.integers(1, 3), length=st.integers(1, 12), width=st.integers(1, 4),
       seed=st.integers(0, 2**31))
def test_maxpool_backends_agree(n, c, length, width, seed):
    if length < width:
        return
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, c, length))
    y1, i1 = NP.maxpool1d_forward(x, width)
    y2, i2 = NB.maxpool1d_forward(x, width)
    np.testing.assert_array_equal(y1, y2)
    np.testing.assert_array_equal(i1, i2)
    dy = rng.normal(size=y1.shape)
    np.testing.assert_array_equal(NP.maxpool1d_backward(dy, i1, width, length),
                                  NB.maxpool1d_backward(dy, i2, width, length))


def test_backend_selection(monkeypatch):
    assert kernels.get_backend("numpy") is NP
    with pytest.raises(ValueError):
        kernels.get_backend("cuda")
    monkeypatch.setenv("CMDP_IDS_BACKEND", "numpy")
    assert kernels._select_default() is NP
    monkeypatch.setenv("CMDP_IDS_BACKEND", "NUMBA")
    assert kernels._select_default() is NB
    monkeypatch.delenv("CMDP_IDS_BACKEND")
    assert kernels._select_default() is NB
