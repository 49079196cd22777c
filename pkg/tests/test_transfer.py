from types import SimpleNamespace

import numpy as np
import pytest

from cmdp_ids import agent, nn, transfer
from cmdp_ids.errors import PlanError


def target_dataset(n=100, k=5, f=10, seed=3):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % k
    return SimpleNamespace(matrix=np.eye(k, f)[labels] * 4 + rng.normal(size=(n, f)), labels=labels,
                           n_classes=k)


def test_transfer_net_layout_and_counts():
    source = nn.init_params(nn.unsw_qnet(8, 3), 0)
    spec, params = transfer.build_transfer_net(source, 5, input_length=10)
    assert [type(layer).__name__ for layer in spec.layers[9:]] == [
        "Dense", "ReLU", "Dense", "ReLU", "SoftmaxOutput"]
    assert [i for i, p in params.layers.items() if not p.trainable] == [0, 2, 5]
    # input 10: conv 9, conv 8, pool 4, conv 3, pool 1 -> flatten 64
    counts = transfer.accounting(params)
    assert counts["frozen"] == (16 * 2 + 16) + (32 * 16 * 2 + 32) + (64 * 32 * 2 + 64)
    assert counts["trainable"] == (64 * 5 + 5) + (5 * 5 + 5) + (5 * 5 + 5)
    assert transfer.frozen_unchanged(source, params)


def test_frozen_backbone_bitwise_after_training():
    source = nn.init_params(nn.unsw_qnet(8, 3), 0)
    snapshot = source.copy()
    _, params = transfer.build_transfer_net(source, 5, input_length=10)
    cfg = agent.AgentConfig(epochs=2, batch_size=16, buffer_capacity=200)
    trained, _ = agent.train(target_dataset(), cfg, params=params)
    assert transfer.frozen_unchanged(source, trained)
    for i in (0, 2, 5):
        assert trained.layers[i].weights.tobytes() == snapshot.layers[i].weights.tobytes()
    assert not np.array_equal(trained.layers[9].weights, params.layers[9].weights)


def test_transfer_plan_errors():
    source = nn.init_params(nn.unsw_qnet(8, 3), 0)
    with pytest.raises(PlanError):
        transfer.build_transfer_net(source, 1)
    flat = nn.init_params(nn.NetworkSpec(4, (nn.Flatten(), nn.SoftmaxOutput(2))), 0)
    with pytest.raises(PlanError):
        transfer.build_transfer_net(flat, 3)
