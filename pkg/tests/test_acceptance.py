"""One test per acceptance criterion, run at the stated tolerance.

A pass/fail line per criterion is printed in the terminal summary.
"""

import math
import os
import time
from types import SimpleNamespace

import numpy as np
import pytest

from cmdp_ids import agent, cli, container, data, nn, transfer
from cmdp_ids.env import ClassificationEnv
from cmdp_ids.errors import FormatError
from cmdp_ids.evaluation import EvaluationReport, confusion_matrix, evaluate
from cmdp_ids.losses import DISTRIBUTION, REGRESSION, TargetVector, loss_and_grad
from helpers import gradient_check, random_small_spec
from tabular import tabular_dqn, value_iteration


def test_criterion_01_gradient_check(note):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        spec = random_small_spec(rng)
        params = nn.init_params(spec, int(rng.integers(2**31)))
        for p in params.layers.values():
            p.biases[:] = rng.normal(scale=0.1, size=p.biases.shape)
        x = rng.normal(size=(3, spec.input_channels * spec.input_length))
        worst = max(worst, gradient_check(params, x, rng.normal(size=(3, spec.n_outputs))))
    elapsed = time.perf_counter() - t0
    note(f"max relative error {worst:.2e} (< 1e-4) over 100 nets in {elapsed:.1f}s (< 30s)")
    assert worst < 1e-4
    assert elapsed < 30


def test_criterion_02_loss_oracles(note):
    mse = loss_and_grad("mse", np.array([1.0, 0.0]), TargetVector([0.0, 1.0], REGRESSION))[0]
    cce = loss_and_grad("cce", np.array([0.1, 0.8, 0.1]), TargetVector([0.0, 1.0, 0.0], DISTRIBUTION))[0]
    p = np.array([0.25, 0.25, 0.5])
    kl = loss_and_grad("kld", p, TargetVector(p, DISTRIBUTION))[0]
    h1 = loss_and_grad("huber", np.array([0.5]), TargetVector([0.0], REGRESSION))[0]
    h2 = loss_and_grad("huber", np.array([2.0]), TargetVector([0.0], REGRESSION))[0]
    note(f"mse={mse} cce={cce:.12f} kl={kl} huber={h1}/{h2}")
    assert mse == 1.0
    assert abs(cce + math.log(0.8)) <= 1e-9
    assert kl == 0.0
    assert (h1, h2) == (0.125, 1.5)


def test_criterion_03_environment(note):
    rng = np.random.default_rng(7)
    traces = 0
    for _ in range(200):
        n, k = int(rng.integers(1, 60)), int(rng.integers(2, 7))
        labels = rng.integers(0, k, n)
        env = ClassificationEnv(rng.normal(size=(n, 3)), labels, k)
        seed = int(rng.integers(2**31))
        orders, totals = [], []
        for policy in ("random", "oracle", "constant"):
            state, obs = env.reset(seed)
            order, actions, rewards = [], [], []
            while obs is not None:
                order.append(state.index)
                a = {"random": int(rng.integers(k)), "oracle": env.label(state), "constant": 0}[policy]
                r, obs = env.step(state, a)
                assert r in (1.0, -1.0)
                actions.append(a)
                rewards.append(r)
            recount = sum(1 for i, a in zip(order, actions) if labels[i] == a)
            assert sum(rewards) == 2 * recount - n
            assert [r > 0 for r in rewards] == [labels[i] == a for i, a in zip(order, actions)]
            orders.append(order)
            totals.append(sum(rewards))
            traces += 1
        assert orders[0] == orders[1] == orders[2]
        assert sorted(orders[0]) == list(range(n))
        assert totals[1] == n
    note(f"{traces} randomized traces: rewards in {{+1,-1}}, order action-independent, "
         "sum = 2*correct - N")


def test_criterion_04_tabular(note):
    t0 = time.perf_counter()
    errors = {}
    for gamma in (0.001, 0.5, 0.9):
        errors[gamma] = float(np.max(np.abs(tabular_dqn(gamma) - value_iteration(gamma))))
    elapsed = time.perf_counter() - t0
    note(f"max |Q - Q*| {max(errors.values()):.1e} (< 1e-6) in {elapsed:.2f}s (< 5s)")
    assert max(errors.values()) < 1e-6
    assert elapsed < 5


@pytest.mark.parametrize("algorithm", ["dqn", "ddqn"])
def test_criterion_05_synthetic_convergence(algorithm, synthetic_split, note):
    train_set, test_set = synthetic_split
    assert len(train_set) + len(test_set) == 600 and train_set.n_classes == 3
    cfg = agent.AgentConfig(algorithm=algorithm, loss="cce", epochs=25, seed=0)
    t0 = time.perf_counter()
    params, log = agent.train(train_set, cfg)
    elapsed = time.perf_counter() - t0
    train_acc = log.records[-1].train_accuracy
    test_acc = evaluate(params, test_set).accuracy
    note(f"{algorithm}: train {train_acc:.4f} (>= 0.99), test {test_acc:.4f} (>= 0.97), "
         f"{elapsed:.0f}s (< 120s)")
    assert len(log.records) == 25
    assert train_acc >= 0.99
    assert test_acc >= 0.97
    assert elapsed < 120


UNSW_DIR = os.environ.get("CMDP_IDS_UNSW_DIR")
BOTIOT_DIR = os.environ.get("CMDP_IDS_BOTIOT_DIR")


@pytest.mark.paper
@pytest.mark.skipif(not (UNSW_DIR and BOTIOT_DIR),
                    reason="needs CMDP_IDS_UNSW_DIR and CMDP_IDS_BOTIOT_DIR pointing at the raw CSVs")
@pytest.mark.parametrize("algorithm, transfer_target", [("dqn", 0.9996), ("ddqn", 0.9984)])
def test_criterion_06_real_data_reproduction(algorithm, transfer_target, note):
    def load(directory, schema, cleaner):
        paths = sorted(os.path.join(directory, f) for f in os.listdir(directory) if f.lower().endswith(".csv"))
        table = data.concat_tables([data.load_csv(p, schema) for p in paths])
        cleaned, _ = cleaner(table)
        return data.prepare(cleaned, 0.8, seed=0)

    cfg = agent.AgentConfig(algorithm=algorithm, loss="cce")
    unsw_train, unsw_test = load(UNSW_DIR, data.UNSW_SCHEMA, data.clean_unsw)
    source, _ = agent.train(unsw_train, cfg)
    acc = evaluate(source, unsw_test).accuracy
    bot_train, bot_test = load(BOTIOT_DIR, data.BOTIOT_SCHEMA, data.clean_botiot)
    _, params = transfer.build_transfer_net(source, bot_train.n_classes, bot_train.n_features)
    moved, _ = agent.train(bot_train, cfg, params=params)
    t_acc = evaluate(moved, bot_test).accuracy
    note(f"{algorithm}: UNSW {acc:.4f} (0.9917 +/- 0.01), BoT-IoT {t_acc:.4f} ({transfer_target} +/- 0.005)")
    assert abs(acc - 0.9917) <= 0.01
    assert abs(t_acc - transfer_target) <= 0.005


def test_criterion_07_transfer_freeze(synthetic_split, note):
    train_set, _ = synthetic_split
    source, _ = agent.train(train_set, agent.AgentConfig(epochs=2, seed=0))
    snapshot = source.copy()
    rng = np.random.default_rng(11)
    k, width = 5, 12
    labels = np.arange(300) % k
    target = SimpleNamespace(matrix=np.eye(k, width)[labels] * 3 + rng.normal(size=(300, width)),
                             labels=labels, n_classes=k)
    _, params = transfer.build_transfer_net(source, k, width)
    trained, _ = agent.train(target, agent.AgentConfig(epochs=3, batch_size=64, seed=1), params=params)
    frozen = [i for i, p in trained.layers.items() if not p.trainable]
    assert frozen == [0, 2, 5]
    for i in frozen:
        assert trained.layers[i].weights.tobytes() == snapshot.layers[i].weights.tobytes()
        assert trained.layers[i].biases.tobytes() == snapshot.layers[i].biases.tobytes()
    assert transfer.frozen_unchanged(snapshot, trained)
    counts = transfer.accounting(trained)
    note(f"frozen tensors bitwise equal; {counts['total']} total / {counts['trainable']} trainable "
         f"(published {counts['published_total']} / {counts['published_trainable']}, informational)")


def test_criterion_08_metrics_identity(note):
    rng = np.random.default_rng(8)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(1, 80))
        y_true, y_pred = rng.integers(0, k, n), rng.integers(0, k, n)
        r = EvaluationReport.from_confusion(confusion_matrix(y_true, y_pred, k))
        assert abs(r.recall - r.accuracy) <= 1e-12
        correct = sum(int(t == p) for t, p in zip(y_true, y_pred))
        assert r.accuracy == correct / n
        prec = 0.0
        for c in range(k):
            tp = sum(int(t == c and p == c) for t, p in zip(y_true, y_pred))
            pp = sum(int(p == c) for p in y_pred)
            sup = sum(int(t == c) for t in y_true)
            prec += sup / n * (tp / pp if pp else 0.0)
            assert r.support[c] == sup
        assert abs(r.precision - prec) <= 1e-12
    note("1000 random confusion matrices: weighted recall == accuracy, metrics match recount")


def _snapshot(directory):
    out = {}
    for root, _, files in os.walk(directory):
        for f in files:
            path = os.path.join(root, f)
            with open(path, "rb") as fh:
                out[os.path.relpath(path, directory)] = fh.read()
    return out


def test_criterion_09_determinism(tmp_path, note):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 5\n[data]\nn_samples = 150\n[agent]\nepochs = 2\nbatch_size = 32\n")
    src, tgt = str(tmp_path / "src"), str(tmp_path / "tgt")
    model = os.path.join(src, "model.bin")
    commands = [
        ["preprocess", "--config", str(cfg), "--out", src],
        ["train", "--config", str(cfg), "--out", src],
        ["train", "--config", str(cfg), "--out", os.path.join(src, "ddqn"), "--algo", "ddqn",
         "--dataset", os.path.join(src, "dataset.bin")],
        ["train", "--config", str(cfg), "--out", os.path.join(src, "sweep"), "--loss", "all",
         "--dataset", os.path.join(src, "dataset.bin")],
        ["preprocess", "--config", str(cfg), "--out", tgt, "--seed", "9"],
        ["transfer", "--config", str(cfg), "--out", tgt, "--source", model],
        ["evaluate", "--config", str(cfg), "--model", model, "--dataset", os.path.join(src, "dataset.bin"),
         "--out", os.path.join(src, "eval")],
    ]

    def run_all():
        for argv in commands:
            assert cli.main(["-q", *argv]) == 0, argv
        return _snapshot(tmp_path)

    first = run_all()
    second = run_all()
    assert sorted(first) == sorted(second)
    differing = [name for name in first if first[name] != second[name]]
    note(f"{len(commands)} commands, {len(first)} artifacts byte-identical on rerun")
    assert differing == []


def test_criterion_10_serialization(tmp_path, note):
    rng = np.random.default_rng(10)
    n_models = 50
    for m in range(n_models):
        spec = random_small_spec(rng)
        p = nn.init_params(spec, m)
        for layer in p.layers.values():
            layer.biases[:] = rng.normal(size=layer.biases.shape)
            layer.trainable = bool(rng.random() < 0.7)
        path = tmp_path / f"m{m}.bin"
        nn.save_params(p, spec, path)
        spec2, q = nn.load_params(path)
        assert spec2 == spec
        for i in p.layers:
            assert q.layers[i].weights.tobytes() == p.layers[i].weights.tobytes()
            assert q.layers[i].biases.tobytes() == p.layers[i].biases.tobytes()
            assert q.layers[i].trainable == p.layers[i].trainable
    raw = (tmp_path / "m0.bin").read_bytes()
    damaged = 0
    for cut in range(1, len(raw)):
        with pytest.raises(FormatError):
            container.loads(raw[:cut])
        damaged += 1
    for pos in range(len(raw)):
        blob = bytearray(raw)
        blob[pos] ^= 0x5A
        with pytest.raises(FormatError):
            nn.model_from_container(*container.loads(bytes(blob)))
        damaged += 1
    note(f"{n_models} random models round-trip bit-exact; {damaged} truncated/flipped files "
         "rejected with format errors")
