"""DQN / DDQN agents trained on the classification MDP with experience replay."""

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import losses, nn
from .env import ClassificationEnv
from .errors import ConfigError

log = logging.getLogger(__name__)

ALGORITHMS = ("dqn", "ddqn")


@dataclass
class AgentConfig:
    algorithm: str = "dqn"
    batch_size: int = 256
    epochs: int = 25
    epsilon_initial: float = 0.8
    epsilon_decay: float = 0.95
    epsilon_min: float = 0.01
    gamma: float = 0.001
    learning_rate: float = 0.001
    alpha_initial: float = 1.0
    alpha_decay: float = 0.99
    buffer_capacity: int = 10_000
    target_sync_period: int = 200
    loss: str = "cce"
    huber_delta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        self.algorithm = self.algorithm.lower()
        self.loss = self.loss.lower()
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.loss not in losses.LOSS_NAMES:
            raise ConfigError(f"loss must be one of {losses.LOSS_NAMES}, got {self.loss!r}")
        for name in ("gamma", "epsilon_initial", "epsilon_min", "alpha_initial",
                     "epsilon_decay", "alpha_decay"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        for name in ("batch_size", "buffer_capacity", "target_sync_period"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.huber_delta <= 0:
            raise ConfigError("huber_delta must be > 0")

    @property
    def loss_kind(self):
        return losses.LossKind(self.loss, self.huber_delta)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


# --------------------------------------------------------------------------
# replay
# --------------------------------------------------------------------------

@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray | None  # None marks the end of the episode


class ReplayBuffer:
    """Fixed-capacity ring of transitions; uniform sampling with replacement."""

    def __init__(self, capacity, n_features):
        if capacity < 1:
            raise ConfigError("buffer capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, n_features))
        self.next_states = np.zeros((capacity, n_features))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity, dtype=bool)
        self.inserted = 0

    def __len__(self):
        return min(self.inserted, self.capacity)

    def push(self, state, action, reward, next_state):
        i = self.inserted % self.capacity
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        if next_state is None:
            self.next_states[i] = 0.0
            self.dones[i] = True
        else:
            self.next_states[i] = next_state
            self.dones[i] = False
        self.inserted += 1

    def add(self, transition):
        self.push(transition.state, transition.action, transition.reward, transition.next_state)

    def sample(self, batch_size, rng):
        """Return a dict of batched arrays drawn uniformly with replacement."""
        if len(self) == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self), size=batch_size)
        return {
            "states": self.states[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_states": self.next_states[idx],
            "dones": self.dones[idx],
        }

    def contents(self):
        """All stored transitions, oldest first."""
        n = len(self)
        start = self.inserted - n
        out = []
        for k in range(start, self.inserted):
            i = k % self.capacity
            nxt = None if self.dones[i] else self.next_states[i].copy()
            out.append(Transition(self.states[i].copy(), int(self.actions[i]), float(self.rewards[i]), nxt))
        return out


# --------------------------------------------------------------------------
# policy and targets
# --------------------------------------------------------------------------

def select_action(q_values, epsilon, rng):
    """Epsilon-greedy: random action with probability ``epsilon``, else argmax."""
    if rng.random() < epsilon:
        return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def dqn_targets(rewards, dones, next_q, gamma):
    """``r + gamma * max_a' Q(s', a')``, with the bootstrap dropped at episode end."""
    boot = np.max(next_q, axis=1)
    return np.asarray(rewards) + gamma * np.where(dones, 0.0, boot)


def ddqn_targets(rewards, dones, q_sa, next_q_current, next_q_target, gamma, alpha):
    """Alpha-blended double estimator.

    The greedy next action comes from the target network, its value is read
    from the current network, and the result is blended with the current
    estimate ``q_sa``::

        (1 - alpha) * q_sa + alpha * (r + gamma * Q_cur(s', argmax_a' Q_tgt(s', a')))
    """
    best = np.argmax(next_q_target, axis=1)
    boot = next_q_current[np.arange(len(best)), best]
    boot = np.where(dones, 0.0, boot)
    return (1.0 - alpha) * np.asarray(q_sa) + alpha * (np.asarray(rewards) + gamma * boot)


def _q(params, x):
    return nn.forward(params, x)[0]


def dqn_target(transition, gamma, current_params):
    if transition.next_state is None:
        return float(transition.reward)
    next_q = _q(current_params, transition.next_state)[None, :]
    return float(dqn_targets([transition.reward], [False], next_q, gamma)[0])


def ddqn_target(transition, gamma, alpha, current_params, target_params):
    q_sa = _q(current_params, transition.state)[transition.action]
    done = transition.next_state is None
    if done:
        width = current_params.spec.n_outputs
        nq_cur = nq_tgt = np.zeros((1, width))
    else:
        nq_cur = _q(current_params, transition.next_state)[None, :]
        nq_tgt = _q(target_params, transition.next_state)[None, :]
    return float(ddqn_targets([transition.reward], [done], [q_sa], nq_cur, nq_tgt, gamma, alpha)[0])


def sync_target(current_params):
    """Hard copy of the current network; later updates do not alias it."""
    return current_params.copy()


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

@dataclass
class EpochRecord:
    epoch: int
    cumulative_reward: float
    correct: int
    n_samples: int
    mean_loss: float
    train_accuracy: float
    epsilon: float
    alpha: float
    gradient_steps: int
    wall_time: float


@dataclass
class TrainLog:
    records: list = field(default_factory=list)

    CSV_COLUMNS = ("epoch", "cumulative_reward", "correct", "n_samples", "mean_loss",
                   "train_accuracy", "epsilon", "alpha", "gradient_steps")

    def to_csv(self, path, include_wall_time=False):
        cols = list(self.CSV_COLUMNS) + (["wall_time"] if include_wall_time else [])
        lines = [",".join(cols)]
        for rec in self.records:
            lines.append(",".join(repr(getattr(rec, c)) for c in cols))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class _Learner:
    params: nn.NetworkParams
    target: nn.NetworkParams | None
    adam: nn.AdamState
    steps: int = 0


def _gradient_step(learner, batch, config, alpha):
    kind = config.loss_kind
    q, cache = nn.forward(learner.params, batch["states"])
    if config.algorithm == "dqn":
        next_q = _q(learner.params, batch["next_states"])
        td = dqn_targets(batch["rewards"], batch["dones"], next_q, config.gamma)
    else:
        next_cur = _q(learner.params, batch["next_states"])
        next_tgt = _q(learner.target, batch["next_states"])
        q_sa = q[np.arange(len(q)), batch["actions"]]
        td = ddqn_targets(batch["rewards"], batch["dones"], q_sa, next_cur, next_tgt,
                          config.gamma, alpha)
    targets = losses.build_q_targets(q, batch["actions"], td, kind)
    value, grad_out = losses.loss_and_grad(kind, q, losses.TargetVector(targets, kind.target_mode))
    grads = nn.backward(learner.params, cache, grad_out)
    learner.params, learner.adam = nn.adam_step(learner.params, grads, learner.adam, config.learning_rate)
    learner.steps += 1
    if learner.target is not None and learner.steps % config.target_sync_period == 0:
        learner.target = sync_target(learner.params)
    return value


def greedy_predict(params, features, chunk=4096):
    """Argmax class for every row (lowest index on ties)."""
    features = np.asarray(features, dtype=np.float64)
    out = np.empty(features.shape[0], dtype=np.int64)
    for start in range(0, features.shape[0], chunk):
        out[start:start + chunk] = np.argmax(_q(params, features[start:start + chunk]), axis=1)
    return out


def train(dataset, config, params=None, progress=None):
    """Train a Q-network on the classification MDP.

    ``dataset`` is anything with ``matrix``, ``labels`` and ``n_classes``
    (normally an ``EncodedDataset``). ``params`` may carry a pre-built (for example partially frozen) network;
    otherwise the default convolutional network is initialised from the
    config seed. Returns ``(final_current_params, TrainLog)``.
    """
    features = np.asarray(dataset.matrix, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    n_classes = dataset.n_classes
    init_ss, act_ss, replay_ss = np.random.SeedSequence(config.seed).spawn(3)
    if params is None:
        spec = nn.unsw_qnet(features.shape[1], n_classes)
        params = nn.init_params(spec, init_ss)
    if params.spec.n_outputs != n_classes:
        raise ConfigError(f"network head has {params.spec.n_outputs} outputs but the dataset has "
                          f"{n_classes} classes")
    if params.spec.input_length * params.spec.input_channels != features.shape[1]:
        raise ConfigError(f"network expects {params.spec.input_length} features, dataset has "
                          f"{features.shape[1]}")

    env = ClassificationEnv(features, labels, n_classes)
    act_rng = np.random.default_rng(act_ss)
    replay_rng = np.random.default_rng(replay_ss)
    buffer = ReplayBuffer(config.buffer_capacity, features.shape[1])
    learner = _Learner(
        params=params,
        target=sync_target(params) if config.algorithm == "ddqn" else None,
        adam=nn.init_adam(params),
    )
    epsilon, alpha = config.epsilon_initial, config.alpha_initial
    trainlog = TrainLog()

    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        state, obs = env.reset((config.seed, epoch))
        total_reward, correct, loss_sum, n_updates = 0.0, 0, 0.0, 0
        while obs is not None:
            q = _q(learner.params, obs)
            action = select_action(q, epsilon, act_rng)
            r, nxt = env.step(state, action)
            buffer.push(obs, action, r, nxt)
            total_reward += r
            correct += r > 0
            if len(buffer) >= config.batch_size:
                batch = buffer.sample(config.batch_size, replay_rng)
                loss_sum += _gradient_step(learner, batch, config, alpha)
                n_updates += 1
            obs = nxt
        acc = float(np.mean(greedy_predict(learner.params, features) == labels))
        rec = EpochRecord(
            epoch=epoch + 1,
            cumulative_reward=total_reward,
            correct=int(correct),
            n_samples=len(env),
            mean_loss=loss_sum / n_updates if n_updates else float("nan"),
            train_accuracy=acc,
            epsilon=epsilon,
            alpha=alpha if config.algorithm == "ddqn" else float("nan"),
            gradient_steps=learner.steps,
            wall_time=time.perf_counter() - t0,
        )
        trainlog.records.append(rec)
        log.info("epoch %d/%d reward=%+.0f loss=%.5f train_acc=%.4f eps=%.3f (%.1fs)",
                 rec.epoch, config.epochs, rec.cumulative_reward, rec.mean_loss,
                 rec.train_accuracy, epsilon, rec.wall_time)
        if progress is not None:
            progress(rec)
        epsilon = max(config.epsilon_min, epsilon * config.epsilon_decay)
        if config.algorithm == "ddqn":
            alpha *= config.alpha_decay
    return learner.params, trainlog
