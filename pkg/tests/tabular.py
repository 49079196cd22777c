"""Tabular Q-learning on a tiny classification MDP, driven by the package's
replay buffer and TD-target code, plus an independent value-iteration oracle."""

import numpy as np

from cmdp_ids.agent import ReplayBuffer, dqn_targets
from cmdp_ids.env import reward

# three states visited in a fixed cycle, two actions; labels pick the right action
LABELS = np.array([0, 1, 0])
N_STATES, N_ACTIONS = 3, 2


def value_iteration(gamma, tol=1e-13):
    q = np.zeros((N_STATES, N_ACTIONS))
    r = np.array([[1.0 if a == LABELS[s] else -1.0 for a in range(N_ACTIONS)] for s in range(N_STATES)])
    nxt = (np.arange(N_STATES) + 1) % N_STATES
    while True:
        new = r + gamma * q[nxt].max(axis=1)[:, None]
        if np.max(np.abs(new - q)) < tol:
            return new
        q = new


def tabular_dqn(gamma, seed=0, batches=3000, batch_size=16):
    rng = np.random.default_rng(seed)
    eye = np.eye(N_STATES)
    buf = ReplayBuffer(64, N_STATES)
    for s in range(N_STATES):
        for a in range(N_ACTIONS):
            buf.push(eye[s], a, reward(a, LABELS[s]), eye[(s + 1) % N_STATES])
    q = np.zeros((N_STATES, N_ACTIONS))
    for _ in range(batches):
        b = buf.sample(batch_size, rng)
        s = b["states"].argmax(axis=1)
        s2 = b["next_states"].argmax(axis=1)
        td = dqn_targets(b["rewards"], b["dones"], q[s2], gamma)
        for i in range(batch_size):  # sequential, learning rate 1
            q[s[i], b["actions"][i]] = td[i]
    return q
