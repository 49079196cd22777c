"""Classification MDP: labeled samples are states, class labels are actions.

Transitions are deterministic and action-independent: an episode walks a
freshly shuffled permutation of the dataset, one sample per step, and the
reward is +1 for a correct label and -1 otherwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ActionError, EnvError

CORRECT = 1.0
WRONG = -1.0


def reward(action, label):
    return CORRECT if action == label else WRONG


@dataclass
class EpisodeState:
    permutation: np.ndarray
    cursor: int = 0
    terminal: bool = False

    @property
    def index(self):
        """Dataset index of the current sample."""
        return int(self.permutation[self.cursor])


class ClassificationEnv:
    def __init__(self, features, labels, n_classes):
        self.features = np.asarray(features, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.n_classes = int(n_classes)
        if self.features.shape[0] != self.labels.shape[0]:
            raise EnvError("features and labels disagree on sample count")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise EnvError("label outside 0..n_classes-1")

    def __len__(self):
        return self.labels.shape[0]

    def reset(self, rng_seed):
        """Start an episode over a new shuffle; returns ``(state, first_observation)``.

        ``rng_seed`` is anything ``numpy.random.default_rng`` accepts (an int
        or a tuple of ints), so per-epoch seeds can be ``(run_seed, epoch)``.
        """
        if len(self) == 0:
            raise EnvError("cannot reset on an empty dataset")
        perm = np.random.default_rng(rng_seed).permutation(len(self))
        state = EpisodeState(perm)
        return state, self.features[state.index]

    def label(self, state):
        return int(self.labels[state.index])

    def step(self, state, action):
        """Score ``action`` on the current sample and advance.

        Returns ``(reward, next_observation)``; the observation is ``None``
        once the last sample has been consumed, at which point ``state``
        is marked terminal.
        """
        if state.terminal:
            raise EnvError("step() called on a finished episode")
        if not 0 <= action < self.n_classes:
            raise ActionError(f"action {action} outside 0..{self.n_classes - 1}")
        r = reward(int(action), self.label(state))
        state.cursor += 1
        if state.cursor >= len(state.permutation):
            state.terminal = True
            return r, None
        return r, self.features[state.index]
