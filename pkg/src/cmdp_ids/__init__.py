"""Deep Q-learning intrusion detection on a classification MDP."""

from .agent import AgentConfig, ReplayBuffer, train
from .data import EncodedDataset
from .evaluation import EvaluationReport, evaluate
from .nn import NetworkParams, NetworkSpec

__all__ = [
    "AgentConfig",
    "EncodedDataset",
    "EvaluationReport",
    "NetworkParams",
    "NetworkSpec",
    "ReplayBuffer",
    "evaluate",
    "train",
]
__version__ = "0.1.0"
