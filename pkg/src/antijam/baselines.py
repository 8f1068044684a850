"""Comparison agents: uniform frequency hopping and tabular Q-learning.

Both share the run-loop interface: select a PRB, then observe the outcome
(Q-learning consumes the +-1 reward; FH learns nothing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def fh_select(n_prbs: int, rng: np.random.Generator) -> int:
    """Uniform random PRB draw, 1-based."""
    if n_prbs < 1:
        raise ValueError("need at least one PRB")
    return int(rng.integers(1, n_prbs + 1))


class FrequencyHopper:
    def __init__(self, n_prbs: int, rng: np.random.Generator):
        self.n_prbs = n_prbs
        self.rng = rng

    def select(self) -> int:
        return fh_select(self.n_prbs, self.rng)

    def observe(self, reward: float) -> None:
        pass


@dataclass
class EpsilonSchedule:
    kind: str = "linear"       # linear | exponential
    t_end: int = 2000          # linear: slot where epsilon reaches 0
    rate: float = 0.995        # exponential decay per slot
    floor: float = 0.01        # exponential floor

    def at(self, t: int) -> float:
        if self.kind == "linear":
            return max(0.0, 1.0 - t / self.t_end)
        if self.kind == "exponential":
            return max(self.floor, self.rate**t)
        raise ValueError(f"unknown epsilon schedule {self.kind!r}")


@dataclass
class QTable:
    q: np.ndarray          # N x N, Q(state PRB, action PRB)
    alpha_lr: float = 0.1
    gamma_disc: float = 0.9
    epsilon: float = 1.0   # current exploration rate

    @classmethod
    def zeros(cls, n_prbs: int, alpha_lr: float = 0.1, gamma_disc: float = 0.9) -> "QTable":
        return cls(q=np.zeros((n_prbs, n_prbs)), alpha_lr=alpha_lr, gamma_disc=gamma_disc)


def q_select(table: QTable, state: int, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the state's row; greedy ties break at random."""
    n = table.q.shape[1]
    if rng.random() < table.epsilon:
        return int(rng.integers(1, n + 1))
    row = table.q[state - 1]
    best = np.flatnonzero(row == row.max())
    return int(best[rng.integers(0, len(best))]) + 1


def q_learn(table: QTable, s: int, a: int, r: float, s_next: int) -> None:
    """Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))."""
    target = r + table.gamma_disc * table.q[s_next - 1].max()
    table.q[s - 1, a - 1] += table.alpha_lr * (target - table.q[s - 1, a - 1])


class QLearningAgent:
    """Tabular QL conditioned on its own previous PRB; reward +1/H0, -1/H1."""

    def __init__(
        self,
        n_prbs: int,
        rng: np.random.Generator,
        alpha_lr: float = 0.1,
        gamma_disc: float = 0.9,
        schedule: EpsilonSchedule | None = None,
    ):
        self.table = QTable.zeros(n_prbs, alpha_lr=alpha_lr, gamma_disc=gamma_disc)
        self.schedule = schedule or EpsilonSchedule()
        self.rng = rng
        self.prev_prb = 1
        self.last_action: int | None = None
        self.t = 0

    def select(self) -> int:
        self.table.epsilon = self.schedule.at(self.t)
        self.last_action = q_select(self.table, self.prev_prb, self.rng)
        return self.last_action

    def observe(self, reward: float) -> None:
        a = self.last_action
        q_learn(self.table, self.prev_prb, a, reward, a)
        self.prev_prb = a
        self.t += 1
