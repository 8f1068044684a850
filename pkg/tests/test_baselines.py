import numpy as np
import pytest

from antijam import baselines as bl

CHI2_49_AT_1PCT = 74.919


class TestFhSelect:
    def test_single_prb(self):
        assert all(bl.fh_select(1, np.random.default_rng(0)) == 1 for _ in range(20))

    def test_uniformity_chi_square(self):
        rng = np.random.default_rng(1)
        counts = np.zeros(50)
        n = 10_000
        for _ in range(n):
            counts[bl.fh_select(50, rng) - 1] += 1
        chi2 = float(((counts - n / 50) ** 2 / (n / 50)).sum())
        assert chi2 < CHI2_49_AT_1PCT

    def test_same_seed_same_sequence(self):
        a = [bl.fh_select(50, np.random.default_rng(2)) for _ in range(1)]
        b = [bl.fh_select(50, np.random.default_rng(2)) for _ in range(1)]
        assert a == b


class TestEpsilonSchedule:
    def test_linear_endpoints(self):
        s = bl.EpsilonSchedule(kind="linear", t_end=1000)
        assert s.at(0) == 1.0
        assert s.at(500) == pytest.approx(0.5)
        assert s.at(1000) == 0.0
        assert s.at(5000) == 0.0

    def test_exponential_floor(self):
        s = bl.EpsilonSchedule(kind="exponential", rate=0.995, floor=0.01)
        assert s.at(0) == 1.0
        assert s.at(10_000) == 0.01


class TestQStep:
    def test_epsilon_one_is_uniform(self):
        t = bl.QTable.zeros(50)
        t.epsilon = 1.0
        t.q[0, 7] = 100.0  # greedy would always pick this
        rng = np.random.default_rng(3)
        counts = np.zeros(50)
        n = 10_000
        for _ in range(n):
            counts[bl.q_select(t, 1, rng) - 1] += 1
        chi2 = float(((counts - n / 50) ** 2 / (n / 50)).sum())
        assert chi2 < CHI2_49_AT_1PCT

    def test_epsilon_zero_greedy_one_hot(self):
        t = bl.QTable.zeros(6)
        t.epsilon = 0.0
        t.q[2, 4] = 1.0
        assert all(bl.q_select(t, 3, np.random.default_rng(4)) == 5 for _ in range(50))

    def test_single_bellman_step(self):
        t = bl.QTable.zeros(4, alpha_lr=0.5, gamma_disc=0.9)
        bl.q_learn(t, s=1, a=2, r=1.0, s_next=3)
        assert t.q[0, 1] == pytest.approx(0.5)

    def test_brute_force_oracle_match(self):
        rng = np.random.default_rng(5)
        t = bl.QTable.zeros(3, alpha_lr=0.3, gamma_disc=0.8)
        ref = np.zeros((3, 3))
        for _ in range(100):
            s, a, s2 = rng.integers(1, 4, size=3)
            r = float(rng.choice([-1.0, 1.0]))
            bl.q_learn(t, int(s), int(a), r, int(s2))
            ref[s - 1, a - 1] += 0.3 * (r + 0.8 * ref[s2 - 1].max() - ref[s - 1, a - 1])
            assert np.allclose(t.q, ref, atol=1e-12)

    def test_agent_chains_states(self):
        agent = bl.QLearningAgent(5, np.random.default_rng(6),
                                  schedule=bl.EpsilonSchedule(kind="linear", t_end=10))
        a1 = agent.select()
        agent.observe(1.0)
        assert agent.prev_prb == a1

    def test_greedy_deterministic_with_fixed_table(self):
        agent = bl.QLearningAgent(6, np.random.default_rng(7),
                                  schedule=bl.EpsilonSchedule(kind="linear", t_end=1))
        agent.t = 10  # epsilon 0 from here on
        agent.table.q[:] = 0.0
        agent.table.q[:, 3] = 5.0  # strictly dominant action
        seq = []
        for _ in range(10):
            seq.append(agent.select())
            agent.observe(1.0)
        assert seq == [4] * 10
