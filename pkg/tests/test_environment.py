import numpy as np
import pytest

from antijam import environment as env
from antijam import signals as sig
from antijam.channel import ChannelParams


def make_world(n_slots=200, kind="random", seed=0, jhr=0.4, constant_set=(), n_prbs=50):
    return env.World(
        n_prbs=n_prbs,
        n_slots=n_slots,
        strategy=env.JammerStrategy(kind=kind, hit_rate=jhr, constant_set=list(constant_set)),
        params=ChannelParams(),
        gbs_pos=[0.0, 0.0, 30.0],
        jammer_pos=[260.0, -150.0, 30.0],
        waypoints=[[120.0, 380.0], [220.0, 280.0]],
        uav_altitude=60.0,
        speed_mps=4.8,
        slot_duration_s=5e-4,
        snr_db=15.0,
        jsr_db=6.0,
        noise_power=1.0,
        matrices=sig.GdbnMatrices(sigma_v=sig.default_sigma_v(1.0)),
        shadowing="frozen",
        seed=seed,
    )


class TestJammerNext:
    def test_sweep_wraps(self):
        strat = env.JammerStrategy(kind="sweep", hit_rate=1.0)
        nxt, _ = env.jammer_next(strat, 50, 50, np.random.default_rng(0))
        assert nxt == 1

    def test_sweep_hand_rule(self):
        strat = env.JammerStrategy(kind="sweep", hit_rate=1.0)
        nxt, _ = env.jammer_next(strat, 7, 50, np.random.default_rng(0))
        assert nxt == 8

    def test_constant_draws_from_set(self):
        strat = env.JammerStrategy(kind="constant", hit_rate=1.0, constant_set=[3, 9, 20])
        rng = np.random.default_rng(1)
        seen = {env.jammer_next(strat, 1, 50, rng)[0] for _ in range(200)}
        assert seen == {3, 9, 20}

    def test_jhr_transmit_fraction(self):
        strat = env.JammerStrategy(kind="random", hit_rate=0.4)
        rng = np.random.default_rng(2)
        hits = sum(env.jammer_next(strat, 1, 50, rng)[1] for _ in range(10_000))
        assert abs(hits / 10_000 - 0.40) <= 0.02

    def test_empty_constant_set_rejected_at_use(self):
        strat = env.JammerStrategy(kind="constant", hit_rate=0.4)
        with pytest.raises(ValueError):
            env.jammer_next(strat, 1, 50, np.random.default_rng(0))


class TestUavPosition:
    WAYPOINTS = [[0.0, 0.0], [100.0, 0.0]]

    def test_starts_at_first_waypoint(self):
        p = env.uav_position(0, self.WAYPOINTS, 60.0, 4.8, 0.5)
        assert np.allclose(p, [0.0, 0.0, 60.0])

    def test_per_slot_displacement(self):
        delta = 0.5
        p1 = env.uav_position(1, self.WAYPOINTS, 60.0, 4.8, delta)
        p2 = env.uav_position(2, self.WAYPOINTS, 60.0, 4.8, delta)
        assert np.linalg.norm(p2 - p1) == pytest.approx(4.8 * delta)

    def test_altitude_fixed(self):
        for t in (0, 13, 999):
            assert env.uav_position(t, self.WAYPOINTS, 60.0, 4.8, 0.5)[2] == 60.0

    def test_clamps_at_final_waypoint(self):
        p = env.uav_position(10_000, self.WAYPOINTS, 60.0, 4.8, 0.5)
        assert np.allclose(p, [100.0, 0.0, 60.0])


class TestStep:
    def test_h0_on_disjoint_prbs(self):
        w = make_world(kind="sweep", jhr=1.0, seed=3)
        out = w.step((w.jammer_prb % 50) + 2)  # definitely not the next sweep PRB
        assert out.hypothesis == "H0"

    def test_h1_on_collision(self):
        w = make_world(kind="sweep", jhr=1.0, seed=4)
        nxt = (w.jammer_prb % 50) + 1
        out = w.step(nxt)
        assert out.hypothesis == "H1"
        assert out.jammer_prb_truth == nxt

    def test_h1_observation_carries_jammer_term(self):
        w0 = make_world(kind="sweep", jhr=1.0, seed=5)
        w1 = make_world(kind="sweep", jhr=1.0, seed=5)
        nxt = (w0.jammer_prb % 50) + 1
        miss = (nxt % 50) + 1
        z_h0 = w0.step(miss).observation
        z_h1 = w1.step(nxt).observation
        assert np.allclose(z_h1 - z_h0, w1._j_feats[0])

    def test_fh_collision_rate_closed_form(self):
        w = make_world(n_slots=20_000, kind="random", jhr=0.4, seed=6)
        rng = np.random.default_rng(7)
        hits = sum(
            w.step(int(rng.integers(1, 51))).hypothesis == "H1" for _ in range(20_000)
        )
        rate = hits / 20_000
        # expectation 0.4/50 = 0.008, binomial 4-sigma band
        assert abs(rate - 0.008) < 4 * np.sqrt(0.008 * 0.992 / 20_000)

    def test_replay_is_byte_identical(self):
        actions = np.random.default_rng(8).integers(1, 51, size=150)
        outs = []
        for _ in range(2):
            w = make_world(n_slots=150, kind="constant", seed=9)
            outs.append([w.step(int(a)) for a in actions])
        for a, b in zip(*outs):
            assert a.hypothesis == b.hypothesis
            assert a.sinr == b.sinr
            assert a.jammer_prb_truth == b.jammer_prb_truth
            assert np.array_equal(a.observation, b.observation)

    def test_h0_sinr_independent_of_jammer(self):
        outs = []
        for jsr in (6.0, 30.0):
            w = make_world(n_slots=50, kind="sweep", jhr=0.0, seed=10)
            w.jsr_db = jsr
            w.reset(10)
            outs.append([w.step(1).sinr for _ in range(50)])
        assert outs[0] == outs[1]

    def test_action_bounds_checked(self):
        w = make_world(seed=11)
        with pytest.raises(ValueError):
            w.step(0)
        with pytest.raises(ValueError):
            w.step(51)

    def test_constant_set_drawn_from_seed(self):
        w1 = make_world(kind="constant", seed=12)
        w2 = make_world(kind="constant", seed=12)
        w3 = make_world(kind="constant", seed=13)
        assert w1.strategy.constant_set == w2.strategy.constant_set
        assert len(w1.strategy.constant_set) == 3
        assert w1.strategy.constant_set != w3.strategy.constant_set

    def test_snr_calibration_at_start(self):
        w = make_world(kind="random", jhr=0.0, seed=14)
        out = w.step(1)
        assert 10 * np.log10(out.sinr) == pytest.approx(15.0, abs=0.01)
