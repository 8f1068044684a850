"""POMDP world: PRB grid, jammer strategies, UAV trajectory, per-slot outcomes.

One world instance per run. All randomness flows through named sub-streams
spawned from the run seed, each consumed at a fixed per-slot rate regardless
of the agent's actions, so different agents replayed on the same seed face
byte-identical jammer/channel/signal realizations (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channel as ch
from . import signals as sig


@dataclass
class JammerStrategy:
    kind: str                      # constant | sweep | random
    hit_rate: float                # JHR, probability of transmitting in a slot
    constant_set: list[int] = field(default_factory=list)  # empty: drawn at scenario build
    enabled: bool = True

    def __post_init__(self):
        if self.kind not in ("constant", "sweep", "random"):
            raise ValueError(f"unknown jammer kind {self.kind!r}")
        if not 0.0 <= self.hit_rate <= 1.0:
            raise ValueError("hit_rate must lie in [0, 1]")


@dataclass
class StepOutcome:
    observation: np.ndarray   # generalized observation at the chosen PRB
    hypothesis: str           # "H0" or "H1"
    sinr: float               # linear ratio at the receiver
    jammer_prb_truth: int     # hidden from agents; metrics logging only


def jammer_next(
    strategy: JammerStrategy, current: int, n_prbs: int, rng: np.random.Generator
) -> tuple[int, bool]:
    """Advance the jammer one slot: next PRB and whether it transmits.

    The PRB always advances (a silent sweep still sweeps); transmission is an
    independent Bernoulli(JHR) gate.
    """
    if strategy.kind == "constant":
        if not strategy.constant_set:
            raise ValueError("constant jammer requires a non-empty PRB set")
        nxt = int(strategy.constant_set[rng.integers(0, len(strategy.constant_set))])
    elif strategy.kind == "sweep":
        nxt = (current % n_prbs) + 1
    else:  # random
        nxt = int(rng.integers(1, n_prbs + 1))
    transmitted = bool(rng.random() < strategy.hit_rate) and strategy.enabled
    return nxt, transmitted


def uav_position(
    t: int,
    waypoints: np.ndarray,
    altitude: float,
    speed_mps: float,
    slot_duration_s: float,
) -> np.ndarray:
    """Piecewise-linear waypoint interpolation at constant speed, fixed altitude.

    Past the final waypoint the UAV holds position.
    """
    if t < 0:
        raise ValueError("slot index must be >= 0")
    wp = np.asarray(waypoints, dtype=float)
    if wp.ndim != 2 or wp.shape[1] != 2 or len(wp) < 1:
        raise ValueError("waypoints must be an (n, 2) array")
    dist = float(t) * speed_mps * slot_duration_s
    for i in range(len(wp) - 1):
        seg = wp[i + 1] - wp[i]
        seg_len = float(np.hypot(*seg))
        if dist <= seg_len or seg_len == 0.0:
            frac = 0.0 if seg_len == 0.0 else dist / seg_len
            xy = wp[i] + frac * seg
            return np.array([xy[0], xy[1], altitude])
        dist -= seg_len
    return np.array([wp[-1][0], wp[-1][1], altitude])


class World:
    """Environment for one run: owns jammer state, channel draws and signals.

    Channel gains, signal features and observation noise for all T slots are
    drawn up-front at reset (fixed-rate consumption), so outcomes at slot t
    depend on the agent only through the H0/H1 collision test.
    """

    def __init__(
        self,
        n_prbs: int,
        n_slots: int,
        strategy: JammerStrategy,
        params: ch.ChannelParams,
        gbs_pos,
        jammer_pos,
        waypoints,
        uav_altitude: float,
        speed_mps: float,
        slot_duration_s: float,
        snr_db: float,
        jsr_db: float,
        noise_power: float,
        matrices: sig.GdbnMatrices,
        shadowing: str = "per_slot",   # per_slot | frozen | off
        c2_persistence: float = 0.85,
        constant_set_size: int = 3,
        seed: int = 0,
    ):
        if shadowing not in ("per_slot", "frozen", "off"):
            raise ValueError(f"unknown shadowing mode {shadowing!r}")
        self.n_prbs = n_prbs
        self.n_slots = n_slots
        self.strategy = strategy
        self.params = params
        self.matrices = matrices
        self.shadowing = shadowing
        self.snr_db = snr_db
        self.jsr_db = jsr_db
        self.noise_power = noise_power
        self.c2_persistence = c2_persistence
        self.constant_set_size = constant_set_size
        self.gbs_pos = np.asarray(gbs_pos, dtype=float)
        self.jammer_pos = np.asarray(jammer_pos, dtype=float)
        self.waypoints = np.asarray(waypoints, dtype=float)
        self.uav_altitude = uav_altitude
        self.speed_mps = speed_mps
        self.slot_duration_s = slot_duration_s
        self.seed = seed
        self.reset(seed)

    # -- setup ---------------------------------------------------------------

    def reset(self, seed: int | None = None) -> None:
        if seed is not None:
            self.seed = seed
        ss = np.random.SeedSequence(self.seed)
        (s_jam, s_chan, s_sig, s_noise, s_build) = ss.spawn(5)
        self._rng_jam = np.random.default_rng(s_jam)
        rng_chan = np.random.default_rng(s_chan)
        rng_sig = np.random.default_rng(s_sig)
        rng_noise = np.random.default_rng(s_noise)
        rng_build = np.random.default_rng(s_build)

        T = self.n_slots
        self.t = 0
        self._geometries = [self._geometry_at(t) for t in range(T)]
        self._theta_check()

        # Channel gains per slot for both links.
        self._h_gu = np.empty(T)
        self._h_ju = np.empty(T)
        frozen_draw = {
            "gbs": rng_chan.normal(0.0, 1.0),
            "jammer": rng_chan.normal(0.0, 1.0),
        }
        for t in range(T):
            g = self._geometries[t]
            for which, out in (("gbs", self._h_gu), ("jammer", self._h_ju)):
                theta = ch.depression_angle(g, which)
                pl = ch.terrestrial_pathloss(
                    ch.ground_distance_2d(g, which), self.params.alpha_pl
                ) + ch.excess_aerial_pathloss(theta, self.params)
                if self.shadowing == "per_slot":
                    pl += ch.shadowing_sample(theta, self.params, rng_chan)
                elif self.shadowing == "frozen":
                    sigma = self.params.shadow_std(theta)
                    if sigma <= 0:
                        raise ch.ChannelConfigError("sigma(theta) <= 0 on trajectory")
                    pl += sigma * frozen_draw[which]
                out[t] = ch.gain_from_pathloss_db(pl)

        # Transmit powers calibrated at t=0 so the receiver sees the target
        # SNR and JSR at mission start.
        snr_lin = 10.0 ** (self.snr_db / 10.0)
        jsr_lin = 10.0 ** (self.jsr_db / 10.0)
        self.p_tx_uav = snr_lin * self.noise_power / self._h_gu[0]
        self.p_tx_jammer = jsr_lin * self.p_tx_uav * self._h_gu[0] / self._h_ju[0]

        # Feature streams: global in time, independent of PRB hopping. The C2
        # payload carries slot-level persistence; the jammer stream is i.i.d.
        a_u = sig.amplitude_from_snr(self.snr_db, self.noise_power)
        a_j = a_u * np.sqrt(jsr_lin)
        self._u_feats = a_u * sig.generalized_stream(
            sig.markov_qpsk_stream(T, self.c2_persistence, rng_sig)
        )
        self._j_feats = a_j * sig.generalized_stream(sig.qpsk_stream(T, rng_sig))
        std = np.sqrt(np.diag(self.matrices.sigma_v))
        self._noise = rng_noise.normal(0.0, 1.0, size=(T, sig.GEN_DIM)) * std

        # Constant jammer set is drawn at scenario build when not pinned.
        self.strategy = self._resolve_constant_set(self.strategy, rng_build)
        self.jammer_prb = int(rng_build.integers(1, self.n_prbs + 1))

    def _resolve_constant_set(self, strat: JammerStrategy, rng) -> JammerStrategy:
        if strat.kind == "constant" and not strat.constant_set:
            size = min(self.constant_set_size, self.n_prbs)
            prbs = 1 + rng.choice(self.n_prbs, size=size, replace=False)
            strat = JammerStrategy(
                kind="constant",
                hit_rate=strat.hit_rate,
                constant_set=sorted(int(p) for p in prbs),
                enabled=strat.enabled,
            )
        return strat

    def _geometry_at(self, t: int) -> ch.Geometry:
        pos = uav_position(
            t, self.waypoints, self.uav_altitude, self.speed_mps, self.slot_duration_s
        )
        return ch.Geometry(uav_pos=pos, gbs_pos=self.gbs_pos, jammer_pos=self.jammer_pos)

    def _theta_check(self) -> None:
        if self.shadowing == "off":
            self.params.validate()
            return
        thetas = [
            ch.depression_angle(g, which)
            for g in self._geometries[:: max(1, len(self._geometries) // 64)]
            for which in ("gbs", "jammer")
        ]
        self.params.validate(theta_max_deg=max(thetas))

    # -- stepping ------------------------------------------------------------

    def step(self, action: int) -> StepOutcome:
        """Advance one slot with the UAV on PRB `action` (1-based)."""
        if not 1 <= action <= self.n_prbs:
            raise ValueError(f"action {action} outside [1, {self.n_prbs}]")
        if self.t >= self.n_slots:
            raise RuntimeError("mission is over")
        t = self.t
        self.jammer_prb, transmitted = jammer_next(
            self.strategy, self.jammer_prb, self.n_prbs, self._rng_jam
        )
        collided = bool(
            self.strategy.enabled and transmitted and action == self.jammer_prb
        )
        z = sig.observe(
            self._u_feats[t],
            self._j_feats[t] if collided else None,
            self.matrices,
            noise=self._noise[t],
        )
        budget = ch.LinkBudget(
            p_tx_uav=self.p_tx_uav,
            p_tx_jammer=self.p_tx_jammer,
            noise_power=self.noise_power,
            jammer_present=int(collided),
        )
        gamma = ch.sinr(budget, self._h_gu[t], self._h_ju[t])
        self.t += 1
        return StepOutcome(
            observation=z,
            hypothesis="H1" if collided else "H0",
            sinr=gamma,
            jammer_prb_truth=self.jammer_prb,
        )
