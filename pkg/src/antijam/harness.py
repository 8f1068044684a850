"""Experiment harness: scenario execution, offline training, benchmarking.

Every run owns its world, agent, perception and rng streams and is fully
determined by (config, seed). Outputs: per-seed CSV (fixed header order),
per-slot JSONL episode logs, and a JSON summary with final cumulative metrics
and the convergence slot.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import abnormality as abn
from . import baselines, environment, signals
from .agent import ActiveInferenceAgent, AinParams
from .channel import ChannelParams
from .config import ConfigError, load_config
from .mjpf import MarkovJumpFilter, MessagePair, build_regime_tables
from .offline_learning import (
    GngParams,
    PrbModel,
    SignalModel,
    assign_labels,
    estimate_transitions,
    gng_fit,
    load_model,
    save_model,
    training_features,
)

CSV_HEADER = [
    "t",
    "hypothesis",
    "reward",
    "abnormality",
    "sinr_db",
    "cum_reward",
    "cum_abnormality",
    "cum_sinr",
    "chosen_prb",
    "jammer_prb",
]

CONVERGENCE_WINDOW = 100
CONVERGENCE_RATE = 0.02


# -- construction ---------------------------------------------------------------


def build_matrices(cfg: dict) -> signals.GdbnMatrices:
    sw = cfg["model"]["sigma_w"]
    return signals.GdbnMatrices(
        sigma_w=sw * np.eye(signals.GEN_DIM),
        sigma_v=signals.default_sigma_v(cfg["noise_power"]),
    )


def build_channel_params(cfg: dict) -> ChannelParams:
    c = cfg["channel"]
    return ChannelParams(
        alpha_pl=c["alpha_pl"],
        c_scaler=c["c_scaler"],
        d_scaler=c["d_scaler"],
        theta0=c["theta0_deg"],
        eta0=c["eta0_db"],
        a_shadow=c["a_shadow"],
        sigma0_shadow=c["sigma0_shadow"],
    )


def build_world(cfg: dict, seed: int, jammer_enabled: bool | None = None) -> environment.World:
    j = cfg["jammer"]
    enabled = j["enabled"] if jammer_enabled is None else jammer_enabled
    strategy = environment.JammerStrategy(
        kind=j["kind"],
        hit_rate=cfg["jhr"],
        constant_set=list(j["constant_set"]),
        enabled=enabled,
    )
    g = cfg["geometry"]
    shadowing = cfg["channel"]["shadowing"]
    return environment.World(
        n_prbs=cfg["n_prbs"],
        n_slots=cfg["n_slots"],
        strategy=strategy,
        params=build_channel_params(cfg),
        gbs_pos=g["gbs"],
        jammer_pos=g["jammer"],
        waypoints=g["waypoints"],
        uav_altitude=g["uav_altitude"],
        speed_mps=g["speed_mps"],
        slot_duration_s=g["slot_duration_s"],
        snr_db=cfg["snr_db"],
        jsr_db=cfg["jsr_db"],
        noise_power=cfg["noise_power"],
        matrices=build_matrices(cfg),
        shadowing="off" if shadowing == "off" else shadowing,
        c2_persistence=cfg["model"]["c2_persistence"],
        constant_set_size=j["constant_set_size"],
        seed=seed,
    )


def build_agent(cfg: dict, rng: np.random.Generator):
    kind = cfg["agent"]["kind"]
    n = cfg["n_prbs"]
    if kind == "fh":
        return baselines.FrequencyHopper(n, rng)
    if kind == "ql":
        q = cfg["agent"]["ql"]
        eps = q["epsilon"]
        sched = baselines.EpsilonSchedule(
            kind=eps["kind"],
            t_end=eps.get("t_end", cfg["n_slots"]),
            rate=eps["rate"],
            floor=eps["floor"],
        )
        return baselines.QLearningAgent(
            n, rng, alpha_lr=q["alpha_lr"], gamma_disc=q["gamma_disc"], schedule=sched
        )
    if kind == "ain":
        a = cfg["agent"]["ain"]
        params = AinParams(
            kappa=a["kappa"],
            gamma_max=a["gamma_max"],
            prob_floor=a["prob_floor"],
            gamma_jam=a["gamma_jam"],
        )
        return ActiveInferenceAgent(n, rng, params)
    raise ConfigError(f"unknown agent kind {kind!r}")


# -- perception -------------------------------------------------------------------


@dataclass
class SlotPerception:
    prb: int
    msgs: MessagePair
    skl: float
    bhatt: float
    abnormal: bool
    degenerate: bool


class Perception:
    """Per-run M-MJPF wrapper that swaps in the chosen PRB's learned model.

    Regime tables and cross-PRB cluster mappings are cached: the UAV hops
    almost every slot, so table construction must stay off the hot path.
    """

    def __init__(
        self,
        model: SignalModel,
        n_particles: int,
        rng: np.random.Generator,
        skl_per_component: bool = False,
    ):
        self.model = model
        self.n_particles = n_particles
        self.rng = rng
        self.skl_per_component = skl_per_component
        self.filter: MarkovJumpFilter | None = None
        self.current_prb: int | None = None
        self._tables = {
            prb: build_regime_tables(pm.means, pm.covs, pm.transitions, model.matrices)
            for prb, pm in model.prbs.items()
        }
        self._mappings: dict[tuple[int, int], np.ndarray] = {}

    def _mapping(self, src: int, dst: int) -> np.ndarray:
        key = (src, dst)
        if key not in self._mappings:
            a, b = self._tables[src].means, self._tables[dst].means
            d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
            self._mappings[key] = np.argmin(d2, axis=1)
        return self._mappings[key]

    def process(self, prb: int, z: np.ndarray) -> SlotPerception:
        pm = self.model.prbs[prb]
        if self.filter is None:
            self.filter = MarkovJumpFilter(
                pm.means, pm.covs, pm.transitions, self.model.matrices,
                self.n_particles, self.rng,
            )
        elif prb != self.current_prb:
            self.filter.swap_tables(self._tables[prb], self._mapping(self.current_prb, prb))
        self.current_prb = prb
        self.filter.predict()
        msgs = self.filter.update(z)
        signal = abn.evaluate(
            msgs, msgs.min_error_sq, pm.threshold, self.skl_per_component
        )
        if signal.is_abnormal:
            # Jammed observations must not drag the clean-signal belief.
            self.filter.reject_observation()
        self.filter.resample()
        return SlotPerception(
            prb=prb,
            msgs=msgs,
            skl=signal.skl,
            bhatt=signal.bhatt,
            abnormal=signal.is_abnormal,
            degenerate=self.filter.degenerate,
        )


# -- single run -------------------------------------------------------------------


@dataclass
class RunResult:
    seed: int
    chosen: np.ndarray        # (T,) int
    jammer: np.ndarray        # (T,) int
    collided: np.ndarray      # (T,) bool
    abnormality: np.ndarray   # (T,) SKL values
    bhatt: np.ndarray         # (T,)
    sinr: np.ndarray          # (T,) linear
    flagged: np.ndarray       # (T,) bool, agent-side abnormal flags

    @property
    def rewards(self) -> np.ndarray:
        return np.where(self.collided, -1.0, 1.0)

    @property
    def final_cum_reward(self) -> float:
        return float(self.rewards.sum())

    @property
    def final_cum_abnormality(self) -> float:
        return float(self.abnormality.sum())

    @property
    def final_cum_sinr(self) -> float:
        return float(self.sinr.sum())

    @property
    def collisions(self) -> int:
        return int(self.collided.sum())


def convergence_slot(collided: np.ndarray, window: int = CONVERGENCE_WINDOW,
                     rate: float = CONVERGENCE_RATE) -> int:
    """First slot after which the trailing-window collision rate stays < rate.

    Returns `window` for runs that never breach the rate, and T+1 (sentinel,
    "never converged") when the final window still breaches it.
    """
    c = np.asarray(collided, dtype=float)
    t_total = len(c)
    if t_total < window:
        return t_total + 1 if c.sum() / max(len(c), 1) >= rate else len(c)
    csum = np.concatenate([[0.0], np.cumsum(c)])
    rates = (csum[window:] - csum[:-window]) / window
    bad = np.flatnonzero(rates >= rate)
    if len(bad) == 0:
        return window
    last_bad_end = int(bad[-1]) + window  # 1-based slot where the window ends
    return last_bad_end + 1 if last_bad_end < t_total else t_total + 1


def run_single(cfg: dict, seed: int, model: SignalModel | None) -> RunResult:
    kind = cfg["agent"]["kind"]
    if kind == "ain" and model is None:
        raise ConfigError("AIn agent requires a trained model file")
    world = build_world(cfg, seed)
    agent = build_agent(cfg, np.random.default_rng(np.random.SeedSequence([seed, 1])))
    perception = (
        Perception(model, cfg["filter"]["n_particles"],
                   np.random.default_rng(np.random.SeedSequence([seed, 2])),
                   skl_per_component=cfg["filter"]["skl_per_component"])
        if model is not None
        else None
    )
    t_total = cfg["n_slots"]
    chosen = np.zeros(t_total, dtype=int)
    jammer = np.zeros(t_total, dtype=int)
    collided = np.zeros(t_total, dtype=bool)
    skl = np.zeros(t_total)
    bhatt = np.zeros(t_total)
    sinr = np.zeros(t_total)
    flagged = np.zeros(t_total, dtype=bool)

    for t in range(t_total):
        action = agent.select()
        out = world.step(action)
        chosen[t] = action
        jammer[t] = out.jammer_prb_truth
        collided[t] = out.hypothesis == "H1"
        sinr[t] = out.sinr
        sp = perception.process(action, out.observation) if perception else None
        if sp is not None:
            skl[t] = sp.skl
            bhatt[t] = sp.bhatt
            flagged[t] = sp.abnormal
        if kind == "ain":
            agent.observe(
                action, sp.skl, sp.abnormal,
                sp.msgs.discrete_pi, sp.msgs.discrete_lambda,
            )
        else:
            agent.observe(1.0 if out.hypothesis == "H0" else -1.0)

    return RunResult(
        seed=seed, chosen=chosen, jammer=jammer, collided=collided,
        abnormality=skl, bhatt=bhatt, sinr=sinr, flagged=flagged,
    )


# -- persistence ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_run_csv(path: str, res: RunResult) -> None:
    rewards = res.rewards
    cum_r = np.cumsum(rewards)
    cum_a = np.cumsum(res.abnormality)
    cum_s = np.cumsum(res.sinr)
    with open(path, "w") as f:
        f.write(",".join(CSV_HEADER) + "\n")
        for t in range(len(res.chosen)):
            f.write(
                ",".join(
                    [
                        str(t + 1),
                        "H1" if res.collided[t] else "H0",
                        str(int(rewards[t])),
                        _fmt(res.abnormality[t]),
                        _fmt(10.0 * math.log10(res.sinr[t])),
                        str(int(cum_r[t])),
                        _fmt(cum_a[t]),
                        _fmt(cum_s[t]),
                        str(res.chosen[t]),
                        str(res.jammer[t]),
                    ]
                )
                + "\n"
            )


def write_episode_jsonl(path: str, res: RunResult) -> None:
    with open(path, "w") as f:
        for t in range(len(res.chosen)):
            rec = {
                "t": t + 1,
                "chosen_prb": int(res.chosen[t]),
                "jammer_prb": int(res.jammer[t]),
                "hypothesis": "H1" if res.collided[t] else "H0",
                "reward": -1 if res.collided[t] else 1,
                "sinr": res.sinr[t],
                "skl": res.abnormality[t],
                "bhatt": res.bhatt[t],
                "abnormal_flag": bool(res.flagged[t]),
            }
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def summarize(res: RunResult) -> dict:
    return {
        "seed": res.seed,
        "collisions": res.collisions,
        "final_cum_reward": res.final_cum_reward,
        "final_cum_abnormality": res.final_cum_abnormality,
        "final_cum_sinr": res.final_cum_sinr,
        "convergence_slot": convergence_slot(res.collided),
        "flagged_fraction": float(res.flagged.mean()),
    }


# -- top-level operations -----------------------------------------------------------


def run(cfg: dict, out_dir: str | None = None) -> dict:
    """Execute the scenario for every configured seed; returns the summary."""
    model_path = cfg["agent"]["model_path"]
    model = load_model(model_path) if model_path else None
    if cfg["agent"]["kind"] == "ain" and model is None:
        raise ConfigError("AIn agent requires agent.model_path")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    per_seed = {}
    for seed in cfg["seeds"]:
        res = run_single(cfg, seed, model)
        per_seed[str(seed)] = summarize(res)
        if out_dir:
            write_run_csv(os.path.join(out_dir, f"seed{seed}.csv"), res)
            write_episode_jsonl(os.path.join(out_dir, f"seed{seed}.jsonl"), res)
    summary = {"agent": cfg["agent"]["kind"], "seeds": per_seed}
    if out_dir:
        with open(os.path.join(out_dir, "summary.json"), "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
    return summary


def train(cfg: dict, out_path: str | None = None, seed: int | None = None) -> SignalModel:
    """Learn the clean-signal model (jammer forced absent) and calibrate th."""
    if seed is None:
        seed = cfg["seeds"][0]
    tr = cfg["training"]
    matrices = build_matrices(cfg)
    gng_params = GngParams(**tr["gng"])
    a_u = signals.amplitude_from_snr(cfg["snr_db"], cfg["noise_power"])
    noise_std = np.sqrt(np.diag(matrices.sigma_v))
    n_slots = tr["n_slots"]

    model = SignalModel(n_prbs=cfg["n_prbs"], matrices=matrices)
    persistence = cfg["model"]["c2_persistence"]
    for prb in range(1, cfg["n_prbs"] + 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1000 + prb]))
        feats = a_u * signals.generalized_stream(
            signals.markov_qpsk_stream(n_slots, persistence, rng)
        )
        obs = feats @ matrices.h.T + rng.normal(size=feats.shape) * noise_std
        tf = training_features(obs, matrices)
        sups = gng_fit(tf, gng_params, rng, prb)
        labels = assign_labels(tf, sups)
        transitions = estimate_transitions(
            labels, len(sups), n_segments=tr["n_segments"], laplace_k=tr["laplace_k"]
        )
        model.prbs[prb] = PrbModel(
            superstates=sups, transitions=transitions, threshold=float("inf")
        )

    _calibrate_thresholds(cfg, model, seed)
    if out_path:
        save_model(model, out_path)
    return model


def _calibrate_thresholds(cfg: dict, model: SignalModel, seed: int) -> None:
    """Set per-PRB abnormality thresholds from a clean PRB-hopping episode."""
    tr = cfg["training"]
    calib_cfg = copy.deepcopy(cfg)
    calib_cfg["n_slots"] = tr["calib_slots"]
    calib_seed = int(np.random.SeedSequence([seed, 77]).generate_state(1)[0] % (2**31))
    world = build_world(calib_cfg, calib_seed, jammer_enabled=False)
    rng_hop = np.random.default_rng(np.random.SeedSequence([seed, 78]))
    perception = Perception(
        model, cfg["filter"]["n_particles"],
        np.random.default_rng(np.random.SeedSequence([seed, 79])),
        skl_per_component=cfg["filter"]["skl_per_component"],
    )
    errs: list[float] = []
    per_prb: dict[int, float] = {}
    for _ in range(tr["calib_slots"]):
        prb = int(rng_hop.integers(1, cfg["n_prbs"] + 1))
        out = world.step(prb)
        sp = perception.process(prb, out.observation)
        err = sp.msgs.min_error_sq
        errs.append(err)
        per_prb[prb] = max(per_prb.get(prb, 0.0), err)
    arr = np.asarray(errs)
    q = tr["th_quantile"]
    base = float(arr.max()) if q >= 1.0 else float(np.quantile(arr, q))
    for prb, pm in model.prbs.items():
        pm.threshold = tr["th_margin"] * max(base, per_prb.get(prb, 0.0))


def _env_section(cfg: dict) -> dict:
    env = copy.deepcopy(cfg)
    env.pop("agent")
    return env


def bench(cfgs: list[dict], out_dir: str | None = None) -> list[dict]:
    """Run several agent configs against identical jammer/channel realizations.

    All configs must share the environment section; each seed reuses the same
    world seed across agents (common random numbers).
    """
    if len(cfgs) < 1:
        raise ConfigError("bench needs at least one config")
    base_env = _env_section(cfgs[0])
    for c in cfgs[1:]:
        if _env_section(c) != base_env:
            raise ConfigError("bench configs must share the environment section")

    labels = []
    for c in cfgs:
        label = c["agent"]["kind"]
        while label in labels:
            label += "_"
        labels.append(label)

    models: dict[str, SignalModel | None] = {}
    rows = []
    for label, c in zip(labels, cfgs):
        path = c["agent"]["model_path"]
        if path not in models:
            models[path] = load_model(path) if path else None
        if c["agent"]["kind"] == "ain" and models[path] is None:
            raise ConfigError("AIn agent requires agent.model_path")
        for seed in cfgs[0]["seeds"]:
            res = run_single(c, seed, models[path])
            s = summarize(res)
            s["agent"] = label
            rows.append(s)
            if out_dir:
                d = os.path.join(out_dir, label)
                os.makedirs(d, exist_ok=True)
                write_run_csv(os.path.join(d, f"seed{seed}.csv"), res)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        cols = [
            "agent", "seed", "collisions", "final_cum_reward",
            "final_cum_abnormality", "final_cum_sinr", "convergence_slot",
        ]
        with open(os.path.join(out_dir, "comparison.csv"), "w") as f:
            f.write(",".join(cols) + "\n")
            for r in rows:
                f.write(",".join(_fmt(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n")
        with open(os.path.join(out_dir, "summary.json"), "w") as f:
            json.dump(rows, f, indent=2, sort_keys=True)
    return rows
