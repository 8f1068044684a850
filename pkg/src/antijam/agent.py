"""Active-inference decision maker.

Three row-stochastic belief tables: the UAV's own PRB-transition beliefs, its
beliefs over the jammer's PRB transitions, and the state-conditioned action
table. Action selection masks the action prior with the predicted jammer
occupancy; abnormal slots produce generalized errors that are subtracted from
or added to table rows (clip-and-renormalize keeps every row a simplex).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .abnormality import GeneralizedErrorDiscrete, discrete_generalized_error

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-4   # no PRB ever becomes permanently unselectable
TIE_RTOL = 1e-12


@dataclass
class BeliefTables:
    p_uav: np.ndarray   # N x N, UAV PRB-transition beliefs
    p_jam: np.ndarray   # N x N, beliefs over jammer PRB transitions
    ain: np.ndarray     # N x N, P(action | state PRB)

    @property
    def n(self) -> int:
        return self.ain.shape[0]


@dataclass
class ActionError:
    anchor: int          # chosen action a*
    delta: np.ndarray    # lambda(a) - pi(a), sums to 0


def init_tables(n: int) -> BeliefTables:
    """All entries 1/N: no prior information about jammer or preferences."""
    if n < 2:
        raise ValueError("need at least 2 PRBs")
    u = np.full((n, n), 1.0 / n)
    return BeliefTables(p_uav=u.copy(), p_jam=u.copy(), ain=u.copy())


def save_tables(tables: BeliefTables, path: str) -> None:
    """Snapshot the belief tables to JSON for inspection/replay."""
    import json

    with open(path, "w") as f:
        json.dump(
            {
                "version": 1,
                "p_uav": tables.p_uav.tolist(),
                "p_jam": tables.p_jam.tolist(),
                "ain": tables.ain.tolist(),
            },
            f,
            indent=1,
            sort_keys=True,
        )


def load_tables(path: str) -> BeliefTables:
    import json

    with open(path) as f:
        d = json.load(f)
    if d.get("version") != 1:
        raise ValueError("unsupported belief-table snapshot version")
    return BeliefTables(
        p_uav=np.array(d["p_uav"]), p_jam=np.array(d["p_jam"]), ain=np.array(d["ain"])
    )


def _renormalize_rows(table: np.ndarray, rows, floor: float = 0.0) -> None:
    sub = np.clip(table[rows], floor, 1.0)
    table[rows] = sub / sub.sum(axis=-1, keepdims=True)


def correction_vector(n: int, anchor: int, gamma: float) -> np.ndarray:
    """Simplex-preserving correction: -gamma at the anchor, spread elsewhere."""
    v = np.full(n, gamma / (n - 1))
    v[anchor - 1] = -gamma
    return v


def select_action(
    tables: BeliefTables,
    prev_state_prb: int,
    rng: np.random.Generator,
    jammer_prb_estimate: int | None = None,
) -> int:
    """Argmax of (action prior) x (1 - predicted jammer occupancy).

    The occupancy prediction is the p_jam row of the last known/estimated
    jammer PRB, or the column marginal when no collision has been seen yet
    (uniform tables then degenerate to a uniform random draw). Ties break
    uniformly at random.
    """
    prior = tables.ain[prev_state_prb - 1]
    if jammer_prb_estimate is None:
        risk = tables.p_jam.mean(axis=0)
    else:
        risk = tables.p_jam[jammer_prb_estimate - 1]
    score = prior * (1.0 - risk)
    top = score.max()
    candidates = np.flatnonzero(score >= top - TIE_RTOL * max(abs(top), 1.0))
    return int(candidates[rng.integers(0, len(candidates))]) + 1


def lambda_action(
    tables: BeliefTables,
    chosen: int,
    gamma_star: float,
    abnormal: bool,
    state_prb: int,
) -> np.ndarray:
    """Diagnostic action message: the prior row, surprise-shifted when abnormal.

    gamma is gamma_star on abnormal slots and 0 otherwise; the chosen entry is
    decreased by gamma (clamped to the row's headroom) and every other entry
    gains gamma/(N-1), so the message stays a simplex.
    """
    row = tables.ain[state_prb - 1].copy()
    if not abnormal or gamma_star <= 0.0:
        return row
    n = tables.n
    gamma = min(gamma_star, row[chosen - 1])
    row += correction_vector(n, chosen, gamma)
    if row.min() < 0.0 or row.max() > 1.0:
        log.debug("lambda_action clipped out-of-range entries")
        row = np.clip(row, 0.0, 1.0)
        row /= row.sum()
    return row


def apply_updates(
    tables: BeliefTables,
    action_error: ActionError,
    superstate_error: GeneralizedErrorDiscrete,
    chosen: int,
    from_state: int,
    to_state: int,
    floor: float = PROB_FLOOR,
    update_jam: bool = True,
) -> BeliefTables:
    """Apply the three generalized-error belief updates (in place).

    - jammer model: the row of the collision PRB loses the action error
      (raising the chance the jammer reuses that resource);
    - action table: every row gains the action error at once (the multi-row
      update that replaces single-entry value propagation);
    - own transition model: the (from, to) entry is suppressed with magnitude
      equal to the superstate error's total variation.
    Touched rows are clipped and renormalized; zero errors are a no-op.
    """
    n = tables.n
    a_delta = np.asarray(action_error.delta, dtype=float)
    s_delta = np.asarray(superstate_error.delta, dtype=float)
    if np.any(a_delta != 0.0):
        if update_jam:
            tables.p_jam[to_state - 1] -= a_delta
            _renormalize_rows(tables.p_jam, to_state - 1)
        tables.ain += a_delta[None, :]
        _renormalize_rows(tables.ain, slice(None), floor=floor)
    tv = 0.5 * float(np.abs(s_delta).sum())
    if tv > 0.0:
        gamma_u = min(tv, tables.p_uav[from_state - 1, to_state - 1])
        tables.p_uav[from_state - 1] += correction_vector(n, to_state, gamma_u)
        _renormalize_rows(tables.p_uav, from_state - 1)
    return tables


class JammerTracker:
    """Belief about where the jammer is, anchored at detected collisions.

    Between collisions the estimate advances one argmax step per slot through
    the learned jammer transition rows (holding position while a row is still
    near-uniform). Collision pairs vote for a constant circular drift, and the
    Eq.-11-shaped correction is applied along the whole inferred path — the
    simultaneous multi-row update that lets a sweep pattern be learned from
    sparse hits.
    """

    def __init__(self, n_prbs: int, gamma_jam: float = 0.5):
        self.n = n_prbs
        self.gamma_jam = gamma_jam
        self.anchor_t: int | None = None
        self.anchor_prb: int | None = None
        self.estimate: int | None = None

    def _row_learned(self, row: np.ndarray) -> bool:
        return float(row.max()) > 1.5 / self.n

    def advance(self, p_jam: np.ndarray) -> None:
        """Move the estimate one slot forward through the transition beliefs."""
        if self.estimate is None:
            return
        row = p_jam[self.estimate - 1]
        if self._row_learned(row):
            self.estimate = int(np.argmax(row)) + 1

    def risk_estimate(self) -> int | None:
        return self.estimate

    def _solve_drift(self, dt: int, dq: int) -> int | None:
        """Smallest |delta| with delta*dt == dq (mod N), if any."""
        for mag in range(0, self.n // 2 + 1):
            for delta in ((mag,) if mag == 0 else (mag, -mag)):
                if (delta * dt - dq) % self.n == 0:
                    return delta
        return None

    def _bump(self, p_jam: np.ndarray, row_prb: int, dest_prb: int) -> None:
        p_jam[row_prb - 1] -= correction_vector(self.n, dest_prb, self.gamma_jam)
        _renormalize_rows(p_jam, row_prb - 1)

    def on_collision(self, t: int, prb: int, p_jam: np.ndarray) -> None:
        if self.anchor_t is not None and t > self.anchor_t:
            dt = t - self.anchor_t
            dq = (prb - self.anchor_prb) % self.n
            delta = self._solve_drift(dt, dq)
            if delta is None:
                self._bump(p_jam, prb, prb)
            else:
                # One Eq.-11-shaped correction per inferred path step; wrapped
                # laps re-bump the same rows, so repeated evidence dominates
                # any earlier single-row prior.
                q = self.anchor_prb
                for _ in range(min(dt + 1, 4 * self.n)):
                    dest = (q - 1 + delta) % self.n + 1
                    self._bump(p_jam, q, dest)
                    q = dest
        else:
            self._bump(p_jam, prb, prb)
        self.anchor_t = t
        self.anchor_prb = prb
        self.estimate = prb


@dataclass
class AinParams:
    kappa: float = 0.1        # gamma* = min(gamma_max, kappa * SKL)
    gamma_max: float = 1.0
    prob_floor: float = PROB_FLOOR
    gamma_jam: float = 0.5


class ActiveInferenceAgent:
    """Online PRB selector driven by abnormality instead of external reward."""

    def __init__(self, n_prbs: int, rng: np.random.Generator, params: AinParams | None = None):
        self.params = params or AinParams()
        self.tables = init_tables(n_prbs)
        self.tracker = JammerTracker(n_prbs, gamma_jam=self.params.gamma_jam)
        self.rng = rng
        self.prev_prb = 1
        self.t = 0

    def select(self) -> int:
        return select_action(
            self.tables, self.prev_prb, self.rng, self.tracker.risk_estimate()
        )

    def observe(self, chosen: int, skl: float, abnormal: bool,
                pi_msg: np.ndarray, lambda_msg: np.ndarray) -> None:
        """Consume one slot's perception result and update beliefs."""
        self.tracker.advance(self.tables.p_jam)
        if abnormal:
            gamma_star = min(self.params.gamma_max, self.params.kappa * max(skl, 0.0))
            lam = lambda_action(self.tables, chosen, gamma_star, True, self.prev_prb)
            err_a = ActionError(
                anchor=chosen, delta=lam - self.tables.ain[self.prev_prb - 1]
            )
            err_s = discrete_generalized_error(
                pi_msg, lambda_msg, anchor=int(np.argmax(pi_msg)) + 1
            )
            apply_updates(
                self.tables, err_a, err_s, chosen,
                from_state=self.prev_prb, to_state=chosen,
                floor=self.params.prob_floor, update_jam=False,
            )
            self.tracker.on_collision(self.t, chosen, self.tables.p_jam)
        self.prev_prb = chosen
        self.t += 1
