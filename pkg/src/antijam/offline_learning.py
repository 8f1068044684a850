"""Offline learning of the clean-signal model.

Pipeline (jammer absent): project generalized errors onto the state space with
a null-force predictor, cluster them with Growing Neural Gas into superstates,
then estimate per-segment transition matrices from the labeled sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signals import GdbnMatrices


@dataclass
class Superstate:
    id: int              # 1-based, dense per PRB
    prb: int
    mean: np.ndarray     # generalized mean, shape (4,)
    cov: np.ndarray      # SPD covariance, shape (4, 4)


@dataclass
class GngParams:
    max_nodes: int = 10
    lambda_steps: int = 100        # insertion interval
    eps_b: float = 0.2             # winner learning rate
    eps_n: float = 0.006           # neighbor learning rate
    max_edge_age: int = 50
    insert_error_decay: float = 0.5
    step_error_decay: float = 0.995
    cov_reg: float = 1e-6          # added to cluster covariances
    n_passes: int = 1


def null_force_predictions(observations: np.ndarray, matrices: GdbnMatrices) -> np.ndarray:
    """One-step state predictions with zero control (no rules discovered yet).

    The state estimate at t-1 is the observation projected back through H;
    the prediction is A applied to it. Row 0 predicts from a zero state.
    """
    obs = np.asarray(observations, dtype=float)
    h_inv = np.linalg.inv(matrices.h)
    est = obs @ h_inv.T
    preds = np.zeros_like(est)
    preds[1:] = est[:-1] @ matrices.a.T
    return preds


def generalized_errors(
    observations: np.ndarray, predictions: np.ndarray, h: np.ndarray
) -> np.ndarray:
    """Per-slot error projected on the state space: H^-1 (Z - H X_pred)."""
    obs = np.asarray(observations, dtype=float)
    preds = np.asarray(predictions, dtype=float)
    if obs.shape != preds.shape:
        raise ValueError("observations and predictions must be aligned")
    h = np.asarray(h, dtype=float)
    if abs(np.linalg.det(h)) < 1e-12:
        raise ValueError("observation map H is singular")
    h_inv = np.linalg.inv(h)
    return (obs - preds @ h.T) @ h_inv.T


def training_features(observations: np.ndarray, matrices: GdbnMatrices) -> np.ndarray:
    """Generalized-error pairs [position(X), position(E_dot)] used for clustering.

    With the default matrices this equals [I, Q, dI, dQ] of the projected
    clean observations.
    """
    preds = null_force_predictions(observations, matrices)
    errs = generalized_errors(observations, preds, matrices.h)
    est = np.asarray(observations, dtype=float) @ np.linalg.inv(matrices.h).T
    feats = np.empty_like(est)
    feats[:, :2] = est[:, :2]
    feats[:, 2:] = errs[:, :2]
    feats[0, 2:] = 0.0  # no previous slot: derivative defined as zero
    return feats


class _GngState:
    """Growing Neural Gas working state (Fritzke-style, array-backed)."""

    def __init__(self, samples: np.ndarray, params: GngParams, rng: np.random.Generator):
        i, j = rng.choice(len(samples), size=2, replace=False)
        self.w = [samples[i].copy(), samples[j].copy()]
        self.err = [0.0, 0.0]
        self.edges: dict[tuple[int, int], int] = {(0, 1): 0}
        self.params = params

    def _edge_key(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def neighbors(self, a: int) -> list[int]:
        out = []
        for (i, j) in self.edges:
            if i == a:
                out.append(j)
            elif j == a:
                out.append(i)
        return out

    def adapt(self, x: np.ndarray) -> None:
        p = self.params
        w = np.asarray(self.w)
        d2 = np.sum((w - x) ** 2, axis=1)
        order = np.argsort(d2, kind="stable")
        s1, s2 = int(order[0]), int(order[1])

        for b in self.neighbors(s1):
            self.edges[self._edge_key(s1, b)] += 1
        self.err[s1] += float(d2[s1])
        self.w[s1] = self.w[s1] + p.eps_b * (x - self.w[s1])
        for b in self.neighbors(s1):
            self.w[b] = self.w[b] + p.eps_n * (x - self.w[b])
        self.edges[self._edge_key(s1, s2)] = 0

        stale = [k for k, age in self.edges.items() if age > p.max_edge_age]
        for k in stale:
            del self.edges[k]
        self._drop_isolated()
        self.err = [e * p.step_error_decay for e in self.err]

    def _drop_isolated(self) -> None:
        if len(self.w) <= 2:
            return
        connected = set()
        for (i, j) in self.edges:
            connected.add(i)
            connected.add(j)
        keep = [i for i in range(len(self.w)) if i in connected]
        if len(keep) == len(self.w) or len(keep) < 2:
            return
        remap = {old: new for new, old in enumerate(keep)}
        self.w = [self.w[i] for i in keep]
        self.err = [self.err[i] for i in keep]
        self.edges = {
            (min(remap[i], remap[j]), max(remap[i], remap[j])): age
            for (i, j), age in self.edges.items()
            if i in remap and j in remap
        }

    def insert(self) -> None:
        if len(self.w) >= self.params.max_nodes:
            return
        q = int(np.argmax(self.err))
        nbrs = self.neighbors(q)
        if not nbrs:
            return
        f = max(nbrs, key=lambda b: self.err[b])
        r = len(self.w)
        self.w.append(0.5 * (self.w[q] + self.w[f]))
        self.edges.pop(self._edge_key(q, f), None)
        self.edges[self._edge_key(q, r)] = 0
        self.edges[self._edge_key(f, r)] = 0
        self.err[q] *= self.params.insert_error_decay
        self.err[f] *= self.params.insert_error_decay
        self.err.append(self.err[q])


def gng_fit(
    errors: np.ndarray,
    params: GngParams,
    rng: np.random.Generator,
    prb: int = 1,
) -> list[Superstate]:
    """Cluster generalized errors into superstates with Growing Neural Gas.

    Node positions become cluster means; covariances are the sample covariance
    of the samples assigned (nearest node), regularized for invertibility.
    Empty clusters are dropped and ids re-densified.
    """
    data = np.asarray(errors, dtype=float)
    if data.ndim != 2 or len(data) < 2:
        raise ValueError("need at least 2 samples to cluster")

    state = _GngState(data, params, rng)
    step = 0
    for _ in range(params.n_passes):
        for x in data:
            state.adapt(x)
            step += 1
            if step % params.lambda_steps == 0:
                state.insert()

    nodes = np.asarray(state.w)
    assign = np.argmin(
        ((data[:, None, :] - nodes[None, :, :]) ** 2).sum(axis=2), axis=1
    )
    out: list[Superstate] = []
    next_id = 1
    dim = data.shape[1]
    reg = params.cov_reg * np.eye(dim)
    for k in range(len(nodes)):
        members = data[assign == k]
        if len(members) == 0:
            continue  # empty cluster: dropped, ids stay dense
        if len(members) == 1:
            cov = reg.copy()
        else:
            cov = np.cov(members, rowvar=False) + reg
        out.append(Superstate(id=next_id, prb=prb, mean=nodes[k].copy(), cov=cov))
        next_id += 1
    return out


def assign_labels(samples: np.ndarray, superstates: list[Superstate]) -> np.ndarray:
    """Nearest-superstate id (1-based) for each sample."""
    means = np.asarray([s.mean for s in superstates])
    d2 = ((np.asarray(samples)[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1) + 1


def estimate_transitions(
    labels: np.ndarray, n_states: int, n_segments: int = 1, laplace_k: float = 1.0
) -> np.ndarray:
    """Row-stochastic bigram transition matrices, one per time segment.

    The label sequence is split into n_segments equal blocks; counts within a
    block get Laplace smoothing k and are row-normalized. Rows with no mass
    fall back to uniform.
    """
    labels = np.asarray(labels, dtype=int)
    if len(labels) < 2:
        raise ValueError("need a sequence of at least 2 labels")
    out = np.zeros((n_segments, n_states, n_states))
    bounds = np.linspace(0, len(labels), n_segments + 1).astype(int)
    for seg in range(n_segments):
        lo, hi = bounds[seg], bounds[seg + 1]
        counts = np.full((n_states, n_states), float(laplace_k))
        src = labels[lo : max(hi - 1, lo)]
        dst = labels[lo + 1 : hi]
        np.add.at(counts, (src - 1, dst - 1), 1.0)
        sums = counts.sum(axis=1, keepdims=True)
        uniform = np.full(n_states, 1.0 / n_states)
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(sums > 0, counts / np.where(sums == 0, 1.0, sums), uniform)
        out[seg] = rows
    return out


# -- learned model container & JSON persistence --------------------------------

MODEL_VERSION = 1


@dataclass
class PrbModel:
    superstates: list[Superstate]
    transitions: np.ndarray   # (n_segments, M, M)
    threshold: float          # abnormality threshold th for this PRB

    @property
    def means(self) -> np.ndarray:
        return np.asarray([s.mean for s in self.superstates])

    @property
    def covs(self) -> np.ndarray:
        return np.asarray([s.cov for s in self.superstates])


@dataclass
class SignalModel:
    n_prbs: int
    matrices: GdbnMatrices
    prbs: dict[int, PrbModel] = field(default_factory=dict)
    version: int = MODEL_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "n_prbs": self.n_prbs,
            "matrices": {
                "a": self.matrices.a.tolist(),
                "b": self.matrices.b.tolist(),
                "h": self.matrices.h.tolist(),
                "sigma_w": self.matrices.sigma_w.tolist(),
                "sigma_v": self.matrices.sigma_v.tolist(),
            },
            "prbs": {
                str(prb): {
                    "threshold": pm.threshold,
                    "transitions": pm.transitions.tolist(),
                    "superstates": [
                        {"id": s.id, "mean": s.mean.tolist(), "cov": s.cov.tolist()}
                        for s in pm.superstates
                    ],
                }
                for prb, pm in sorted(self.prbs.items())
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalModel":
        if "version" not in d:
            raise ValueError("model file missing mandatory version field")
        if d["version"] != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d['version']}")
        m = d["matrices"]
        matrices = GdbnMatrices(
            a=np.array(m["a"]), b=np.array(m["b"]), h=np.array(m["h"]),
            sigma_w=np.array(m["sigma_w"]), sigma_v=np.array(m["sigma_v"]),
        )
        prbs = {}
        for key, pm in d["prbs"].items():
            prb = int(key)
            superstates = [
                Superstate(id=s["id"], prb=prb, mean=np.array(s["mean"]), cov=np.array(s["cov"]))
                for s in pm["superstates"]
            ]
            prbs[prb] = PrbModel(
                superstates=superstates,
                transitions=np.array(pm["transitions"]),
                threshold=float(pm["threshold"]),
            )
        return cls(n_prbs=d["n_prbs"], matrices=matrices, prbs=prbs, version=d["version"])


MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "n_prbs", "matrices", "prbs"],
    "properties": {
        "version": {"type": "integer"},
        "n_prbs": {"type": "integer", "minimum": 1},
        "matrices": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a", "b", "h", "sigma_w", "sigma_v"],
            "properties": {
                k: {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
                for k in ("a", "b", "h", "sigma_w", "sigma_v")
            },
        },
        "prbs": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": False,
                "required": ["threshold", "transitions", "superstates"],
                "properties": {
                    "threshold": {"type": "number"},
                    "transitions": {"type": "array"},
                    "superstates": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["id", "mean", "cov"],
                            "properties": {
                                "id": {"type": "integer", "minimum": 1},
                                "mean": {"type": "array", "items": {"type": "number"}},
                                "cov": {"type": "array"},
                            },
                        },
                    },
                },
            },
        },
    },
}


def save_model(model: SignalModel, path: str) -> None:
    import json

    with open(path, "w") as f:
        json.dump(model.to_dict(), f, indent=1, sort_keys=True)


def load_model(path: str) -> SignalModel:
    import json

    import jsonschema

    with open(path) as f:
        d = json.load(f)
    jsonschema.validate(d, MODEL_SCHEMA)
    return SignalModel.from_dict(d)
