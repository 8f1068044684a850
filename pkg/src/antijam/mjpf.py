"""Modified Markov Jump Particle Filter: a particle filter over superstates
with one Kalman filter per particle.

Top-down predictive messages pi(S), pi(X) come from propagating particles
through the superstate transition matrix and the per-particle KF prediction
(control = sampled cluster's generalized mean). Bottom-up diagnostic messages
lambda(X), lambda(S) come from the observation likelihood; particle weights
are multiplied by the likelihood evaluated at the particle's prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import GdbnMatrices

LOG_2PI = float(np.log(2.0 * np.pi))
COV_FLOOR = 1e-10


@dataclass
class Particle:
    """One superstate hypothesis with its Kalman state (inspection view)."""

    superstate_id: int
    weight: float
    kf_mean: np.ndarray
    kf_cov: np.ndarray


@dataclass
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray


@dataclass
class MessagePair:
    discrete_pi: np.ndarray       # pi(S), simplex over superstates
    discrete_lambda: np.ndarray   # lambda(S), simplex over superstates
    cont_pi: Gaussian             # pi(X)
    cont_lambda: Gaussian         # lambda(X)
    min_error_sq: float = 0.0     # min over regimes of the squared Mahalanobis
    log_evidence: float = 0.0     # log sum_m pi_m N(z; pred_m, S_m)


@dataclass
class RegimeTables:
    """Per-PRB model tables precomputed for the filter hot path."""

    means: np.ndarray        # (M, n)
    covs: np.ndarray         # (M, n, n)
    transitions: np.ndarray  # (M, M) row-stochastic
    trans_cum: np.ndarray    # row cumulative sums
    bsb: np.ndarray          # B Sigma_S B^T per cluster
    ctrl: np.ndarray         # B mu_S per cluster

    @property
    def m(self) -> int:
        return len(self.means)


def build_regime_tables(
    means, covs, transitions, matrices: GdbnMatrices
) -> RegimeTables:
    means = np.asarray(means, dtype=float)
    covs = np.asarray(covs, dtype=float)
    trans = np.asarray(transitions, dtype=float)
    if trans.ndim == 3:  # (n_segments, M, M): online use takes segment 0
        trans = trans[0]
    trans_cum = np.cumsum(trans, axis=1)
    trans_cum[:, -1] = 1.0
    b = matrices.b
    bsb = b @ covs @ b.T
    ctrl = means @ b.T
    return RegimeTables(
        means=means, covs=covs, transitions=trans,
        trans_cum=trans_cum, bsb=bsb, ctrl=ctrl,
    )


def effective_sample_size(weights: np.ndarray) -> float:
    return float(1.0 / np.sum(np.asarray(weights) ** 2))


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices of a systematic resample of the normalized weights."""
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # guard against rounding
    return np.searchsorted(cumulative, positions)


def _floor_eigenvalues(covs: np.ndarray, floor: float = COV_FLOOR) -> np.ndarray:
    w, v = np.linalg.eigh(covs)
    w = np.maximum(w, floor)
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2)


def _chol_with_repair(covs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.cholesky(covs), covs
    except np.linalg.LinAlgError:
        repaired = _floor_eigenvalues(covs)
        return np.linalg.cholesky(repaired), repaired


def _batched_loggauss(resid: np.ndarray, covs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log N(resid; 0, covs) plus the squared Mahalanobis, batched."""
    n = resid.shape[-1]
    chol, _ = _chol_with_repair(covs)
    with np.errstate(over="ignore"):
        sol = np.linalg.solve(chol, resid[..., None])[..., 0]
        quad = np.sum(sol**2, axis=-1)
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    return -0.5 * (quad + logdet + n * LOG_2PI), quad


class MarkovJumpFilter:
    """Filter over one regime model (means/covs/transition matrix).

    `set_regimes` swaps in another PRB's model mid-run: continuous states
    persist (the underlying stream is continuous in time) while discrete
    hypotheses re-anchor to the new model's nearest cluster, since cluster
    ids are PRB-local.
    """

    def __init__(
        self,
        means: np.ndarray,
        covs: np.ndarray,
        transitions: np.ndarray,
        matrices: GdbnMatrices,
        n_particles: int,
        rng: np.random.Generator,
    ):
        if n_particles < 1:
            raise ValueError("need at least one particle")
        self.mats = matrices
        self.L = n_particles
        self.rng = rng
        self.degenerate = False
        self._dim = matrices.a.shape[0]
        self._eye = np.eye(self._dim)
        self._h_inv = np.linalg.inv(matrices.h)
        self._lam_floor_cov = self._h_inv @ matrices.sigma_v @ self._h_inv.T
        self.tables = build_regime_tables(means, covs, transitions, matrices)
        self.ids = rng.integers(0, self.M, size=self.L)
        self.kf_means = self.tables.means[self.ids].copy()
        self.kf_covs = self.tables.covs[self.ids] + self.mats.sigma_w
        self.weights = np.full(self.L, 1.0 / self.L)
        self._collapse_posterior()
        self._predicted = False
        self._checkpoint = None

    @property
    def M(self) -> int:
        return self.tables.m

    @property
    def means(self) -> np.ndarray:
        return self.tables.means

    @property
    def transitions(self) -> np.ndarray:
        return self.tables.transitions

    def set_regimes(self, means, covs, transitions) -> None:
        tables = build_regime_tables(means, covs, transitions, self.mats)
        d2 = ((self.tables.means[:, None, :] - tables.means[None, :, :]) ** 2).sum(axis=2)
        self.swap_tables(tables, np.argmin(d2, axis=1))

    def swap_tables(self, tables: RegimeTables, id_mapping: np.ndarray) -> None:
        """Fast-path regime swap with a precomputed old->new cluster mapping."""
        self.tables = tables
        self.ids = id_mapping[self.ids]

    # -- filtering steps -------------------------------------------------------

    def predict(self) -> None:
        """Propagate particles through the transition rows and KF-predict."""
        rt = self.tables
        u = self.rng.random(self.L)
        rows = rt.trans_cum[self.ids]
        self.ids = np.sum(rows < u[:, None], axis=1).astype(np.intp)
        a = self.mats.a
        self.kf_means = self.kf_means @ a.T + rt.ctrl[self.ids]
        apa = (a @ self.kf_covs) @ a.T
        covs = apa + rt.bsb[self.ids] + self.mats.sigma_w
        self.kf_covs = 0.5 * (covs + covs.transpose(0, 2, 1))
        self._predicted = True

    def update(self, z: np.ndarray) -> MessagePair:
        """Kalman-update each particle against z and emit the message pair."""
        if not self._predicted:
            raise RuntimeError("predict must be called before update each slot")
        z = np.asarray(z, dtype=float)
        h, r = self.mats.h, self.mats.sigma_v

        pre_weights = self.weights.copy()
        pi_s = np.bincount(self.ids, weights=pre_weights, minlength=self.M)
        cont_pi = self._collapse(self.kf_means, self.kf_covs, pre_weights)
        self._checkpoint = (
            self.ids.copy(), self.kf_means.copy(), self.kf_covs.copy(), pre_weights,
        )

        # lambda(S): observation likelihood per superstate, from the collapsed
        # previous posterior so it covers clusters with no particles this slot.
        lam_s, min_err_sq, log_ev = self._lambda_message(z, pi_s)

        # lambda(X): N(z; Hx, R) as a density over x.
        cont_lambda = Gaussian(mean=self._h_inv @ z, cov=self._lam_floor_cov)

        # per-particle marginal innovation likelihood (the factorization
        # P(Z|X) P(X|S) integrated over the particle's predictive density)
        resid = z - self.kf_means @ h.T
        s_cov = (h @ self.kf_covs) @ h.T + r
        loglik, _ = _batched_loggauss(resid, s_cov)

        # KF measurement update (Joseph form keeps covariances PSD).
        pht = self.kf_covs @ h.T
        gain = np.linalg.solve(s_cov, pht.transpose(0, 2, 1)).transpose(0, 2, 1)
        self.kf_means = self.kf_means + (gain @ resid[:, :, None])[:, :, 0]
        ikh = self._eye - gain @ h
        covs = (ikh @ self.kf_covs) @ ikh.transpose(0, 2, 1) + (gain @ r) @ gain.transpose(0, 2, 1)
        self.kf_covs = 0.5 * (covs + covs.transpose(0, 2, 1))

        # weight update W <- W * lambda(S) evaluated at the particle
        with np.errstate(invalid="ignore"):
            shifted = np.exp(loglik - loglik.max())
        new_w = pre_weights * shifted
        total = new_w.sum()
        self.degenerate = not np.isfinite(total) or total <= 0.0
        if self.degenerate:
            self.weights = np.full(self.L, 1.0 / self.L)
        else:
            self.weights = new_w / total

        self._collapse_posterior()
        self._predicted = False
        return MessagePair(
            discrete_pi=pi_s,
            discrete_lambda=lam_s,
            cont_pi=cont_pi,
            cont_lambda=cont_lambda,
            min_error_sq=min_err_sq,
            log_evidence=log_ev,
        )

    def reject_observation(self) -> None:
        """Roll the measurement update back (posterior <- prediction).

        Called when the slot is judged abnormal so a jammed observation does
        not drag the clean-signal belief; the prediction stands in as the
        posterior and the next slot starts from an uncorrupted anchor.
        """
        if self._checkpoint is None:
            return
        ids, means, covs, weights = self._checkpoint
        self.ids, self.kf_means, self.kf_covs, self.weights = ids, means, covs, weights
        self._collapse_posterior()
        self._checkpoint = None

    def resample(self) -> bool:
        """Systematic resample when ESS drops below L/2; True if triggered."""
        if effective_sample_size(self.weights) < self.L / 2.0:
            idx = systematic_resample(self.weights, self.rng)
            self.ids = self.ids[idx]
            self.kf_means = self.kf_means[idx]
            self.kf_covs = self.kf_covs[idx]
            self.weights = np.full(self.L, 1.0 / self.L)
            return True
        return False

    # -- message/posterior helpers ---------------------------------------------

    def _lambda_message(self, z, pi_s) -> tuple[np.ndarray, float, float]:
        rt = self.tables
        a, h, r = self.mats.a, self.mats.h, self.mats.sigma_v
        pred = (a @ self.post_mean)[None, :] + rt.ctrl
        base = a @ self.post_cov @ a.T + self.mats.sigma_w
        covs = rt.bsb + base[None, :, :]
        resid = z[None, :] - pred @ h.T
        s = (h @ covs) @ h.T + r
        ll, quad = _batched_loggauss(resid, s)
        shift = ll.max()
        with np.errstate(invalid="ignore"):
            log_ev = float(np.log(np.sum((pi_s + 1e-300) * np.exp(ll - shift))) + shift)
            lam = np.exp(ll - shift)
        if not np.isfinite(lam.sum()) or lam.sum() <= 0.0:
            lam = np.full(self.M, 1.0 / self.M)
            return lam, float(quad.min()), log_ev
        return lam / lam.sum(), float(quad.min()), log_ev

    def _collapse(self, means, covs, weights) -> Gaussian:
        mu = weights @ means
        diff = means - mu
        cov = np.tensordot(weights, covs, axes=1) + (weights[:, None] * diff).T @ diff
        return Gaussian(mean=mu, cov=0.5 * (cov + cov.T))

    def _collapse_posterior(self) -> None:
        g = self._collapse(self.kf_means, self.kf_covs, self.weights)
        self.post_mean, self.post_cov = g.mean, g.cov

    @property
    def posterior(self) -> np.ndarray:
        """Post-update discrete posterior over superstates."""
        return np.bincount(self.ids, weights=self.weights, minlength=self.M)

    @property
    def particles(self) -> list[Particle]:
        return [
            Particle(
                superstate_id=int(self.ids[l]) + 1,
                weight=float(self.weights[l]),
                kf_mean=self.kf_means[l].copy(),
                kf_cov=self.kf_covs[l].copy(),
            )
            for l in range(self.L)
        ]
