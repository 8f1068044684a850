"""Multi-level surprise measurement.

Discrete level: occurrence-weighted symmetric Kullback-Leibler divergence
between the predictive and diagnostic superstate messages. Continuous level:
negative log Bhattacharyya coefficient between the predictive and diagnostic
Gaussians. Generalized errors are message differences used as update forces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mjpf import Gaussian

PROB_FLOOR = 1e-12


@dataclass
class AbnormalitySignal:
    skl: float            # discrete-level indicator, >= 0
    bhatt: float          # continuous-level indicator, >= 0
    is_abnormal: bool     # generalized-error magnitude >= configured threshold


@dataclass
class GeneralizedErrorDiscrete:
    anchor: int           # source superstate id
    delta: np.ndarray     # lambda(S) - pi(S), sums to 0


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def skl_abnormality(
    pi_msg: np.ndarray,
    lambda_msg: np.ndarray,
    occurrence: np.ndarray,
    per_component: bool = False,
) -> float:
    """Occurrence-weighted symmetric KL between the two discrete messages.

    As written, each winning superstate's occurrence probability weights the
    full-distribution divergence (so when the occurrence sums to one the value
    is exactly D_KL(pi||lambda) + D_KL(lambda||pi)). The per-component reading
    weights the individual divergence terms instead.
    """
    p = np.maximum(np.asarray(pi_msg, dtype=float), PROB_FLOOR)
    q = np.maximum(np.asarray(lambda_msg, dtype=float), PROB_FLOOR)
    pr = np.asarray(occurrence, dtype=float)
    winning = pr > 0.0
    if per_component:
        terms = p * np.log(p / q) + q * np.log(q / p)
        return float(np.sum(pr[winning] * terms[winning]))
    dkl = _kl(p, q) + _kl(q, p)
    return float(np.sum(pr[winning]) * dkl)


def bhattacharyya_abnormality(pi_gauss: Gaussian, lambda_gauss: Gaussian) -> float:
    """-ln BC for two Gaussians via the closed-form Bhattacharyya distance.

    D_B = (1/8) dmu^T S^-1 dmu + (1/2) ln(det S / sqrt(det S1 det S2)),
    with S the average covariance. Singular averages get a floor-and-retry.
    """
    mu1, s1 = np.asarray(pi_gauss.mean, float), np.asarray(pi_gauss.cov, float)
    mu2, s2 = np.asarray(lambda_gauss.mean, float), np.asarray(lambda_gauss.cov, float)
    dmu = mu1 - mu2
    jitter = 0.0
    for _ in range(6):
        sbar = 0.5 * (s1 + s2) + jitter * np.eye(len(mu1))
        sign_b, logdet_b = np.linalg.slogdet(sbar)
        sign_1, logdet_1 = np.linalg.slogdet(s1 + jitter * np.eye(len(mu1)))
        sign_2, logdet_2 = np.linalg.slogdet(s2 + jitter * np.eye(len(mu1)))
        if min(sign_b, sign_1, sign_2) > 0:
            quad = float(dmu @ np.linalg.solve(sbar, dmu))
            return quad / 8.0 + 0.5 * (logdet_b - 0.5 * (logdet_1 + logdet_2))
        jitter = max(jitter * 10.0, 1e-10)
    raise np.linalg.LinAlgError("covariances not repairable for Bhattacharyya")


def discrete_generalized_error(
    pi_msg: np.ndarray, lambda_msg: np.ndarray, anchor: int
) -> GeneralizedErrorDiscrete:
    """Elementwise lambda - pi attached to the source superstate."""
    p = np.asarray(pi_msg, dtype=float)
    q = np.asarray(lambda_msg, dtype=float)
    if p.shape != q.shape:
        raise ValueError("messages must share a support")
    return GeneralizedErrorDiscrete(anchor=anchor, delta=q - p)


def evaluate(
    msgs, error_sq: float, threshold: float, skl_per_component: bool = False
) -> AbnormalitySignal:
    """Both indicators plus the normal/abnormal verdict for one slot.

    The verdict compares the continuous generalized-error magnitude (squared
    Mahalanobis of the innovation against the best-fitting regime) to the
    calibrated threshold; the SKL and Bhattacharyya values are the reported
    multi-level indicators.
    """
    return AbnormalitySignal(
        skl=skl_abnormality(
            msgs.discrete_pi, msgs.discrete_lambda, msgs.discrete_pi,
            per_component=skl_per_component,
        ),
        bhatt=bhattacharyya_abnormality(msgs.cont_pi, msgs.cont_lambda),
        is_abnormal=bool(error_sq >= threshold),
    )
