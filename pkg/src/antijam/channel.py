"""Air-to-ground channel: path loss, shadowing, channel gain and SINR.

Ground-equipment-to-UAV links (GBS->UAV and jammer->UAV) follow the
cellular-to-UAV model: terrestrial path loss of the point beneath the UAV,
plus an angle-dependent excess aerial term, plus angle-dependent lognormal
shadowing. All angles are in degrees, distances in meters, powers in watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateGeometryError(ValueError):
    """UAV directly overhead a ground node: depression angle undefined."""


class ChannelConfigError(ValueError):
    """Channel parameters invalid (D=0 divisor, non-positive shadowing std, ...)."""


@dataclass
class ChannelParams:
    alpha_pl: float = 3.04        # terrestrial path-loss exponent (unitless)
    c_scaler: float = -23.29      # excess path-loss scaler C (dB)
    d_scaler: float = 4.14        # angle scaler D (degrees)
    theta0: float = -3.61         # angle offset (degrees)
    eta0: float = 20.70           # excess path-loss offset (dB)
    a_shadow: float = -0.41       # shadowing slope (dB/degree)
    sigma0_shadow: float = 8.52   # shadowing offset at theta=0 (dB)

    def validate(self, theta_max_deg: float | None = None) -> None:
        """Sanity-check parameters; optionally check sigma(theta)>0 up to theta_max.

        The shadowing std goes negative for large angles under the suburban
        parameter set, so the positivity check covers only the angle range a
        scenario can actually reach (caller supplies theta_max_deg).
        """
        if self.d_scaler == 0:
            raise ChannelConfigError("angle scaler D must be nonzero")
        if self.shadow_std(0.0) <= 0:
            raise ChannelConfigError("sigma(0) must be positive")
        if theta_max_deg is not None and self.shadow_std(theta_max_deg) <= 0:
            raise ChannelConfigError(
                f"shadowing std non-positive at reachable depression angle "
                f"{theta_max_deg:.2f} deg"
            )

    def shadow_std(self, theta_deg: float) -> float:
        return self.a_shadow * theta_deg + self.sigma0_shadow


# Alternate reading of the suburban parameter table (second sigma0 value).
ALT_SIGMA0_SHADOW = 5.86


@dataclass
class Geometry:
    uav_pos: np.ndarray     # [x, y, z] m
    gbs_pos: np.ndarray     # [x, y, z] m, fixed
    jammer_pos: np.ndarray  # [x, y, z] m, fixed

    def __post_init__(self):
        self.uav_pos = np.asarray(self.uav_pos, dtype=float)
        self.gbs_pos = np.asarray(self.gbs_pos, dtype=float)
        self.jammer_pos = np.asarray(self.jammer_pos, dtype=float)
        for p in (self.uav_pos, self.gbs_pos, self.jammer_pos):
            if p.shape != (3,):
                raise ValueError("positions must be 3-vectors")
            if p[2] < 0:
                raise ValueError("z coordinates must be >= 0")
        if self.uav_pos[2] <= max(self.gbs_pos[2], self.jammer_pos[2]):
            raise ValueError("UAV altitude must exceed ground-equipment heights")

    def ground_node(self, which: str) -> np.ndarray:
        if which == "gbs":
            return self.gbs_pos
        if which == "jammer":
            return self.jammer_pos
        raise ValueError(f"unknown ground node {which!r}")


@dataclass
class LinkBudget:
    p_tx_uav: float        # desired-link transmit power (W)
    p_tx_jammer: float     # jammer transmit power (W)
    noise_power: float     # sigma^2 (W)
    jammer_present: int    # alpha indicator, 0 or 1

    def __post_init__(self):
        if self.p_tx_uav <= 0 or self.p_tx_jammer <= 0 or self.noise_power <= 0:
            raise ValueError("powers must be positive")
        if self.jammer_present not in (0, 1):
            raise ValueError("jammer_present indicator must be exactly 0 or 1")


def ground_distance_2d(geometry: Geometry, which: str) -> float:
    node = geometry.ground_node(which)
    return float(np.hypot(geometry.uav_pos[0] - node[0], geometry.uav_pos[1] - node[1]))


def depression_angle(geometry: Geometry, which: str) -> float:
    """Depression angle arctan((z_u - z_e)/d) in degrees; d is the 2-D distance."""
    d = ground_distance_2d(geometry, which)
    if d == 0.0:
        raise DegenerateGeometryError(f"UAV directly overhead {which}; angle undefined")
    node = geometry.ground_node(which)
    return math.degrees(math.atan((geometry.uav_pos[2] - node[2]) / d))


def terrestrial_pathloss(d: float, alpha_pl: float) -> float:
    """10*alpha*log10(d) dB; distances below 1 m clamp to 1 m."""
    return 10.0 * alpha_pl * math.log10(max(d, 1.0))


def excess_aerial_pathloss(theta_deg: float, params: ChannelParams) -> float:
    dth = theta_deg - params.theta0
    return params.c_scaler * dth * math.exp(-dth / params.d_scaler) + params.eta0


def shadowing_sample(theta_deg: float, params: ChannelParams, rng: np.random.Generator) -> float:
    """One draw of the angle-dependent lognormal shadowing term, in dB."""
    sigma = params.shadow_std(theta_deg)
    if sigma <= 0:
        raise ChannelConfigError(f"shadowing std {sigma:.3f} <= 0 at theta={theta_deg:.2f}")
    return float(rng.normal(0.0, sigma))


def total_pathloss(
    geometry: Geometry,
    which: str,
    params: ChannelParams,
    rng: np.random.Generator | None = None,
    shadowing: bool = True,
) -> float:
    """Total path loss in dB: terrestrial + excess aerial (+ shadowing draw)."""
    d = ground_distance_2d(geometry, which)
    theta = depression_angle(geometry, which)
    pl = terrestrial_pathloss(d, params.alpha_pl) + excess_aerial_pathloss(theta, params)
    if shadowing:
        if rng is None:
            raise ValueError("shadowing enabled but no rng supplied")
        pl += shadowing_sample(theta, params, rng)
    return pl


def gain_from_pathloss_db(pl_db: float) -> float:
    """Linear channel power gain h = 10^(-PL/10)."""
    return 10.0 ** (-pl_db / 10.0)


def sinr(budget: LinkBudget, h_gu: float, h_ju: float) -> float:
    """gamma = P_u*h_gu / (alpha*P_j*h_ju + sigma^2), all linear."""
    if h_gu <= 0 or h_ju <= 0:
        raise ValueError("channel gains must be positive")
    interference = budget.jammer_present * budget.p_tx_jammer * h_ju
    return budget.p_tx_uav * h_gu / (interference + budget.noise_power)
