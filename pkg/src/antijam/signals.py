"""Complex-baseband symbol streams and generalized feature vectors.

A generalized state stacks the I/Q features of a signal with their one-slot
first differences: [I, Q, dI, dQ] (d=2). Observations are a linear map of the
desired-signal state, plus the jammer state when it collides, plus Gaussian
measurement noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GEN_DIM = 4  # 2*d with d=2 (I/Q plus first derivatives)


def _default_a() -> np.ndarray:
    # Keep positions, zero the derivative slots; the control term re-injects
    # the regime's derivative (see default_b). pred = [pos + mu_dot, mu_dot].
    a = np.zeros((GEN_DIM, GEN_DIM))
    a[0, 0] = 1.0
    a[1, 1] = 1.0
    return a


def _default_b() -> np.ndarray:
    b = np.zeros((GEN_DIM, GEN_DIM))
    b[0, 2] = 1.0
    b[1, 3] = 1.0
    b[2, 2] = 1.0
    b[3, 3] = 1.0
    return b


def default_sigma_v(noise_power: float) -> np.ndarray:
    # Per-component complex-noise split; difference components carry twice the
    # variance of the position components.
    half = noise_power / 2.0
    return np.diag([half, half, 2.0 * half, 2.0 * half])


@dataclass
class GdbnMatrices:
    """State-space matrices of the generalized model (all 2d x 2d)."""

    a: np.ndarray = field(default_factory=_default_a)          # dynamic model
    b: np.ndarray = field(default_factory=_default_b)          # control model
    h: np.ndarray = field(default_factory=lambda: np.eye(GEN_DIM))  # observation map
    sigma_w: np.ndarray = field(default_factory=lambda: 1.0 * np.eye(GEN_DIM))
    sigma_v: np.ndarray = field(default_factory=lambda: default_sigma_v(1.0))

    def __post_init__(self):
        for name in ("a", "b", "h", "sigma_w", "sigma_v"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.a.shape[0]
        for name in ("a", "b", "h", "sigma_w", "sigma_v"):
            m = getattr(self, name)
            if m.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
        if abs(np.linalg.det(self.h)) < 1e-12:
            raise ValueError("observation map H must be invertible")
        for name in ("sigma_w", "sigma_v"):
            m = getattr(self, name)
            if not np.allclose(m, m.T):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(m).min() < -1e-12:
                raise ValueError(f"{name} must be positive semi-definite")


QPSK_POINTS = (np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0))


def qpsk_stream(n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-energy i.i.d. QPSK symbols, (+-1 +- 1j)/sqrt(2)."""
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    return QPSK_POINTS[rng.integers(0, 4, size=n_symbols)]


def markov_qpsk_stream(
    n_symbols: int, persistence: float, rng: np.random.Generator
) -> np.ndarray:
    """QPSK symbol chain that repeats the previous symbol with prob `persistence`.

    Models a slowly varying slot-level feature of the C2 payload; the chain is
    symmetric, so the marginal stays uniform over the constellation. With
    persistence 0 this is the i.i.d. stream.
    """
    if not 0.0 <= persistence < 1.0:
        raise ValueError("persistence must lie in [0, 1)")
    if persistence == 0.0:
        return qpsk_stream(n_symbols, rng)
    idx = np.empty(n_symbols, dtype=int)
    idx[0] = rng.integers(0, 4)
    stay = rng.random(n_symbols - 1) < persistence
    jumps = rng.integers(1, 4, size=n_symbols - 1)  # offset among the other 3
    for t in range(1, n_symbols):
        idx[t] = idx[t - 1] if stay[t - 1] else (idx[t - 1] + jumps[t - 1]) % 4
    return QPSK_POINTS[idx]


def to_generalized(symbols: np.ndarray, t: int) -> np.ndarray:
    """[Re s_t, Im s_t, Re s_t - Re s_{t-1}, Im s_t - Im s_{t-1}].

    At t=0 the derivative components are defined as 0.
    """
    s = symbols[t]
    if t == 0:
        return np.array([s.real, s.imag, 0.0, 0.0])
    p = symbols[t - 1]
    return np.array([s.real, s.imag, s.real - p.real, s.imag - p.imag])


def generalized_stream(symbols: np.ndarray) -> np.ndarray:
    """Vectorized to_generalized over a whole stream, shape (T, 4)."""
    out = np.zeros((len(symbols), GEN_DIM))
    out[:, 0] = symbols.real
    out[:, 1] = symbols.imag
    out[1:, 2] = np.diff(symbols.real)
    out[1:, 3] = np.diff(symbols.imag)
    return out


def observe(
    x_uav: np.ndarray,
    x_jam: np.ndarray | None,
    matrices: GdbnMatrices,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """Z = H x_u (+ H x_j if colliding) + v,  v ~ N(0, Sigma_v).

    Callers pass pre-scaled generalized states (amplitudes already set so the
    received JSR/SNR match the scenario config). `noise` overrides the rng
    draw when the caller manages its own noise stream.
    """
    z = matrices.h @ np.asarray(x_uav, dtype=float)
    if x_jam is not None:
        z = z + matrices.h @ np.asarray(x_jam, dtype=float)
    if noise is None:
        if rng is not None:
            std = np.sqrt(np.diag(matrices.sigma_v))
            noise = rng.normal(0.0, 1.0, size=z.shape) * std
        else:
            noise = 0.0
    return z + noise


def amplitude_from_snr(snr_db: float, noise_power: float) -> float:
    """Feature amplitude giving the target received SNR over unit-energy symbols."""
    return float(np.sqrt(10.0 ** (snr_db / 10.0) * noise_power))
