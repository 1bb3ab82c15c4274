"""STAR-RIS coefficient profiles and the achievable-rate formulas.

Gain convention: every gain is ``|h^H q|^2``, the form that matches the
trace expression ``q^H (h h^H) q`` used by the power solver and the SDP
subproblem, so all three agree exactly.  (The scalar and trace forms differ
only by conjugating ``q``; optimal values are identical under either.)
"""

from dataclasses import dataclass

import numpy as np

ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class StarProfile:
    """Per-element transmission/reflection coefficients ``q_t``, ``q_r``.

    Energy conservation binds the squared amplitudes:
    ``|q_t[m]|^2 + |q_r[m]|^2 = 1`` for every element.
    """

    q_t: np.ndarray
    q_r: np.ndarray

    def __post_init__(self):
        q_t = np.asarray(self.q_t, dtype=np.complex128)
        q_r = np.asarray(self.q_r, dtype=np.complex128)
        object.__setattr__(self, "q_t", q_t)
        object.__setattr__(self, "q_r", q_r)
        if q_t.shape != q_r.shape or q_t.ndim != 1:
            raise ValueError("q_t and q_r must be 1-D vectors of equal length")
        beta_sum = np.abs(q_t) ** 2 + np.abs(q_r) ** 2
        worst = float(np.abs(beta_sum - 1.0).max())
        if worst > ENERGY_TOL:
            m = int(np.abs(beta_sum - 1.0).argmax())
            raise ValueError(
                f"energy conservation violated at element {m}: "
                f"|q_t|^2 + |q_r|^2 = {beta_sum[m]:.8f} (deviation {worst:.2e})"
            )

    @property
    def num_elements(self) -> int:
        return self.q_t.shape[0]

    @property
    def beta_t(self) -> np.ndarray:
        return np.abs(self.q_t) ** 2

    @property
    def beta_r(self) -> np.ndarray:
        return np.abs(self.q_r) ** 2


@dataclass(frozen=True)
class RateRequirements:
    """Minimum UL/DL rates in bps/Hz."""

    r_u_th: float = 1.0
    r_d_th: float = 4.0

    def __post_init__(self):
        if self.r_u_th < 0 or self.r_d_th < 0:
            raise ValueError("rate requirements must be >= 0")


@dataclass(frozen=True)
class NoiseParams:
    """Receiver noise variances in linear milliwatts."""

    sigma_u_sq: float
    sigma_d_sq: float

    def __post_init__(self):
        if self.sigma_u_sq <= 0 or self.sigma_d_sq <= 0:
            raise ValueError("noise variances must be positive")

    @classmethod
    def from_dbm(cls, ul_dbm: float = -80.0, dl_dbm: float = -80.0) -> "NoiseParams":
        return cls(dbm_to_mw(ul_dbm), dbm_to_mw(dl_dbm))


@dataclass(frozen=True)
class PowerPair:
    """UL/DL transmit powers in linear milliwatts."""

    p_u: float
    p_d: float

    def __post_init__(self):
        if not (np.isfinite(self.p_u) and np.isfinite(self.p_d)):
            raise ValueError("powers must be finite")
        if self.p_u < 0 or self.p_d < 0:
            raise ValueError("powers must be >= 0")

    @property
    def total(self) -> float:
        return self.p_u + self.p_d


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw < 0:
        raise ValueError("power must be >= 0")
    if mw == 0.0:
        return float("-inf")
    return 10.0 * np.log10(mw)


def link_gain(h, q) -> float:
    """``|h^H q|^2``, equal to ``trace((q q^H)(h h^H))``."""
    h = np.asarray(h, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    if h.shape != q.shape:
        raise ValueError(f"length mismatch: {h.shape} vs {q.shape}")
    return float(np.abs(np.vdot(h, q)) ** 2)


def uplink_rate(p: PowerPair, prof: StarProfile, ch, noise: NoiseParams) -> float:
    """UL rate in bps/Hz; DL transmission leaks into the BS receiver through
    the residual SI channel."""
    sinr = p.p_u * link_gain(ch.h1, prof.q_r) / (
        p.p_d * abs(ch.h_bb) ** 2 + noise.sigma_u_sq
    )
    return float(np.log2(1.0 + sinr))


def downlink_rate(p: PowerPair, prof: StarProfile, ch, noise: NoiseParams) -> float:
    """DL rate in bps/Hz; the UL user interferes through the transmissive
    side of the surface."""
    sinr = p.p_d * link_gain(ch.h2, prof.q_t) / (
        p.p_u * link_gain(ch.h3, prof.q_t) + noise.sigma_d_sq
    )
    return float(np.log2(1.0 + sinr))


def rate_threshold_linear(r_th: float) -> float:
    """SINR target ``2^r - 1`` for a rate threshold ``r``."""
    if r_th < 0:
        raise ValueError("rate threshold must be >= 0")
    return 2.0 ** r_th - 1.0
