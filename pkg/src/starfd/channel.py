"""Scenario geometry, path loss, Rician fading and the composite channels.

All five links are generated from a single master seed.  Per-channel
sub-streams are derived with fixed offsets (``_SUBSEED``), so changing the
element count or the SI attenuation never reshuffles unrelated channels --
the SI sweep of figure 5 relies on that.

Units: channel entries are linear amplitude gains, powers/variances linear
milliwatts, dB/dBm only at I/O boundaries.
"""

import math
from dataclasses import dataclass

import numpy as np

# sub-stream offsets from the master seed, one per random draw
_SUBSEED = {
    "h_ui": 11,
    "h_ib": 12,
    "h_bi": 13,
    "h_id": 14,
    "h_bb": 15,
    "oitm_x": 16,
    "oitm_qr_phase": 17,
}

COMPOSITE_TOL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """2-D node coordinates in meters."""

    bs: tuple[float, float] = (5.0, 45.0)
    ris: tuple[float, float] = (0.0, 50.0)
    ul_user: tuple[float, float] = (0.0, 35.0)
    dl_user: tuple[float, float] = (0.0, 100.0)

    def __post_init__(self):
        pts = [self.bs, self.ris, self.ul_user, self.dl_user]
        names = ["bs", "ris", "ul_user", "dl_user"]
        for i in range(4):
            for j in range(i + 1, 4):
                if _dist(pts[i], pts[j]) <= 0.0:
                    raise ValueError(f"{names[i]} and {names[j]} coincide")


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss and fading parameters; ``si_pathloss_db`` is the total
    residual SI attenuation after cancellation, not a geometric loss."""

    pl0_db: float = -30.0
    d0: float = 1.0
    exponent: float = 2.2
    rician_k_db: float = 3.0
    rician_k_si_db: float = 5.0
    si_pathloss_db: float = -100.0
    num_elements: int = 16

    def __post_init__(self):
        if self.d0 <= 0:
            raise ValueError("d0 must be positive")
        if self.exponent <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")
        if self.si_pathloss_db > 0:
            raise ValueError("si_pathloss_db must be <= 0")


def _dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


def path_loss_linear(d, params: ChannelParams) -> float:
    """Linear power gain ``10^(pl0_db/10) * (d/d0)^(-exponent)``."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return 10.0 ** (params.pl0_db / 10.0) * (d / params.d0) ** (-params.exponent)


def steering_vector(m: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response, entry k = exp(j*pi*k*sin(angle))."""
    k = np.arange(m)
    return np.exp(1j * np.pi * k * np.sin(angle))


def rician_vector(m: int, k_db: float, los: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rician fading draw around a unit-modulus LoS vector.

    Returns ``sqrt(K/(K+1))*los + sqrt(1/(K+1))*w`` with ``K = 10^(k_db/10)``
    and ``w`` i.i.d. circularly-symmetric complex Gaussian of unit variance.
    """
    los = np.asarray(los, dtype=np.complex128)
    if los.shape != (m,):
        raise ValueError(f"los must have shape ({m},), got {los.shape}")
    k = 10.0 ** (k_db / 10.0)
    w = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)
    return np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * w


@dataclass(frozen=True)
class ChannelSet:
    """The five links plus the precomputed composites.

    ``h1[m] = conj(h_ib[m]) * h_ui[m]``, likewise ``h2`` (BS->RIS->DL) and
    ``h3`` (UL->RIS->DL interference); ``big_hk = outer(hk, conj(hk))``.
    """

    h_ui: np.ndarray
    h_ib: np.ndarray
    h_bi: np.ndarray
    h_id: np.ndarray
    h_bb: complex
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    big_h1: np.ndarray
    big_h2: np.ndarray
    big_h3: np.ndarray

    @property
    def num_elements(self) -> int:
        return self.h_ui.shape[0]

    @classmethod
    def from_links(cls, h_ui, h_ib, h_bi, h_id, h_bb) -> "ChannelSet":
        h_ui, h_ib, h_bi, h_id = (
            np.asarray(v, dtype=np.complex128) for v in (h_ui, h_ib, h_bi, h_id)
        )
        h1 = h_ib.conj() * h_ui
        h2 = h_id.conj() * h_bi
        h3 = h_id.conj() * h_ui
        return cls(
            h_ui=h_ui,
            h_ib=h_ib,
            h_bi=h_bi,
            h_id=h_id,
            h_bb=complex(h_bb),
            h1=h1,
            h2=h2,
            h3=h3,
            big_h1=np.outer(h1, h1.conj()),
            big_h2=np.outer(h2, h2.conj()),
            big_h3=np.outer(h3, h3.conj()),
        )


def generate_channels(geom: Geometry, params: ChannelParams, seed: int) -> ChannelSet:
    """Draw all five channels for one scenario realization.

    RIS-side links combine the distance path loss with a Rician draw whose
    LoS component is the ULA steering vector toward the endpoint (elements
    along the y axis, broadside along x).  The SI link is a scalar Rician
    draw scaled by the residual attenuation.  Deterministic given ``seed``.
    """
    m = params.num_elements

    def rng(name):
        return np.random.default_rng([seed, _SUBSEED[name]])

    def angle_to(point):
        dx = point[0] - geom.ris[0]
        dy = point[1] - geom.ris[1]
        return math.asin(dy / math.hypot(dx, dy))

    def ris_link(name, point):
        d = _dist(geom.ris, point)
        los = steering_vector(m, angle_to(point))
        return math.sqrt(path_loss_linear(d, params)) * rician_vector(
            m, params.rician_k_db, los, rng(name)
        )

    h_ui = ris_link("h_ui", geom.ul_user)
    h_ib = ris_link("h_ib", geom.bs)
    h_bi = ris_link("h_bi", geom.bs)
    h_id = ris_link("h_id", geom.dl_user)

    k_si = 10.0 ** (params.rician_k_si_db / 10.0)
    g = rng("h_bb")
    w = (g.standard_normal() + 1j * g.standard_normal()) / math.sqrt(2.0)
    fading = math.sqrt(k_si / (k_si + 1.0)) + math.sqrt(1.0 / (k_si + 1.0)) * w
    h_bb = math.sqrt(10.0 ** (params.si_pathloss_db / 10.0)) * fading

    return ChannelSet.from_links(h_ui, h_ib, h_bi, h_id, h_bb)


def oitm_rng(seed: int, name: str, retry: int = 0) -> np.random.Generator:
    """Sub-stream for the beamforming initializer, kept here so all seed
    derivation constants live in one place."""
    return np.random.default_rng([seed, _SUBSEED[name], retry])
