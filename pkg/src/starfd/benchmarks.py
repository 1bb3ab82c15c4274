"""Comparison schemes: half-duplex STAR surface and split conventional surfaces.

Half-duplex gives each direction half the airtime, so each slot must carry
twice the demanded rate; the slot powers are closed form because the whole
surface serves a single link with full amplitude and aligned phases.  The
split scheme keeps full duplex but pins each element to one side of the
surface, which the subproblem expresses through fixed diagonal entries.
"""

import numpy as np

from .ao import AoOptions, AoTrace, run_ao
from .beamforming import OitmError
from .channel import ChannelSet, oitm_rng
from .power import InfeasibleLinkError, check_power_feasible
from .qsdp import R_ONLY, T_ONLY
from .system import NoiseParams, PowerPair, RateRequirements, StarProfile


def run_star_hd(
    ch: ChannelSet, req: RateRequirements, noise: NoiseParams
) -> tuple[PowerPair, float]:
    """Closed-form half-duplex powers.

    Per slot the surface fully reflects (UL) or fully transmits (DL) with
    phases aligned to the active composite, reaching gain ``(sum_m |h_k[m]|)^2``;
    delivering an average rate ``r`` over half the time needs ``2r``
    instantaneously.  Returns the slot power pair and the time-averaged
    total ``(p_u + p_d) / 2``.  No iteration, no self-interference terms.
    """
    p = []
    for r_th, h, sig in (
        (req.r_u_th, ch.h1, noise.sigma_u_sq),
        (req.r_d_th, ch.h2, noise.sigma_d_sq),
    ):
        if r_th == 0.0:
            p.append(0.0)
            continue
        gain_root = float(np.abs(h).sum())
        if gain_root == 0.0:
            raise InfeasibleLinkError("composite channel is identically zero")
        p.append((2.0 ** (2.0 * r_th) - 1.0) * sig / gain_root**2)
    pair = PowerPair(*p)
    return pair, pair.total / 2.0


def con_fd_modes(m: int) -> np.ndarray:
    """Element modes for the split surface: first half transmit-only,
    second half reflect-only."""
    if m % 2 != 0:
        raise ValueError(f"the split surface needs an even element count, got {m}")
    modes = np.empty(m, dtype=np.int8)
    modes[: m // 2] = T_ONLY
    modes[m // 2 :] = R_ONLY
    return modes


def _null_phases(g: np.ndarray, x: np.ndarray, sweeps: int = 6) -> np.ndarray:
    """Unit-modulus phases minimizing ``|g^H q|`` by coordinate descent.

    Per element the optimal phase points ``conj(g_m) q_m`` opposite to the
    rest of the sum; whenever the largest |g| entry does not dominate the
    others the minimum is an exact null.
    """
    q = x / np.abs(x)
    s = complex(np.vdot(g, q))
    for _ in range(sweeps):
        for mm in range(g.shape[0]):
            if g[mm] == 0.0:
                continue
            rest = s - g[mm].conjugate() * q[mm]
            if abs(rest) < 1e-300:
                continue
            q_new = -rest / abs(rest) * abs(g[mm]) / g[mm].conjugate()
            s = rest + g[mm].conjugate() * q_new
            q[mm] = q_new
    return q


def con_fd_init(ch: ChannelSet, req: RateRequirements, noise: NoiseParams, seed: int) -> StarProfile:
    """Initial profile for the split surface.

    Transmit-block phases start from a random draw and descend toward a null
    of the cross composite restricted to the block (amplitudes are pinned to
    one, so a projection cannot be used directly); a draw that still lands
    infeasible is retried on the next sub-seed, 8 in total.
    """
    m = ch.num_elements
    half = m // 2
    g = ch.h3[:half]

    last_reason = "no draws attempted"
    for retry in range(8):
        rng = oitm_rng(seed, "oitm_x", retry)
        x = np.exp(2j * np.pi * rng.random(half))
        q_t = np.zeros(m, dtype=np.complex128)
        q_t[:half] = _null_phases(g, x)
        q_r = np.zeros(m, dtype=np.complex128)
        phase_rng = oitm_rng(seed, "oitm_qr_phase", retry)
        q_r[half:] = np.exp(2j * np.pi * phase_rng.random(m - half))
        profile = StarProfile(q_t, q_r)
        ok, reason = check_power_feasible(profile, ch, req, noise)
        if ok:
            return profile
        last_reason = reason
    raise OitmError(
        f"no feasible split-surface initialization in 8 draws: {last_reason}"
    )


def run_con_fd(
    ch: ChannelSet,
    req: RateRequirements,
    noise: NoiseParams,
    opts: AoOptions = AoOptions(),
    seed: int = 0,
) -> tuple[PowerPair, StarProfile, AoTrace]:
    """Full AO pipeline restricted to the split surface."""
    modes = con_fd_modes(ch.num_elements)
    init = con_fd_init(ch, req, noise, seed)
    return run_ao(ch, req, noise, opts, seed, init=init, element_modes=modes)
