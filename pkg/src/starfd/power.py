"""Closed-form optimal power allocation at fixed STAR-RIS coefficients.

Both rate constraints are active at the optimum, which pins the powers:

    p_d = Rd * (Ru * s_u * G3 + G1 * s_d) / (G2 * G1 - Rd * Ru * |h_bb|^2 * G3)
    p_u = Ru * (p_d * |h_bb|^2 + s_u) / G1

with G1 = |h1^H q_r|^2, G2 = |h2^H q_t|^2, G3 = |h3^H q_t|^2 and
Rx = 2^r_th - 1.  A nonpositive denominator means the SI / cross-interference
loop is too strong for the demanded rates.
"""

from .system import (
    NoiseParams,
    PowerPair,
    RateRequirements,
    StarProfile,
    link_gain,
    rate_threshold_linear,
)


class InfeasibleError(RuntimeError):
    """Base class for infeasibility surfaced by the optimization stages."""


class InfeasibleLinkError(InfeasibleError):
    """A required channel gain is zero; no power can meet the rate demand."""


class InfeasibleInterferenceError(InfeasibleError):
    """The interference loop outweighs the useful links at these thresholds."""


def _gains(prof: StarProfile, ch):
    return (
        link_gain(ch.h1, prof.q_r),
        link_gain(ch.h2, prof.q_t),
        link_gain(ch.h3, prof.q_t),
    )


def solve_power(
    prof: StarProfile, ch, req: RateRequirements, noise: NoiseParams
) -> PowerPair:
    """Minimum-total-power pair meeting both rate thresholds with equality."""
    if req.r_u_th == 0.0 and req.r_d_th == 0.0:
        return PowerPair(0.0, 0.0)

    g1, g2, g3 = _gains(prof, ch)
    if g1 == 0.0 or g2 == 0.0:
        raise InfeasibleLinkError(
            f"nulled link: |h1^H q_r|^2 = {g1:.3e}, |h2^H q_t|^2 = {g2:.3e}"
        )
    r_u = rate_threshold_linear(req.r_u_th)
    r_d = rate_threshold_linear(req.r_d_th)
    si = abs(ch.h_bb) ** 2

    denom = g2 * g1 - r_d * r_u * si * g3
    if denom <= 0.0:
        raise InfeasibleInterferenceError(
            f"interference loop too strong: G2*G1 = {g2 * g1:.3e} <= "
            f"Rd*Ru*|h_bb|^2*G3 = {r_d * r_u * si * g3:.3e}"
        )
    p_d = r_d * (r_u * noise.sigma_u_sq * g3 + g1 * noise.sigma_d_sq) / denom
    p_u = r_u * (p_d * si + noise.sigma_u_sq) / g1
    return PowerPair(p_u, p_d)


def check_power_feasible(
    prof: StarProfile, ch, req: RateRequirements, noise: NoiseParams
) -> tuple[bool, str]:
    """Whether :func:`solve_power` would succeed with positive finite powers."""
    try:
        pair = solve_power(prof, ch, req, noise)
    except InfeasibleError as exc:
        return False, str(exc)
    return True, f"feasible: p_u = {pair.p_u:.6e} mW, p_d = {pair.p_d:.6e} mW"
