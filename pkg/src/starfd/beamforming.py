"""SCA loop for the passive-beamforming feasibility problem.

The nonconvex rank-one condition ``trace(Q) - lambda_max(Q) = 0`` is driven
to zero by repeatedly minimizing its convex surrogate: the concave part
``lambda_max + (rho/2)||.||^2`` is replaced by its supporting hyperplane at
the previous iterate (subgradient ``u u^H + rho Q_prev``), and the resulting
quadratic SDP is solved at fixed transmit powers.  Also provides the
orthogonal-interference initializer that makes the first power solve
feasible by nulling the UL-to-DL cross composite.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, oitm_rng
from .numerics import max_eigpair, rank_one_residual
from .power import InfeasibleError
from .qsdp import (
    R_ONLY,
    T_ONLY,
    QsdpOptions,
    QsdpProblem,
    QsdpState,
    solve_qsdp,
)
from .system import NoiseParams, PowerPair, RateRequirements, StarProfile, rate_threshold_linear


class ScaInfeasibleError(InfeasibleError):
    """A beamforming subproblem reported infeasible."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class OitmError(InfeasibleError):
    """The orthogonal initializer could not produce a usable profile."""


@dataclass(frozen=True)
class ScaOptions:
    eps1: float = 1e-6
    max_iterations: int = 50
    rho: float = 1e-3
    qsdp: QsdpOptions = QsdpOptions(tolerance=1e-7)


@dataclass
class ScaState:
    """Matrix iterates plus per-iteration rank-one residual sums.

    ``residual_history[0]`` is the residual at the expansion point before the
    first subproblem solve; entry ``k`` is the residual after solve ``k``.
    """

    q_t_mat: np.ndarray
    q_r_mat: np.ndarray
    residual_history: list = field(default_factory=list)
    k: int = 0
    converged: bool = False
    qsdp_iterations: int = 0
    qsdp_state: QsdpState | None = None


def sca_subgradient(q_prev: np.ndarray, rho: float) -> np.ndarray:
    """Supporting-hyperplane slope ``u u^H + rho * Q_prev`` at ``Q_prev``,
    with ``u`` a unit top eigenvector (any element of the subdifferential is
    valid; the eigensolver's choice is taken deterministically)."""
    _, u = max_eigpair(q_prev)
    return np.outer(u, u.conj()) + rho * np.asarray(q_prev, dtype=np.complex128)


def build_subproblem(
    p: PowerPair,
    ch: ChannelSet,
    req: RateRequirements,
    noise: NoiseParams,
    state: tuple[np.ndarray, np.ndarray],
    rho: float,
    element_modes: np.ndarray | None = None,
) -> QsdpProblem:
    """Assemble the convex subproblem at expansion point ``state``.

    Rate constraints are normalized by their power coefficient:

        Tr(Q_r H1) >= Ru (p_d |h_bb|^2 + s_u) / p_u
        Tr(Q_t (H2 - Rd (p_u/p_d) H3)) >= Rd s_d / p_d

    A constraint whose threshold is zero is trivially satisfied and omitted,
    which also covers the corresponding zero-power corner.
    """
    m = ch.num_elements
    q_t_prev, q_r_prev = state
    eye = np.eye(m, dtype=np.complex128)
    cost_t = eye - sca_subgradient(q_t_prev, rho)
    cost_r = eye - sca_subgradient(q_r_prev, rho)

    r_u = rate_threshold_linear(req.r_u_th)
    r_d = rate_threshold_linear(req.r_d_th)
    ineqs = []
    if r_u > 0.0:
        if p.p_u <= 0.0:
            raise ValueError("p_u must be positive when the UL threshold is nonzero")
        bound_u = r_u * (p.p_d * abs(ch.h_bb) ** 2 + noise.sigma_u_sq) / p.p_u
        ineqs.append(("r", ch.big_h1, bound_u))
    if r_d > 0.0:
        if p.p_d <= 0.0:
            raise ValueError("p_d must be positive when the DL threshold is nonzero")
        mat = ch.big_h2 - (r_d * p.p_u / p.p_d) * ch.big_h3
        ineqs.append(("t", mat, r_d * noise.sigma_d_sq / p.p_d))

    return QsdpProblem(
        dim=m,
        linear_cost_t=cost_t,
        linear_cost_r=cost_r,
        quad_weight=rho,
        ineq_constraints=tuple(ineqs),
        diag_coupling=True,
        element_modes=element_modes,
    )


def extract_rank_one(q_mat: np.ndarray) -> np.ndarray:
    """Dominant-eigenpair factor ``sqrt(lambda_max) * u`` of a near-rank-one
    PSD matrix, with the global phase canonicalized on the largest entry."""
    residual = rank_one_residual(q_mat)
    if residual >= 1.0:
        raise ValueError(
            f"matrix is not rank-one extractable: residual {residual:.3e} >= 1"
        )
    lam, u = max_eigpair(q_mat)
    vec = np.sqrt(max(lam, 0.0)) * u
    pivot = int(np.abs(vec).argmax())
    if np.abs(vec[pivot]) > 0:
        vec = vec * np.exp(-1j * np.angle(vec[pivot]))
    return vec


def _profile_from_mats(q_t_mat, q_r_mat, element_modes=None) -> StarProfile:
    # the extracted pair carries the subproblem's tolerance-level energy
    # drift; rescale per element so the profile invariant holds exactly, and
    # pin split-surface elements to their side (a pinned-to-zero diagonal
    # leaks sqrt(tolerance)-level amplitude into the top eigenvector)
    q_t = extract_rank_one(q_t_mat)
    q_r = extract_rank_one(q_r_mat)
    if element_modes is not None:
        t_only = element_modes == T_ONLY
        r_only = element_modes == R_ONLY
        q_r[t_only] = 0.0
        q_t[r_only] = 0.0
    scale = np.sqrt(np.abs(q_t) ** 2 + np.abs(q_r) ** 2)
    scale[scale == 0.0] = 1.0
    return StarProfile(q_t / scale, q_r / scale)


def sca_solve(
    p: PowerPair,
    ch: ChannelSet,
    req: RateRequirements,
    noise: NoiseParams,
    init: StarProfile,
    opts: ScaOptions = ScaOptions(),
    element_modes: np.ndarray | None = None,
    warm_state: QsdpState | None = None,
) -> tuple[StarProfile, ScaState]:
    """Drive the summed rank-one residual below ``eps1`` at fixed powers.

    At least one subproblem is solved even when the expansion point is
    already rank one: the surrogate minimizer generally moves to a better
    profile, which is what lets the outer power loop keep improving.
    Subproblem solutions warm-start the next solve.
    """
    q_t = np.outer(init.q_t, init.q_t.conj())
    q_r = np.outer(init.q_r, init.q_r.conj())
    state = ScaState(q_t_mat=q_t, q_r_mat=q_r)
    state.residual_history.append(
        rank_one_residual(q_t) + rank_one_residual(q_r)
    )

    if warm_state is None:
        # the expansion point is feasible or nearly so; starting the solver
        # there beats a cold start by a wide margin on thin constraint cones
        warm_state = QsdpState(
            z=np.stack([q_t, q_r]),
            zs=None,
            u=np.zeros((2, ch.num_elements, ch.num_elements), dtype=np.complex128),
            us=None,
            sigma=opts.qsdp.penalty,
        )
    warm: QsdpState | None = warm_state
    clean_exit = False
    while state.k < opts.max_iterations:
        prob = build_subproblem(p, ch, req, noise, (state.q_t_mat, state.q_r_mat), opts.rho, element_modes)
        sol = solve_qsdp(prob, opts.qsdp, warm=warm)
        if sol.status == "infeasible":
            raise ScaInfeasibleError(
                f"subproblem infeasible at SCA iteration {state.k + 1}", state.k + 1
            )
        warm = sol.state
        state.qsdp_state = sol.state
        state.q_t_mat = sol.q_t_mat
        state.q_r_mat = sol.q_r_mat
        state.k += 1
        state.qsdp_iterations += sol.iterations
        residual = rank_one_residual(sol.q_t_mat) + rank_one_residual(sol.q_r_mat)
        state.residual_history.append(residual)
        if sol.status != "optimal":
            # budget exhausted; re-solving the same stuck instance will not
            # certify either, so surface the best iterate as non-converged
            break
        if residual < opts.eps1:
            clean_exit = True
            break

    state.converged = clean_exit
    try:
        profile = _profile_from_mats(state.q_t_mat, state.q_r_mat, element_modes)
    except ValueError as exc:
        # a budget-exhausted solve can leave an iterate with no dominant
        # eigenpair; surface it like any other unusable subproblem outcome
        raise ScaInfeasibleError(
            f"no extractable iterate after {state.k} iterations: {exc}", state.k
        ) from exc
    return profile, state


def oitm_init(ch: ChannelSet, seed: int) -> StarProfile:
    """Orthogonal interference transmission initializer.

    Projects a seeded random unit-modulus vector onto the orthogonal
    complement of the UL-to-DL cross composite ``h3`` and normalizes by the
    largest entry magnitude, so the transmissive side starts with (numerically)
    zero cross-interference and the closed-form power solve cannot go
    negative.  Reflective amplitudes complete the per-element energy budget
    ``sqrt(1 - |q_t[m]|^2)`` with seeded random phases.
    """
    m = ch.num_elements
    h3 = ch.h3
    nrm2 = float(np.vdot(h3, h3).real)
    if nrm2 == 0.0:
        raise OitmError("cross composite h3 is zero; nothing to orthogonalize against")

    for retry in range(8):
        rng = oitm_rng(seed, "oitm_x", retry)
        x = np.exp(2j * np.pi * rng.random(m))
        y = x - h3 * (np.vdot(h3, x) / nrm2)
        peak = float(np.abs(y).max())
        # a vanishing projection would amplify roundoff past the
        # orthogonality budget; draw again
        if peak < 1e-3:
            continue
        q_t = y / peak
        # one refinement pass keeps |h3^H q_t| at roundoff level
        q_t = q_t - h3 * (np.vdot(h3, q_t) / nrm2)
        over = float(np.abs(q_t).max())
        if over > 1.0:
            q_t = q_t / over
        amp_r = np.sqrt(np.maximum(0.0, 1.0 - np.abs(q_t) ** 2))
        phase_rng = oitm_rng(seed, "oitm_qr_phase", retry)
        q_r = amp_r * np.exp(2j * np.pi * phase_rng.random(m))
        return StarProfile(q_t, q_r)
    raise OitmError("orthogonal projection degenerated for 8 consecutive sub-seeds")
