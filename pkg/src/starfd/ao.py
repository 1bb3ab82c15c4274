"""Outer alternating-optimization loop.

Each outer iteration solves the closed-form power allocation at the current
surface profile and records it, then re-optimizes the profile through the
SCA loop.  Because the power step leaves both rate constraints active and a
rank-one expansion point already minimizes the convex surrogate, the plain
alternation is a fixed point; the loop therefore asks the beamformer to
support a backtracked power cut each round (uniform over both links, or
one-sided when the allocation is lopsided).  Any accepted profile supports a
strictly cheaper power pair, so the recorded total-power sequence is
non-increasing, and the loop stops once no cut above the floor (tied to
``eps2``) is supportable.  Per-iteration cost is dominated by the subproblem
solver and grows roughly quartically in the element count.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .beamforming import ScaInfeasibleError, ScaOptions, oitm_init, sca_solve
from .channel import ChannelSet
from .power import InfeasibleError, solve_power
from .system import (
    NoiseParams,
    PowerPair,
    RateRequirements,
    StarProfile,
    downlink_rate,
    uplink_rate,
)

RATE_SLACK = 3e-7  # tolerated solver slop when accepting a cut profile; the
# recorded iterates sit exactly on the thresholds (fresh power solve), so
# the 1e-6 rate contract is untouched


@dataclass(frozen=True)
class AoOptions:
    eps2: float = 1e-4
    max_iterations: int = 30
    sca: ScaOptions = ScaOptions()
    first_shrink: float = 0.5  # initial power-cut fraction attempted per round

    def __post_init__(self):
        if self.eps2 <= 0:
            raise ValueError("eps2 must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.first_shrink < 1.0:
            raise ValueError("first_shrink must lie in (0, 1)")


@dataclass(frozen=True)
class AoIterationRecord:
    n: int
    p_u: float
    p_d: float
    total_power: float
    sca_residual: float
    sca_iterations: int
    r_u_achieved: float
    r_d_achieved: float


@dataclass
class AoTrace:
    records: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    boundary_exit: bool = False  # converged at the initializer itself: no
    # power cut was supportable in the very first iteration


def _rates_ok(pair, profile, ch, req, noise) -> bool:
    return (
        uplink_rate(pair, profile, ch, noise) >= req.r_u_th - RATE_SLACK
        and downlink_rate(pair, profile, ch, noise) >= req.r_d_th - RATE_SLACK
    )


def _cut_candidates(pair: PowerPair, delta: float) -> list[PowerPair]:
    """Power pairs to attempt at this cut level: the uniform cut first, then
    one-sided cuts, then rebalancing cuts.

    The interference balance is invariant under uniform scaling, so when the
    binding constraint is the cross-interference tradeoff a uniform cut
    rebinds immediately and only the noise share shrinks; cutting one side
    rotates the balance.  The rebalancing candidates keep the total cut at
    ``delta`` while letting the other side grow, reaching optima where one
    coordinate must increase.
    """
    target = pair.total * (1.0 - delta)
    cands = [
        PowerPair(pair.p_u * (1.0 - delta), pair.p_d * (1.0 - delta)),
        PowerPair(pair.p_u * (1.0 - delta), pair.p_d),
        PowerPair(pair.p_u, pair.p_d * (1.0 - delta)),
    ]
    shift_u = pair.p_u * (1.0 - 2.0 * delta)
    if 0.0 < shift_u < target:
        cands.append(PowerPair(shift_u, target - shift_u))
    shift_d = pair.p_d * (1.0 - 2.0 * delta)
    if 0.0 < shift_d < target:
        cands.append(PowerPair(target - shift_d, shift_d))
    return cands


def run_ao(
    ch: ChannelSet,
    req: RateRequirements,
    noise: NoiseParams,
    opts: AoOptions = AoOptions(),
    seed: int = 0,
    init: StarProfile | None = None,
    element_modes: np.ndarray | None = None,
) -> tuple[PowerPair, StarProfile, AoTrace]:
    """Alternate power allocation and passive beamforming until the relative
    total-power decrease falls below ``eps2`` or the iteration cap is hit.

    Deterministic given (inputs, seed).  An infeasible power solve at the
    initial profile aborts with a stage-tagged error.  When no power cut is
    supportable the current iterate is already a fixed point of the uncut
    subproblem, so the loop converges on it directly; rejected cut attempts
    never touch the recorded trace, which keeps it monotone.  A cap exit
    with ``converged=False`` is a valid result, not an error.
    """
    profile = oitm_init(ch, seed) if init is None else init
    trace = AoTrace()
    pair: PowerPair | None = None
    prev_total: float | None = None
    shrink_floor = max(opts.eps2, 1e-6)
    next_shrink = opts.first_shrink
    last_residual = 0.0
    last_sca_iters = 0
    chained_state = None  # accepted solver state, reused as warm start
    # cut attempts may land on (near-)infeasible instances; keep them on a
    # short leash, failures only make the schedule more conservative
    attempt_opts = replace(
        opts.sca,
        qsdp=replace(
            opts.sca.qsdp,
            max_iterations=min(1500, opts.sca.qsdp.max_iterations),
            stall_window=6,
        ),
    )
    # shape probes only pay off where solves are cheap; budget by size
    probe_budget = min(
        attempt_opts.qsdp.max_iterations, max(500, 48000 // (ch.num_elements**2))
    )
    probe_opts = replace(
        attempt_opts,
        qsdp=replace(attempt_opts.qsdp, max_iterations=probe_budget, stall_window=3),
    )

    for n in range(1, opts.max_iterations + 1):
        pair = solve_power(profile, ch, req, noise)
        trace.records.append(
            AoIterationRecord(
                n=n,
                p_u=pair.p_u,
                p_d=pair.p_d,
                total_power=pair.total,
                sca_residual=last_residual,
                sca_iterations=last_sca_iters,
                r_u_achieved=uplink_rate(pair, profile, ch, noise),
                r_d_achieved=downlink_rate(pair, profile, ch, noise),
            )
        )

        if pair.total == 0.0:
            trace.converged = True
            break
        if prev_total is not None:
            rel = (prev_total - pair.total) / prev_total
            if rel <= opts.eps2:
                trace.converged = True
                break
        prev_total = pair.total
        if n == opts.max_iterations:
            break  # a profile update without a following power solve would
            # not be observable in the trace

        def attempt(scaled, opts_used=attempt_opts):
            """One cut attempt; returns (next total, profile, state) or None."""
            try:
                cand, cand_state = sca_solve(
                    scaled,
                    ch,
                    req,
                    noise,
                    profile,
                    opts_used,
                    element_modes,
                    warm_state=chained_state,
                )
            except ScaInfeasibleError:
                return None
            # a cut is accepted on what the outer loop needs -- a
            # near-rank-one profile whose rates support the cut powers -- not
            # on the subproblem's own optimality certificate, which can stay
            # out of reach within the attempt budget on thin constraint cones
            if cand_state.residual_history[-1] >= attempt_opts.eps1 or not _rates_ok(
                scaled, cand, ch, req, noise
            ):
                return None
            try:
                nxt = solve_power(cand, ch, req, noise).total
            except InfeasibleError:
                return None
            return nxt, cand, cand_state

        # progress below this would trip the stop rule next round; such a cut
        # is a stall, and stalls are when the alternative cut shapes matter
        stall_total = pair.total * (1.0 - 4.0 * opts.eps2)
        best = None
        delta = next_shrink
        # shape probes are for rebinding stalls; keep the deeper cascade
        # levels on the cheap uniform-only path -- except in the very first
        # iteration, where escaping a bad initializer is worth any price
        fanout_left = 1_000_000 if n == 1 else 2
        probing = probe_opts if n > 1 else attempt_opts
        while True:
            candidates = _cut_candidates(pair, delta)
            level_best = attempt(candidates[0])
            if (level_best is None or level_best[0] > stall_total) and fanout_left > 0:
                # uniform cut infeasible or rebinding; probe the other shapes
                # on a short budget (they only win where the cone is wide and
                # the solve is quick)
                fanout_left -= 1
                for scaled in candidates[1:]:
                    got = attempt(scaled, probing)
                    if got is not None and (level_best is None or got[0] < level_best[0]):
                        level_best = got
                    if level_best is not None and level_best[0] <= stall_total:
                        break
            if level_best is not None:
                # an accepted cut at a smaller level can only be weaker; stop
                # the cascade at the first level that accepts anything
                best = level_best
                break
            delta = delta / 4.0
            if delta < shrink_floor:
                break

        profile_new = None
        if best is not None:
            _, profile_new, cand_state = best
            chained_state = cand_state.qsdp_state
            last_residual = cand_state.residual_history[-1]
            last_sca_iters = cand_state.k
            # trust-region style: probe a larger cut next round
            next_shrink = min(0.75, max(delta * 1.6, shrink_floor))

        if profile_new is None:
            # no supportable cut: the current iterate is a fixed point of the
            # uncut subproblem, so this is convergence, not failure
            trace.boundary_exit = n == 1
            trace.converged = True
            break
        profile = profile_new

    trace.iterations = len(trace.records)
    assert pair is not None
    return pair, profile, trace
