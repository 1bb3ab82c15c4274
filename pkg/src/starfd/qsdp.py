"""Solver for the convex quadratic SDP subproblem of the SCA loop.

Problem family: two coupled Hermitian PSD variables ``Q_t``, ``Q_r`` with

    minimize    sum_l  Re<C_l, Q_l> + (rho/2) ||Q_l||_F^2
    subject to  Tr(A_i Q_{l_i}) >= b_i              (trace inequalities)
                [Q_t]_mm + [Q_r]_mm = 1   per element (or per-element fixed
                                           diagonals for split surfaces)
                Q_t, Q_r  PSD

Method: consensus ADMM.  One block solves the equality-constrained quadratic
(inequalities carry nonnegative slack variables; the KKT system is solved
through a cached Cholesky factor of a small Gram matrix), the other block is
the PSD projection, with dual ascent on the consensus gap.  Inequalities are
rescaled internally to unit Frobenius norm; the feasibility and KKT
tolerances apply to that scaled system (relative tolerances, in effect,
since the raw channel constraints live around 1e-9).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .numerics import _check_hermitian

# per-element diagonal modes
COUPLED = 0  # [Q_t]_mm + [Q_r]_mm = 1
T_ONLY = 1  # [Q_t]_mm = 1, [Q_r]_mm = 0
R_ONLY = 2  # [Q_t]_mm = 0, [Q_r]_mm = 1

_TARGETS = {"t": 0, "r": 1}


class QsdpShapeError(ValueError):
    """Problem data dimensions or labels are inconsistent."""


@dataclass(frozen=True)
class QsdpProblem:
    """Solver-ready subproblem data.

    ``ineq_constraints`` entries are ``(target, matrix, bound)`` with target
    ``"t"`` or ``"r"``, meaning ``Tr(matrix @ Q_target) >= bound``.
    ``element_modes`` specializes the diagonal equalities per element for
    split (transmit-only / reflect-only) surfaces; ``None`` couples all
    elements when ``diag_coupling`` is set.
    """

    dim: int
    linear_cost_t: np.ndarray
    linear_cost_r: np.ndarray
    quad_weight: float
    ineq_constraints: tuple = ()
    diag_coupling: bool = True
    element_modes: np.ndarray | None = None

    def __post_init__(self):
        m = self.dim
        if m < 1:
            raise QsdpShapeError("dim must be >= 1")
        if self.quad_weight < 0:
            raise QsdpShapeError("quad_weight must be >= 0")
        for name in ("linear_cost_t", "linear_cost_r"):
            mat = _check_hermitian(getattr(self, name))
            if mat.shape != (m, m):
                raise QsdpShapeError(f"{name} must be {m}x{m}")
            object.__setattr__(self, name, mat)
        ineqs = []
        for target, mat, bound in self.ineq_constraints:
            if target not in _TARGETS:
                raise QsdpShapeError(f"constraint target must be 't' or 'r', got {target!r}")
            mat = _check_hermitian(mat)
            if mat.shape != (m, m):
                raise QsdpShapeError(f"constraint matrix must be {m}x{m}")
            ineqs.append((target, mat, float(bound)))
        object.__setattr__(self, "ineq_constraints", tuple(ineqs))
        if self.element_modes is not None:
            modes = np.asarray(self.element_modes, dtype=np.int8)
            if modes.shape != (m,) or not np.isin(modes, (COUPLED, T_ONLY, R_ONLY)).all():
                raise QsdpShapeError("element_modes must be per-element COUPLED/T_ONLY/R_ONLY")
            object.__setattr__(self, "element_modes", modes)

    def modes(self) -> np.ndarray:
        if self.element_modes is not None:
            return self.element_modes
        return np.full(self.dim, COUPLED, dtype=np.int8)


@dataclass(frozen=True)
class QsdpOptions:
    tolerance: float = 1e-6
    max_iterations: int = 20000
    penalty: float = 3.0
    adapt_penalty: bool = True
    relaxation: float = 1.8  # over-relaxation factor, 1.0 disables
    anderson_memory: int = 10  # fixed-point acceleration depth, 0 disables;
    # rescues the slow tail on thin constraint cones
    stall_window: int = 25  # constraint-violation plateau length (x100 iters)
    # before declaring infeasibility; short windows fail fast on throwaway
    # probes at the cost of conservatively misreading very slow instances
    record_history: bool = False


@dataclass
class QsdpState:
    """Internal iterate snapshot, reusable as a warm start.

    ``zs``/``us`` may be ``None`` (slacks derived from ``z``, duals zeroed),
    which lets callers seed the solver from a known near-feasible point."""

    z: np.ndarray
    zs: np.ndarray | None
    u: np.ndarray
    us: np.ndarray | None
    sigma: float


@dataclass
class QsdpSolution:
    q_t_mat: np.ndarray
    q_r_mat: np.ndarray
    status: str  # "optimal" | "max-iterations" | "infeasible"
    kkt_residual: float
    objective: float
    iterations: int
    state: QsdpState | None = None
    merit_history: list = field(default_factory=list)


def _objective(prob: QsdpProblem, q_t, q_r) -> float:
    rho = prob.quad_weight
    val = np.vdot(prob.linear_cost_t, q_t).real + np.vdot(prob.linear_cost_r, q_r).real
    val += 0.5 * rho * (np.vdot(q_t, q_t).real + np.vdot(q_r, q_r).real)
    return float(val)


class _Anderson:
    """Safeguarded type-II Anderson acceleration of a fixed-point iteration.

    Keeps difference histories of iterates and residuals in preallocated
    circular buffers (column order is irrelevant to the least-squares fit);
    an extrapolated point is used only when the predicted residual drops,
    and the memory is flushed whenever the map changes (penalty re-scaling).
    """

    def __init__(self, memory: int, dim: int):
        self.memory = memory
        self.ds = np.empty((dim, memory))
        self.dr = np.empty((dim, memory))
        self.gram = np.zeros((memory, memory))  # dr^T dr, kept incrementally
        self.count = 0
        self.head = 0
        self.prev_s = None
        self.prev_r = None

    def reset(self):
        self.count = 0
        self.head = 0
        self.prev_s = None
        self.prev_r = None

    def push(self, s, r):
        """Record iterate ``s`` with residual ``r = T(s) - s``; return the
        accelerated next iterate or ``None`` to take the plain step."""
        if self.prev_s is not None:
            j = self.head
            np.subtract(s, self.prev_s, out=self.ds[:, j])
            np.subtract(r, self.prev_r, out=self.dr[:, j])
            self.head = (j + 1) % self.memory
            self.count = min(self.count + 1, self.memory)
            col = self.dr[:, : self.count].T @ self.dr[:, j]
            self.gram[j, : self.count] = col
            self.gram[: self.count, j] = col
        self.prev_s = s
        self.prev_r = r
        if self.count == 0:
            return None
        k = self.count
        dr = self.dr[:, :k]
        ds = self.ds[:, :k]
        gram = self.gram[:k, :k].copy()
        gram[np.diag_indices_from(gram)] += 1e-12 * max(gram.max(), 1e-30)
        drt_r = dr.T @ r
        try:
            gamma = np.linalg.solve(gram, drt_r)
        except np.linalg.LinAlgError:
            self.reset()
            return None
        r2 = float(r @ r)
        pred2 = r2 - 2.0 * float(drt_r @ gamma) + float(gamma @ (gram @ gamma))
        if pred2 > 0.81 * r2:
            return None  # no predicted progress; plain step
        out = s + r
        out -= ds @ gamma
        out -= dr @ gamma
        return out


class _Scaled:
    """Inequalities rescaled to unit Frobenius norm plus row bookkeeping."""

    def __init__(self, prob: QsdpProblem):
        self.prob = prob
        m = prob.dim
        self.modes = prob.modes() if prob.diag_coupling else None
        self.ineq_target = []
        self.ineq_mat = []
        self.ineq_bound = []
        self.trivially_infeasible = None
        diag_cap = np.ones(m)
        for target, mat, bound in prob.ineq_constraints:
            norm = float(np.linalg.norm(mat))
            if norm == 0.0:
                if bound > 0.0:
                    self.trivially_infeasible = (
                        f"constraint Tr(0 * Q_{target}) >= {bound} cannot hold"
                    )
                continue
            # scale by the bound when positive, so solver tolerances read as
            # relative accuracy on the demand (raw channel bounds sit around
            # 1e-9 and would make absolute tolerances vacuous); matrix-norm
            # scaling covers nonpositive bounds
            scale = bound if bound > 0.0 else norm
            li = _TARGETS[target]
            mat_s = mat / scale
            bound_s = bound / scale
            # upper bound of Tr(A Q) over PSD Q with unit-capped diagonal;
            # catches absurd demands before iterating (only meaningful when
            # the coupling actually caps the diagonals)
            if self.modes is not None:
                cap_m = diag_cap.copy()
                cap_m[self.modes == (R_ONLY if li == 0 else T_ONLY)] = 0.0
                root = np.sqrt(cap_m)
                cap = float((root[:, None] * np.abs(mat_s) * root[None, :]).sum())
                if bound_s > cap + 1e-9:
                    self.trivially_infeasible = (
                        f"constraint on Q_{target} demands {bound_s:.6e} but the "
                        f"feasible set caps it at {cap:.6e}"
                    )
            self.ineq_target.append(li)
            self.ineq_mat.append(mat_s)
            self.ineq_bound.append(bound_s)
        self.n_ineq = len(self.ineq_mat)

        # equality rows: coupled diagonals, fixed diagonals, inequalities
        self.coupled_idx = np.array([], dtype=np.int64)
        self.fixed_rows = []  # (target, element, value)
        if self.modes is not None:
            self.coupled_idx = np.nonzero(self.modes == COUPLED)[0]
            for mm in np.nonzero(self.modes == T_ONLY)[0]:
                self.fixed_rows.append((0, int(mm), 1.0))
                self.fixed_rows.append((1, int(mm), 0.0))
            for mm in np.nonzero(self.modes == R_ONLY)[0]:
                self.fixed_rows.append((0, int(mm), 0.0))
                self.fixed_rows.append((1, int(mm), 1.0))
        self.n_coupled = len(self.coupled_idx)
        self.n_fixed = len(self.fixed_rows)
        self.n_rows = self.n_coupled + self.n_fixed + self.n_ineq
        self.targets = np.zeros(self.n_rows, dtype=np.int64)
        self.rhs = np.zeros(self.n_rows)
        self.rhs[: self.n_coupled] = 1.0
        for k, (li, mm, val) in enumerate(self.fixed_rows):
            self.targets[self.n_coupled + k] = li
            self.rhs[self.n_coupled + k] = val
        for k in range(self.n_ineq):
            self.targets[self.n_coupled + self.n_fixed + k] = self.ineq_target[k]
            self.rhs[self.n_coupled + self.n_fixed + k] = self.ineq_bound[k]
        # flat-index bookkeeping for the hot loop
        self.coupled_flat = (self.coupled_idx * (m + 1)).astype(np.int64)
        self.fixed_target = np.array([li for li, _, _ in self.fixed_rows], dtype=np.int64)
        self.fixed_flat = np.array(
            [mm * (m + 1) for _, mm, _ in self.fixed_rows], dtype=np.int64
        )
        self.ineq_flat = [mat.ravel() for mat in self.ineq_mat]
        self.ineq_target_arr = np.array(self.ineq_target, dtype=np.int64)
        self.ineq_mats_arr = (
            np.stack(self.ineq_flat) if self.ineq_flat else np.empty((0, m * m), complex)
        )

    def eval_rows(self, x, s):
        """E(x, s): row values of the equality system."""
        xf = x.reshape(2, -1)
        vals = np.empty(self.n_rows)
        nc, nf = self.n_coupled, self.n_fixed
        if nc:
            vals[:nc] = xf[0, self.coupled_flat].real + xf[1, self.coupled_flat].real
        if nf:
            vals[nc : nc + nf] = xf[self.fixed_target, self.fixed_flat].real
        base = nc + nf
        for k in range(self.n_ineq):
            vals[base + k] = np.vdot(self.ineq_flat[k], xf[self.ineq_target[k]]).real - s[k]
        return vals

    def gram(self, alpha, beta):
        """Gram matrix of constraint-row gradients under the H^-1 metric
        (``alpha`` on matrix coordinates, ``beta`` on slack coordinates)."""
        n = self.n_rows
        g = np.zeros((n, n))
        nc, nf = self.n_coupled, self.n_fixed
        base = nc + nf
        if nc:
            g[:nc, :nc] = 2.0 * alpha * np.eye(nc)
        for k, (li, mm, _) in enumerate(self.fixed_rows):
            r = nc + k
            g[r, r] = alpha
            pos = np.nonzero(self.coupled_idx == mm)[0]
            if pos.size:  # cannot happen (modes partition), kept for safety
                g[r, pos[0]] = g[pos[0], r] = alpha
        for i in range(self.n_ineq):
            ri = base + i
            ai = self.ineq_mat[i]
            li = self.ineq_target[i]
            diag_ai = np.diagonal(ai).real
            if nc:
                g[:nc, ri] = alpha * diag_ai[self.coupled_idx]
                g[ri, :nc] = g[:nc, ri]
            for k, (lf, mm, _) in enumerate(self.fixed_rows):
                if lf == li:
                    g[nc + k, ri] = g[ri, nc + k] = alpha * diag_ai[mm]
            for j in range(i, self.n_ineq):
                val = 0.0
                if self.ineq_target[j] == li:
                    val = alpha * np.vdot(ai, self.ineq_mat[j]).real
                if i == j:
                    val += beta
                g[ri, base + j] = g[base + j, ri] = val
        return g

    def apply_correction(self, x, s, nu, alpha, beta):
        """In-place ``(x, s) -= H^-1 E^T nu``."""
        xf = x.reshape(2, -1)
        nc, nf = self.n_coupled, self.n_fixed
        base = nc + nf
        if nc:
            corr = alpha * nu[:nc]
            xf[0, self.coupled_flat] -= corr
            xf[1, self.coupled_flat] -= corr
        if nf:
            xf[self.fixed_target, self.fixed_flat] -= alpha * nu[nc : nc + nf]
        for i in range(self.n_ineq):
            xf[self.ineq_target[i]] -= (alpha * nu[base + i]) * self.ineq_flat[i]
        s += beta * nu[base:]


def solve_qsdp(
    prob: QsdpProblem, opts: QsdpOptions = QsdpOptions(), warm: QsdpState | None = None
) -> QsdpSolution:
    """Run the ADMM solver on one subproblem instance.

    ``status`` is ``optimal`` when the KKT residual certified by
    :func:`check_kkt` reaches ``opts.tolerance``; ``max-iterations`` returns
    the best iterate with its honest residual; ``infeasible`` is raised from
    a violated feasibility cap or from diverging multipliers with a
    non-vanishing constraint violation.
    """
    m = prob.dim
    rho = prob.quad_weight
    sc = _Scaled(prob)
    if sc.trivially_infeasible is not None:
        zero = np.zeros((m, m), dtype=np.complex128)
        return QsdpSolution(zero, zero.copy(), "infeasible", np.inf, 0.0, 0)

    c_stack = np.stack([prob.linear_cost_t, prob.linear_cost_r])
    sigma = float(opts.penalty)
    if warm is not None:
        z = warm.z.copy()
        u = warm.u.copy()
        sigma = warm.sigma
        if warm.zs is not None and warm.zs.size == sc.n_ineq:
            zs = warm.zs.copy()
        else:
            base = sc.n_coupled + sc.n_fixed
            zs = np.maximum(sc.eval_rows(z, np.zeros(sc.n_ineq))[base:] - sc.rhs[base:], 0.0)
        if warm.us is not None and warm.us.size == sc.n_ineq:
            us = warm.us.copy()
        else:
            us = np.zeros(sc.n_ineq)
    else:
        z = np.zeros((2, m, m), dtype=np.complex128)
        zs = np.zeros(sc.n_ineq)
        u = np.zeros((2, m, m), dtype=np.complex128)
        us = np.zeros(sc.n_ineq)

    def factor(sig):
        alpha = 1.0 / (rho + sig)
        beta = 1.0 / sig
        return alpha, beta, np.linalg.inv(sc.gram(alpha, beta))

    alpha, beta, g_inv = factor(sigma)
    merit_history = []
    scale_dim = np.sqrt(2.0 * m * m + sc.n_ineq)
    eps_factor = 0.2
    viol_hist = []
    status = "max-iterations"
    it = 0

    relax = float(opts.relaxation)
    x = np.empty_like(z)
    xh = np.empty_like(z)
    scratch = np.empty_like(z)
    xr, gr = x.reshape(-1), scratch.reshape(-1)
    u = u.copy()  # owned buffer, updated in place
    aa = (
        _Anderson(opts.anderson_memory, 8 * m * m + 2 * sc.n_ineq)
        if opts.anderson_memory > 0
        else None
    )
    # the fused compiled step neither records merits nor exposes the
    # intermediate blocks; the plain path stays authoritative for diagnostics
    fused = None if opts.record_history else getattr(_kernels, "admm_step", None)

    def nrm2(flat):
        return np.vdot(flat, flat).real

    zlen = 4 * m * m  # float view length of one complex (2, m, m) stack
    aa_dim = 2 * zlen + 2 * sc.n_ineq

    def flatten_into(out):
        out[:zlen] = z.view(np.float64).ravel()
        out[zlen : zlen + sc.n_ineq] = zs
        out[zlen + sc.n_ineq : 2 * zlen + sc.n_ineq] = u.view(np.float64).ravel()
        out[2 * zlen + sc.n_ineq :] = us

    if aa is not None:
        # ping-pong buffers: the acceleration keeps references to the last
        # pushed iterate and residual for one more round
        s_bufs = (np.empty(aa_dim), np.empty(aa_dim))
        r_bufs = (np.empty(aa_dim), np.empty(aa_dim))
        s_new_buf = np.empty(aa_dim)
        flip = 0

    for it in range(1, opts.max_iterations + 1):
        if aa is not None:
            s_old = s_bufs[flip]
            flatten_into(s_old)
        if fused is not None:
            r_prim, r_dual = fused(
                z, zs, u, us, c_stack, g_inv, sc.rhs,
                sc.coupled_flat, sc.fixed_target, sc.fixed_flat,
                sc.ineq_target_arr, sc.ineq_mats_arr,
                sigma, rho, relax,
            )
        else:
            # affine block: x = alpha * (sigma*(z - u) - c)
            np.subtract(z, u, out=x)
            x *= sigma
            x -= c_stack
            x *= alpha
            s = zs - us
            r = sc.eval_rows(x, s) - sc.rhs
            nu = g_inv @ r
            sc.apply_correction(x, s, nu, alpha, beta)
            # cone block (with over-relaxation)
            if relax == 1.0:
                np.add(x, u, out=xh)
                sh = s
            else:
                np.multiply(x, relax, out=xh)
                np.multiply(z, 1.0 - relax, out=scratch)
                xh += scratch
                sh = relax * s + (1.0 - relax) * zs
                xh += u
            z_new, _ = _kernels.psd_project_stack(xh)
            zs_new = np.maximum(sh + us, 0.0)
            # dual ascent: u = xh_relaxed + u - z_new (xh holds xh + u)
            xh -= z_new
            step_nrm2 = None
            if opts.record_history:
                # iterate-movement merit sigma*||w_k+1 - w_k||^2 over (z, u):
                # provably non-increasing for the plain (unrelaxed,
                # fixed-penalty) splitting
                step_nrm2 = sigma * (
                    nrm2((xh - u).reshape(-1))
                    + np.linalg.norm(z_new - z) ** 2
                    + np.linalg.norm(zs_new - zs) ** 2
                )
            np.copyto(u, xh)
            us_prev = us
            us = us + (sh - zs_new)
            if step_nrm2 is not None:
                step_nrm2 += sigma * np.linalg.norm(us - us_prev) ** 2

            np.subtract(x, z_new, out=scratch)
            r_prim = np.sqrt(nrm2(gr) + nrm2(s - zs_new))
            np.subtract(z_new, z, out=scratch)
            r_dual = sigma * np.sqrt(nrm2(gr) + nrm2(zs_new - zs))

            if opts.record_history:
                gap = x - z_new
                lag = _objective(prob, x[0], x[1])
                lag += sigma * (np.vdot(u, gap).real + us @ (s - zs_new))
                lag += 0.5 * sigma * (
                    np.linalg.norm(gap) ** 2 + np.linalg.norm(s - zs_new) ** 2
                )
                merit_history.append((step_nrm2, lag))
            np.copyto(z, z_new)
            zs = zs_new

        if aa is not None:
            flatten_into(s_new_buf)
            r_vec = r_bufs[flip]
            np.subtract(s_new_buf, s_old, out=r_vec)
            s_acc = aa.push(s_old, r_vec)
            flip ^= 1
            if s_acc is not None:
                np.copyto(z, s_acc[:zlen].view(np.complex128).reshape(z.shape))
                zs = s_acc[zlen : zlen + sc.n_ineq].copy()
                np.copyto(
                    u,
                    s_acc[zlen + sc.n_ineq : 2 * zlen + sc.n_ineq]
                    .view(np.complex128)
                    .reshape(u.shape),
                )
                us = s_acc[2 * zlen + sc.n_ineq :].copy()

        bound = scale_dim * eps_factor * opts.tolerance
        eps_pri = bound * (1.0 + np.sqrt(nrm2(z.reshape(-1))))
        eps_dual = bound * (1.0 + sigma * np.sqrt(nrm2(u.reshape(-1))))
        if r_prim <= eps_pri and r_dual <= eps_dual:
            # acceleration can leave the iterate slightly outside the cone;
            # certify (and return) its projection
            zh, _ = _kernels.psd_project_stack((z + z.conj().transpose(0, 2, 1)) / 2.0)
            kkt = check_kkt(prob, zh[0], zh[1])
            if kkt <= opts.tolerance:
                z = zh
                status = "optimal"
                break
            eps_factor *= 0.25
            if eps_factor < 1e-10:
                break

        if it % 100 == 0:
            viol = float(np.max(np.abs(sc.eval_rows(z, np.maximum(zs, 0.0)) - sc.rhs))) if sc.n_rows else 0.0
            viol_hist.append(viol)
            w = opts.stall_window
            if (
                len(viol_hist) >= w
                and viol > 1e-4
                and viol > 0.95 * viol_hist[-w]
                and sigma * np.linalg.norm(u) > (1e4 if w >= 25 else 1e2)
            ):
                status = "infeasible"
                break
        if opts.adapt_penalty and it % 25 == 0:
            rescaled = False
            if r_prim > 5.0 * r_dual and sigma < 1e8:
                sigma *= 2.0
                u /= 2.0
                us /= 2.0
                rescaled = True
            elif r_dual > 5.0 * r_prim and sigma > 1e-6:
                sigma /= 2.0
                u *= 2.0
                us *= 2.0
                rescaled = True
            if rescaled:
                alpha, beta, g_inv = factor(sigma)
                if aa is not None:
                    aa.reset()  # the fixed-point map changed

    if status != "optimal":
        # surface the best iterate cleaned up: Hermitian and on the cone
        z, _ = _kernels.psd_project_stack((z + z.conj().transpose(0, 2, 1)) / 2.0)
    q_t, q_r = z[0], z[1]
    kkt = check_kkt(prob, q_t, q_r)
    if status != "infeasible" and kkt <= opts.tolerance:
        status = "optimal"
    state = QsdpState(z=z, zs=zs, u=u, us=us, sigma=sigma)
    return QsdpSolution(
        q_t_mat=q_t,
        q_r_mat=q_r,
        status=status,
        kkt_residual=float(kkt),
        objective=_objective(prob, q_t, q_r),
        iterations=it,
        state=state,
        merit_history=merit_history,
    )


def check_kkt(prob: QsdpProblem, q_t, q_r) -> float:
    """Max of primal violation, PSD violation, dual feasibility,
    complementarity and stationarity residual for a candidate pair.

    Multipliers are estimated independently of the solver by least squares
    on the range space of each variable (where the PSD-cone multiplier must
    vanish), so a solver solution is re-certified rather than trusted.
    """
    sc = _Scaled(prob)
    if sc.trivially_infeasible is not None:
        return np.inf
    m = prob.dim
    rho = prob.quad_weight
    q = np.stack([np.asarray(q_t, dtype=np.complex128), np.asarray(q_r, dtype=np.complex128)])

    res = 0.0
    w, v = _kernels.eigh_stack(q)
    res = max(res, float(max(0.0, -w[:, 0].min())))  # PSD violation

    # primal violations on the scaled rows
    d_t = np.diagonal(q[0]).real
    d_r = np.diagonal(q[1]).real
    if sc.n_coupled:
        res = max(res, float(np.abs(d_t[sc.coupled_idx] + d_r[sc.coupled_idx] - 1.0).max()))
    for li, mm, val in sc.fixed_rows:
        res = max(res, abs(float((d_t if li == 0 else d_r)[mm]) - val))
    slacks = np.zeros(sc.n_ineq)
    for k in range(sc.n_ineq):
        slacks[k] = np.vdot(sc.ineq_mat[k], q[sc.ineq_target[k]]).real - sc.ineq_bound[k]
        res = max(res, max(0.0, -float(slacks[k])))

    # stationarity: G_l = C_l + rho Q_l - sum nu_i A_i - Diag(mu) must be the
    # PSD multiplier: zero on the range space of Q_l, PSD overall
    grad0 = np.stack([prob.linear_cost_t + rho * q[0], prob.linear_cost_r + rho * q[1]])
    lam_max = np.maximum(w[:, -1], 0.0)
    vpos = []
    for l in range(2):
        keep = w[l] > max(1e-7 * max(lam_max[l], 1.0), 1e-12)
        vpos.append(v[l][:, keep])

    n_mu = sc.n_coupled + sc.n_fixed
    n_unknown = n_mu + sc.n_ineq
    if n_unknown:
        cols = []
        rhs_parts = [grad0[l] @ vpos[l] for l in range(2)]

        def stackify(mat_t, mat_r):
            return np.concatenate(
                [
                    (mat_t @ vpos[0]).ravel() if vpos[0].size else np.zeros(0, complex),
                    (mat_r @ vpos[1]).ravel() if vpos[1].size else np.zeros(0, complex),
                ]
            )

        zero = np.zeros((m, m), dtype=np.complex128)
        for k, mm in enumerate(sc.coupled_idx):
            e = zero.copy()
            e[mm, mm] = 1.0
            cols.append(stackify(e, e))
        for li, mm, _ in sc.fixed_rows:
            e = zero.copy()
            e[mm, mm] = 1.0
            cols.append(stackify(e, zero) if li == 0 else stackify(zero, e))
        for k in range(sc.n_ineq):
            a = sc.ineq_mat[k]
            cols.append(stackify(a, zero) if sc.ineq_target[k] == 0 else stackify(zero, a))
        bvec = np.concatenate([p.ravel() for p in rhs_parts])
        amat = np.column_stack(cols) if cols else np.zeros((bvec.size, 0), complex)
        theta = np.zeros(n_unknown)
        if bvec.size:
            amat_r = np.vstack([amat.real, amat.imag])
            bvec_r = np.concatenate([bvec.real, bvec.imag])
            # a multiplier whose gradient vanishes on the range space is
            # unconstrained by the fit; pin it to zero instead of feeding a
            # singular column to the solver
            keep = np.linalg.norm(amat_r, axis=0) > 1e-14
            if keep.any():
                if sc.n_ineq:
                    # inequality multipliers live in the nonnegative orthant;
                    # an unconstrained fit can report a spurious
                    # dual-feasibility violation when the optimum is
                    # degenerate
                    from scipy.optimize import lsq_linear

                    lb = np.concatenate([np.full(n_mu, -np.inf), np.zeros(sc.n_ineq)])
                    ub = np.full(n_unknown, np.inf)
                    fit = lsq_linear(
                        amat_r[:, keep], bvec_r, bounds=(lb[keep], ub[keep]), tol=1e-12
                    )
                    theta[keep] = fit.x
                else:
                    theta[keep], *_ = np.linalg.lstsq(amat_r[:, keep], bvec_r, rcond=None)
        mu = theta[:n_mu]
        nu = theta[n_mu:]
    else:
        mu = np.zeros(0)
        nu = np.zeros(0)

    g = grad0.copy()
    for k, mm in enumerate(sc.coupled_idx):
        g[0][mm, mm] -= mu[k]
        g[1][mm, mm] -= mu[k]
    for k, (li, mm, _) in enumerate(sc.fixed_rows):
        g[li][mm, mm] -= mu[sc.n_coupled + k]
    for k in range(sc.n_ineq):
        g[sc.ineq_target[k]] -= nu[k] * sc.ineq_mat[k]

    for k in range(sc.n_ineq):
        res = max(res, max(0.0, -float(nu[k])))  # dual feasibility
        res = max(res, abs(float(nu[k]) * float(slacks[k])))  # complementarity
    gw = _kernels.eigvalsh_stack(g)
    res = max(res, float(max(0.0, -gw[:, 0].min())))  # dual cone feasibility
    for l in range(2):
        if vpos[l].size:
            res = max(res, float(np.abs(g[l] @ vpos[l]).max()))  # range-space stationarity
    return float(res)


def dump_problem(prob: QsdpProblem, path):
    """Write a self-describing JSON dump (row-major [re, im] entry pairs)."""

    def mat_to_json(mat):
        return [[float(x.real), float(x.imag)] for x in np.asarray(mat).ravel()]

    doc = {
        "format": "starfd-qsdp-v1",
        "dim": prob.dim,
        "quad_weight": prob.quad_weight,
        "linear_cost_t": mat_to_json(prob.linear_cost_t),
        "linear_cost_r": mat_to_json(prob.linear_cost_r),
        "diag_coupling": prob.diag_coupling,
        "element_modes": None
        if prob.element_modes is None
        else [int(x) for x in prob.element_modes],
        "ineq_constraints": [
            {"target": target, "bound": bound, "matrix": mat_to_json(mat)}
            for target, mat, bound in prob.ineq_constraints
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_problem(path) -> QsdpProblem:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "starfd-qsdp-v1":
        raise ValueError(f"unrecognized dump format {doc.get('format')!r}")
    m = doc["dim"]

    def mat_from_json(entries):
        flat = np.array([complex(re, im) for re, im in entries])
        return flat.reshape(m, m)

    return QsdpProblem(
        dim=m,
        linear_cost_t=mat_from_json(doc["linear_cost_t"]),
        linear_cost_r=mat_from_json(doc["linear_cost_r"]),
        quad_weight=doc["quad_weight"],
        ineq_constraints=tuple(
            (c["target"], mat_from_json(c["matrix"]), c["bound"])
            for c in doc["ineq_constraints"]
        ),
        diag_coupling=doc["diag_coupling"],
        element_modes=None if doc["element_modes"] is None else np.array(doc["element_modes"]),
    )
