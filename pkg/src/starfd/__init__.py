"""Transmit-power minimization for a STAR-RIS assisted full-duplex link.

Alternates a closed-form power allocation with SCA-based rank-one passive
beamforming solved through an embedded convex quadratic SDP solver, plus the
half-duplex and split-surface comparison schemes and a seeded experiment
harness with CSV output.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .channel import ChannelParams, ChannelSet, Geometry, generate_channels
from .system import (
    NoiseParams,
    PowerPair,
    RateRequirements,
    StarProfile,
    downlink_rate,
    link_gain,
    uplink_rate,
)
from .power import check_power_feasible, solve_power
from .qsdp import QsdpOptions, QsdpProblem, QsdpSolution, check_kkt, solve_qsdp
from .beamforming import ScaOptions, build_subproblem, extract_rank_one, oitm_init, sca_solve
from .ao import AoOptions, AoTrace, run_ao
from .benchmarks import run_con_fd, run_star_hd

__version__ = "0.1.0"

__all__ = [
    "AoOptions",
    "AoTrace",
    "ChannelParams",
    "ChannelSet",
    "Geometry",
    "KERNEL_BACKEND",
    "NoiseParams",
    "PowerPair",
    "QsdpOptions",
    "QsdpProblem",
    "QsdpSolution",
    "RateRequirements",
    "ScaOptions",
    "StarProfile",
    "build_subproblem",
    "check_kkt",
    "check_power_feasible",
    "downlink_rate",
    "extract_rank_one",
    "generate_channels",
    "link_gain",
    "oitm_init",
    "run_ao",
    "run_con_fd",
    "run_star_hd",
    "sca_solve",
    "solve_power",
    "solve_qsdp",
    "uplink_rate",
]
