"""Built-in desk-scale figure configurations.

The published study runs 40 surface elements; these presets default to 16
(and sweep 8..20) so the full figure suite completes in minutes on a
laptop.  Rates in bps/Hz, attenuations in dB, noise in dBm.
"""

from dataclasses import replace

from .experiments import ExperimentConfig, config_from_dict

FIGURE_IDS = (2, 3, 4, 5)


def figure_config(figure_id: int, scheme: str, seeds) -> ExperimentConfig:
    """Desk-scale config for one scheme of one figure.

    2: per-iteration convergence traces at m=16, DL demand 4 bps/Hz
    3: converged power vs element count m in {8, 12, 16, 20}
    4: converged power vs DL rate demand in {1..6} bps/Hz at m=16
    5: converged power vs SI attenuation in {-130..-80} dB at m=16
    """
    base = {
        "scheme": scheme,
        "m": 16,
        "r_u_th": 1.0,
        "r_d_th": 4.0,
        "seeds": seeds,
    }
    if figure_id == 2:
        base["emit_trace"] = True
    elif figure_id == 3:
        base["sweep"] = {"param": "m", "values": [8, 12, 16, 20]}
    elif figure_id == 4:
        base["sweep"] = {"param": "r_d_th", "values": [1, 2, 3, 4, 5, 6]}
    elif figure_id == 5:
        base["sweep"] = {
            "param": "si_pathloss_db",
            "values": [-130, -120, -110, -100, -90, -80],
        }
    else:
        raise ValueError(f"figure id must be one of {FIGURE_IDS}, got {figure_id}")
    return config_from_dict(base)


def figure_schemes(figure_id: int) -> tuple:
    return ("star-fd", "star-hd", "con-fd")


def default_seed_count(figure_id: int) -> int:
    return 10 if figure_id == 2 else 20


def with_seeds(config: ExperimentConfig, seeds) -> ExperimentConfig:
    if isinstance(seeds, int):
        seeds = tuple(range(seeds))
    return replace(config, seeds=tuple(seeds))
