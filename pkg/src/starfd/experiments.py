"""Experiment configuration, multi-seed orchestration and CSV emission.

A config selects one scheme and optionally sweeps a single parameter;
(sweep value, seed) pairs run as an embarrassingly parallel batch over a
bounded worker pool, results are sorted deterministically before emission,
and every float is formatted with 12 significant digits so identical
configs produce byte-identical CSVs.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .ao import AoOptions, run_ao
from .beamforming import ScaOptions
from .benchmarks import run_con_fd, run_star_hd
from .channel import ChannelParams, Geometry, generate_channels
from .power import InfeasibleError
from .qsdp import QsdpOptions
from .system import NoiseParams, RateRequirements, mw_to_dbm

SCHEMES = ("star-fd", "star-hd", "con-fd")
SWEEP_PARAMS = ("m", "r_d_th", "si_pathloss_db")

SUMMARY_COLUMNS = [
    "scheme",
    "sweep_param",
    "sweep_value",
    "seed",
    "p_u_dbm",
    "p_d_dbm",
    "total_dbm",
    "hd_slot_pu_dbm",
    "hd_slot_pd_dbm",
    "iterations",
    "converged",
    "r_u_achieved",
    "r_d_achieved",
    "status",
]
TRACE_COLUMNS = ["scheme", "seed", "n", "total_dbm", "sca_residual"]


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "star-fd"
    m: int = 16
    geometry: Geometry = Geometry()
    channel: ChannelParams = ChannelParams()
    r_u_th: float = 1.0
    r_d_th: float = 4.0
    noise_dbm_u: float = -80.0
    noise_dbm_d: float = -80.0
    solver: AoOptions = AoOptions()
    seeds: tuple = (0,)
    sweep_param: str | None = None
    sweep_values: tuple = ()
    emit_trace: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_PARAMS:
                raise ConfigError(
                    f"sweep parameter must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}"
                )
            if not self.sweep_values:
                raise ConfigError("sweep requires a nonempty value list")
        if not self.seeds:
            raise ConfigError("at least one seed required")


_ALLOWED_TOP = {
    "scheme",
    "m",
    "geometry",
    "channel",
    "r_u_th",
    "r_d_th",
    "noise_dbm_u",
    "noise_dbm_d",
    "solver",
    "seeds",
    "sweep",
    "emit_trace",
}
_ALLOWED_GEOMETRY = {"bs", "ris", "ul_user", "dl_user"}
_ALLOWED_CHANNEL = {
    "pl0_db",
    "d0",
    "exponent",
    "rician_k_db",
    "rician_k_si_db",
    "si_pathloss_db",
}
_ALLOWED_SOLVER = {
    "rho",
    "eps1",
    "eps2",
    "max_sca_iterations",
    "max_ao_iterations",
    "qsdp_tolerance",
    "qsdp_max_iterations",
}
_ALLOWED_SWEEP = {"param", "values"}


def _reject_unknown(doc, allowed, where):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(unknown)}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Parse a config document; unknown fields are errors (typo safety)."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(doc, _ALLOWED_TOP, "config")

    geometry = Geometry()
    if "geometry" in doc:
        _reject_unknown(doc["geometry"], _ALLOWED_GEOMETRY, "geometry")
        geometry = Geometry(
            **{k: tuple(v) for k, v in doc["geometry"].items()}
        )

    m = int(doc.get("m", 16))
    channel_kwargs = {"num_elements": m}
    if "channel" in doc:
        _reject_unknown(doc["channel"], _ALLOWED_CHANNEL, "channel")
        channel_kwargs.update(doc["channel"])
    channel = ChannelParams(**channel_kwargs)

    solver = AoOptions()
    if "solver" in doc:
        _reject_unknown(doc["solver"], _ALLOWED_SOLVER, "solver")
        s = doc["solver"]
        qsdp = QsdpOptions(
            tolerance=s.get("qsdp_tolerance", 1e-7),
            max_iterations=int(s.get("qsdp_max_iterations", 20000)),
        )
        sca = ScaOptions(
            eps1=s.get("eps1", 1e-6),
            max_iterations=int(s.get("max_sca_iterations", 50)),
            rho=s.get("rho", 1e-3),
            qsdp=qsdp,
        )
        solver = AoOptions(
            eps2=s.get("eps2", 1e-4),
            max_iterations=int(s.get("max_ao_iterations", 30)),
            sca=sca,
        )

    seeds = doc.get("seeds", 1)
    if isinstance(seeds, int):
        seeds = tuple(range(seeds))
    else:
        seeds = tuple(int(s) for s in seeds)

    sweep_param = None
    sweep_values = ()
    if doc.get("sweep") is not None:
        _reject_unknown(doc["sweep"], _ALLOWED_SWEEP, "sweep")
        sweep_param = doc["sweep"]["param"]
        sweep_values = tuple(doc["sweep"]["values"])

    return ExperimentConfig(
        scheme=doc.get("scheme", "star-fd"),
        m=m,
        geometry=geometry,
        channel=channel,
        r_u_th=float(doc.get("r_u_th", 1.0)),
        r_d_th=float(doc.get("r_d_th", 4.0)),
        noise_dbm_u=float(doc.get("noise_dbm_u", -80.0)),
        noise_dbm_d=float(doc.get("noise_dbm_d", -80.0)),
        solver=solver,
        seeds=seeds,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        emit_trace=bool(doc.get("emit_trace", False)),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


@dataclass
class RunResult:
    scheme: str
    sweep_param: str
    sweep_value: float
    seed: int
    status: str = "ok"
    p_u: float = float("nan")
    p_d: float = float("nan")
    total: float = float("nan")
    hd_slot_pu: float | None = None
    hd_slot_pd: float | None = None
    iterations: int = 0
    converged: bool = False
    r_u: float = float("nan")
    r_d: float = float("nan")
    trace: list = field(default_factory=list)  # (n, total_mw, sca_residual)


def _apply_point(config: ExperimentConfig, value):
    """Specialize (m, r_d_th, channel params) for one sweep point."""
    m, r_d_th, channel = config.m, config.r_d_th, config.channel
    from dataclasses import replace

    if config.sweep_param == "m":
        m = int(value)
        channel = replace(channel, num_elements=m)
    elif config.sweep_param == "r_d_th":
        r_d_th = float(value)
    elif config.sweep_param == "si_pathloss_db":
        channel = replace(channel, si_pathloss_db=float(value))
    if channel.num_elements != m:
        channel = replace(channel, num_elements=m)
    return m, r_d_th, channel


def run_single(config: ExperimentConfig, sweep_value, seed: int) -> RunResult:
    """One (sweep point, seed) run of the configured scheme."""
    sweep_param = config.sweep_param or ""
    value = sweep_value if sweep_value is not None else float("nan")
    res = RunResult(config.scheme, sweep_param, value, seed)
    _, r_d_th, channel = _apply_point(config, sweep_value)
    req = RateRequirements(config.r_u_th, r_d_th)
    noise = NoiseParams.from_dbm(config.noise_dbm_u, config.noise_dbm_d)
    try:
        ch = generate_channels(config.geometry, channel, seed)
        if config.scheme == "star-hd":
            pair, total = run_star_hd(ch, req, noise)
            res.p_u, res.p_d = pair.p_u / 2.0, pair.p_d / 2.0
            res.total = total
            res.hd_slot_pu, res.hd_slot_pd = pair.p_u, pair.p_d
            res.iterations = 1
            res.converged = True
            res.r_u, res.r_d = req.r_u_th, req.r_d_th
            res.trace = [(1, total, 0.0)]
        else:
            runner = run_ao if config.scheme == "star-fd" else run_con_fd
            pair, _, trace = runner(ch, req, noise, config.solver, seed)
            res.p_u, res.p_d, res.total = pair.p_u, pair.p_d, pair.total
            res.iterations = trace.iterations
            res.converged = trace.converged
            last = trace.records[-1]
            res.r_u, res.r_d = last.r_u_achieved, last.r_d_achieved
            res.trace = [(r.n, r.total_power, r.sca_residual) for r in trace.records]
    except InfeasibleError as exc:
        res.status = f"infeasible:{type(exc).__name__}"
    return res


def _worker(args):
    return run_single(*args)


def run_experiment(
    config: ExperimentConfig, workers: int = 1
) -> tuple[list[RunResult], list[RunResult]]:
    """Run all (sweep value, seed) pairs; returns (all results, failed ones).

    Deterministic regardless of ``workers``: results are sorted on
    (scheme, sweep value, seed) before returning.
    """
    points = list(config.sweep_values) if config.sweep_param else [None]
    tasks = [(config, v, s) for v in points for s in config.seeds]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, tasks, chunksize=1))
    else:
        results = [run_single(*t) for t in tasks]
    results.sort(key=lambda r: (r.scheme, r.sweep_value, r.seed))
    failed = [r for r in results if r.status != "ok"]
    return results, failed


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def _dbm(mw: float) -> str:
    return _fmt(mw_to_dbm(mw))


def summary_rows(results: list[RunResult]) -> list[str]:
    rows = [",".join(SUMMARY_COLUMNS)]
    for r in results:
        if r.status == "ok":
            cells = [
                r.scheme,
                r.sweep_param,
                _fmt(r.sweep_value),
                str(r.seed),
                _dbm(r.p_u),
                _dbm(r.p_d),
                _dbm(r.total),
                _dbm(r.hd_slot_pu) if r.hd_slot_pu is not None else "",
                _dbm(r.hd_slot_pd) if r.hd_slot_pd is not None else "",
                str(r.iterations),
                "true" if r.converged else "false",
                _fmt(r.r_u),
                _fmt(r.r_d),
                r.status,
            ]
        else:
            cells = [
                r.scheme,
                r.sweep_param,
                _fmt(r.sweep_value),
                str(r.seed),
                "",
                "",
                "",
                "",
                "",
                "0",
                "false",
                "",
                "",
                r.status,
            ]
        rows.append(",".join(cells))
    return rows


def trace_rows(results: list[RunResult]) -> list[str]:
    rows = [",".join(TRACE_COLUMNS)]
    for r in results:
        for n, total_mw, residual in r.trace:
            rows.append(
                ",".join(
                    [r.scheme, str(r.seed), str(n), _dbm(total_mw), _fmt(residual)]
                )
            )
    return rows


def write_csv(path, rows: list[str]):
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(rows) + "\n")
