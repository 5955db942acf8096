"""Scenario schema: JSON configuration, validation, and resolution.

A scenario file fully determines a run. Angles are stored in degrees in the
file (matching how engagement tables are usually quoted) and converted to
radians when the engine builds its initial states. Loading resolves every
"auto" field (gains, robustness margin, random switching schedule, sampled
uncertainty amplitudes) into explicit values, so a resolved scenario is a
complete, reproducible description of the run.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .engine import UncertaintyModel
from .errors import ValidationError
from .guidance import GuidanceParams, min_gain, min_mu
from .kinematics import InterceptorState
from .topology import (
    Graph,
    SwitchedNetwork,
    TopologyBounds,
    graph_from_edges,
    random_schedule,
    topology_bounds,
)

SCHEMA_VERSION = 1
GRAVITY = 9.81           # m/s^2, used to resolve the a_max_g actuator bound
SIGMA_RATE_REF = 1.0     # rad/s reference lead-angle rate for the wdot estimate
SEED_ENV_VAR = "SALVO_SEED"

# Five-interceptor reference engagement: ranges are radial 10 km, speeds
# heterogeneous, communication switched over three connected topologies.
BASELINE_SPEEDS = (400.0, 405.0, 390.0, 385.0, 395.0)
BASELINE_LOS_ELEV_DEG = (45.0, -45.0, 135.0, -135.0, 0.0)
BASELINE_LOS_AZIM_DEG = (0.0, 60.0, -75.0, -10.0, -20.0)
BASELINE_LEAD_ELEV_DEG = (120.0, -60.0, 10.0, 75.0, -100.0)
BASELINE_LEAD_AZIM_DEG = (55.0, 15.0, -45.0, -30.0, -60.0)
BASELINE_GRAPH_EDGES = (
    ((1, 3), (1, 4), (2, 5), (3, 4), (3, 5)),
    ((1, 2), (1, 3), (1, 5), (2, 4), (2, 5), (3, 5)),
    ((1, 2), (2, 3), (3, 4), (4, 5), (1, 5)),
)

WeightLike = float | tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class InterceptorSpec:
    """One interceptor's initial geometry and per-vehicle constants."""

    range_m: float
    los_elev_deg: float
    los_azim_deg: float
    lead_elev_deg: float
    lead_azim_deg: float
    speed: float
    nav_gain: float = 3.0
    c_z: WeightLike = 1.0
    c_y: WeightLike = 1.0

    def initial_state(self) -> InterceptorState:
        d = math.radians
        return InterceptorState(
            r=self.range_m,
            los_elev=d(self.los_elev_deg),
            los_azim=d(self.los_azim_deg),
            lead_elev=d(self.lead_elev_deg),
            lead_azim=d(self.lead_azim_deg),
            speed=self.speed,
        )


@dataclass(frozen=True)
class Scenario:
    """Fully resolved run description; everything the engine needs."""

    name: str
    interceptors: tuple[InterceptorSpec, ...]
    graphs: tuple[Graph, ...]
    schedule: tuple[tuple[float, int], ...]
    guidance: GuidanceParams
    ell: float
    a_max: float
    uncertainty: UncertaintyModel
    dt: float = 1e-3
    t_max: float = 60.0
    r_capture: float = 0.5
    decimation: int = 10
    seed: int = 0
    gain_mode: str = "explicit"
    mu_mode: str = "explicit"
    schema_version: int = SCHEMA_VERSION

    def network(self) -> SwitchedNetwork:
        return SwitchedNetwork(graphs=self.graphs, schedule=self.schedule)

    def bounds(self) -> TopologyBounds:
        return topology_bounds(self.network())

    def initial_states(self) -> list[InterceptorState]:
        return [spec.initial_state() for spec in self.interceptors]


def _req(d: dict, key: str, ctx: str):
    if key not in d:
        raise ValidationError(f"{ctx}: missing required field {key!r}")
    return d[key]


def _num(d: dict, key: str, ctx: str, default=None) -> float:
    val = d.get(key, default)
    if val is None:
        raise ValidationError(f"{ctx}: missing required field {key!r}")
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ValidationError(f"{ctx}.{key}: expected a number, got {val!r}")
    return float(val)


def _weight(raw, ctx: str) -> WeightLike:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        if raw <= 0.0:
            raise ValidationError(f"{ctx}: channel weight must be positive")
        return float(raw)
    if isinstance(raw, (list, tuple)):
        pairs = []
        prev = -math.inf
        for entry in raw:
            if (not isinstance(entry, (list, tuple)) or len(entry) != 2):
                raise ValidationError(f"{ctx}: weight schedule entries are [time, value]")
            t, v = float(entry[0]), float(entry[1])
            if v <= 0.0:
                raise ValidationError(f"{ctx}: channel weight must be positive")
            if t <= prev:
                raise ValidationError(f"{ctx}: weight schedule times must increase")
            prev = t
            pairs.append((t, v))
        if not pairs:
            raise ValidationError(f"{ctx}: weight schedule is empty")
        return tuple(pairs)
    raise ValidationError(f"{ctx}: weight must be a number or [time, value] list")


def _parse_norm(raw, ctx: str) -> float:
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity"):
            return math.inf
        raise ValidationError(f"{ctx}: unknown norm {raw!r}")
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        val = float(raw)
        if val < 1.0:
            raise ValidationError(f"{ctx}: norm selector must be >= 1, got {val}")
        return val
    raise ValidationError(f"{ctx}: norm must be a number or 'inf'")


def norm_label(ell: float) -> str:
    if math.isinf(ell):
        return "inf"
    if ell == int(ell):
        return str(int(ell))
    return repr(ell)


def estimate_wdot_max(model: UncertaintyModel) -> float:
    """Bound on |dw/dt| via dense sampling of |dw/dsigma| over (0, pi],
    scaled by a 1 rad/s reference lead-angle rate."""
    if model.is_zero:
        return 0.0
    b_max = max(abs(x) for x in model.amplitudes)
    if model.shape == 0.0:
        return 0.0
    sig = np.linspace(1e-3, math.pi, 4096)
    slope = np.exp(-model.shape / sig) * model.shape / sig**2
    return float(b_max * slope.max() * SIGMA_RATE_REF)


def scenario_from_dict(raw: dict) -> Scenario:
    """Validate a raw configuration mapping and resolve it to a Scenario."""
    if not isinstance(raw, dict):
        raise ValidationError("scenario document must be a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version}")
    name = str(raw.get("name", "scenario"))

    seed = raw.get("seed", 0)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ValidationError(f"{SEED_ENV_VAR} must be an integer") from exc
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer")

    # -- integration / output ------------------------------------------------
    integ = raw.get("integration", {})
    dt = _num(integ, "dt", "integration", 1e-3)
    t_max = _num(integ, "t_max", "integration", 60.0)
    r_capture = _num(integ, "r_capture", "integration", 0.5)
    sign_eps = _num(integ, "sign_eps", "integration", 1e-3)
    if dt <= 0.0:
        raise ValidationError("integration.dt must be positive")
    if t_max <= 0.0:
        raise ValidationError("integration.t_max must be positive")
    if r_capture <= 0.0:
        raise ValidationError("integration.r_capture must be positive")
    if sign_eps < 0.0:
        raise ValidationError("integration.sign_eps must be nonnegative")
    out = raw.get("output", {})
    decimation = int(_num(out, "decimation", "output", 10))
    if decimation < 1:
        raise ValidationError("output.decimation must be at least 1")

    # -- interceptors ---------------------------------------------------------
    inter_raw = _req(raw, "interceptors", "scenario")
    if not isinstance(inter_raw, list) or not inter_raw:
        raise ValidationError("interceptors must be a non-empty list")
    interceptors = []
    for idx, entry in enumerate(inter_raw):
        ctx = f"interceptors[{idx}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{ctx}: expected an object")
        nav = _num(entry, "nav_gain", ctx, 3.0)
        if nav <= 2.0:
            raise ValidationError(f"{ctx}.nav_gain: nav gain must exceed 2")
        speed = _num(entry, "speed_mps", ctx)
        if speed <= 0.0:
            raise ValidationError(f"{ctx}.speed_mps: must be positive")
        rng_m = _num(entry, "range_m", ctx)
        if rng_m <= r_capture:
            raise ValidationError(f"{ctx}.range_m: must exceed r_capture")
        interceptors.append(
            InterceptorSpec(
                range_m=rng_m,
                los_elev_deg=_num(entry, "los_elev_deg", ctx),
                los_azim_deg=_num(entry, "los_azim_deg", ctx),
                lead_elev_deg=_num(entry, "lead_elev_deg", ctx),
                lead_azim_deg=_num(entry, "lead_azim_deg", ctx),
                speed=speed,
                nav_gain=nav,
                c_z=_weight(entry.get("c_z", 1.0), f"{ctx}.c_z"),
                c_y=_weight(entry.get("c_y", 1.0), f"{ctx}.c_y"),
            )
        )
    n = len(interceptors)

    # -- topology -------------------------------------------------------------
    topo = _req(raw, "topology", "scenario")
    graphs_raw = _req(topo, "graphs", "topology")
    if not isinstance(graphs_raw, list) or not graphs_raw:
        raise ValidationError("topology.graphs must be a non-empty list")
    graphs = []
    for g_idx, edge_list in enumerate(graphs_raw):
        try:
            edges = [(int(i) - 1, int(j) - 1) for i, j in edge_list]
            graphs.append(graph_from_edges(n, edges))
        except ValidationError as exc:
            raise ValidationError(f"topology.graphs[{g_idx}]: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                f"topology.graphs[{g_idx}]: edges must be [i, j] vertex pairs"
            ) from exc
    sched_raw = _req(topo, "schedule", "topology")
    kind = sched_raw.get("kind")
    if kind == "explicit":
        entries_raw = _req(sched_raw, "entries", "topology.schedule")
        schedule = tuple(
            (float(t), int(gid) - 1) for t, gid in entries_raw
        )
    elif kind == "random":
        sched_seed = sched_raw.get("seed", seed + 1)
        schedule = random_schedule(
            n_graphs=len(graphs),
            horizon=t_max,
            dwell_min=_num(sched_raw, "dwell_min", "topology.schedule", 0.5),
            dwell_max=_num(sched_raw, "dwell_max", "topology.schedule", 2.0),
            seed=int(sched_seed),
        )
    else:
        raise ValidationError("topology.schedule.kind must be 'explicit' or 'random'")
    net = SwitchedNetwork(graphs=tuple(graphs), schedule=schedule)
    bounds = topology_bounds(net)

    # -- uncertainty ----------------------------------------------------------
    unc_raw = raw.get("uncertainty", {"kind": "none"})
    unc_kind = unc_raw.get("kind", "none")
    if unc_kind == "none":
        uncertainty = UncertaintyModel(kind="none", amplitudes=(0.0,) * n)
    elif unc_kind == "exp_lead_angle":
        shape = _num(unc_raw, "shape", "uncertainty", 8.0)
        unc_seed = int(unc_raw.get("seed", seed + 2))
        if "b0" in unc_raw:
            b0 = tuple(float(x) for x in unc_raw["b0"])
            if len(b0) != n:
                raise ValidationError("uncertainty.b0 must list one value per interceptor")
        else:
            lo, hi = unc_raw.get("b0_range", (-3.0, 3.0))
            rng = np.random.default_rng(unc_seed)
            b0 = tuple(float(x) for x in rng.uniform(float(lo), float(hi), n))
        uncertainty = UncertaintyModel(
            kind="exp_lead_angle", amplitudes=b0, shape=shape, seed=unc_seed
        )
    else:
        raise ValidationError(f"uncertainty.kind {unc_kind!r} is not supported")

    # -- guidance -------------------------------------------------------------
    gd = _req(raw, "guidance", "scenario")
    base = GuidanceParams(
        coeff_near=_num(gd, "coeff_near", "guidance", 1.0),
        coeff_far=_num(gd, "coeff_far", "guidance", 5.0),
        exp_near=_num(gd, "exp_near", "guidance", 0.1),
        exp_far=_num(gd, "exp_far", "guidance", 2.0),
        exp_outer=_num(gd, "exp_outer", "guidance", 2.0),
        consensus_time=_num(gd, "consensus_time_s", "guidance", 3.0),
        sign_eps=sign_eps,
    )
    gain_mode = gd.get("gain_mode", "auto")
    if gain_mode == "auto":
        margin = _num(gd, "gain_margin", "guidance", 1.05)
        if margin < 1.0:
            raise ValidationError("guidance.gain_margin must be >= 1")
        gains = (margin * min_gain(base, bounds),) * n
    elif gain_mode == "explicit":
        gains_raw = _req(gd, "gains", "guidance")
        gains = tuple(float(x) for x in gains_raw)
        if len(gains) != n:
            raise ValidationError("guidance.gains must list one gain per interceptor")
    else:
        raise ValidationError("guidance.gain_mode must be 'auto' or 'explicit'")
    params = replace(base, gains=gains)

    mu_mode = gd.get("mu_mode", "auto")
    if mu_mode == "auto":
        wdot_max = estimate_wdot_max(uncertainty)
        params = replace(params, wdot_max=wdot_max)
        if wdot_max == 0.0:
            mu = 0.0
        else:
            mu_margin = _num(gd, "mu_margin", "guidance", 1.05)
            mu = mu_margin * min_mu(params, bounds)
    elif mu_mode == "explicit":
        mu = _num(gd, "mu", "guidance")
        wdot_max = _num(gd, "wdot_max", "guidance", estimate_wdot_max(uncertainty))
        params = replace(params, wdot_max=wdot_max)
    else:
        raise ValidationError("guidance.mu_mode must be 'auto' or 'explicit'")
    params = replace(params, robust_gain=mu)
    params.validate()

    # -- allocation -----------------------------------------------------------
    al = raw.get("allocation", {})
    ell = _parse_norm(al.get("norm", 2.0), "allocation.norm")
    a_max_g = _num(al, "a_max_g", "allocation", 40.0)
    if a_max_g <= 0.0:
        raise ValidationError("allocation.a_max_g must be positive")

    return Scenario(
        name=name,
        interceptors=tuple(interceptors),
        graphs=tuple(graphs),
        schedule=schedule,
        guidance=params,
        ell=ell,
        a_max=a_max_g * GRAVITY,
        uncertainty=uncertainty,
        dt=dt,
        t_max=t_max,
        r_capture=r_capture,
        decimation=decimation,
        seed=seed,
        gain_mode=gain_mode,
        mu_mode=mu_mode,
    )


def serialize(sc: Scenario) -> dict:
    """Resolved scenario as a JSON-ready mapping; inverse of scenario_from_dict."""
    def weight_out(w: WeightLike):
        if isinstance(w, tuple):
            return [[t, v] for t, v in w]
        return w

    doc = {
        "schema_version": sc.schema_version,
        "name": sc.name,
        "seed": sc.seed,
        "interceptors": [
            {
                "range_m": i.range_m,
                "los_elev_deg": i.los_elev_deg,
                "los_azim_deg": i.los_azim_deg,
                "lead_elev_deg": i.lead_elev_deg,
                "lead_azim_deg": i.lead_azim_deg,
                "speed_mps": i.speed,
                "nav_gain": i.nav_gain,
                "c_z": weight_out(i.c_z),
                "c_y": weight_out(i.c_y),
            }
            for i in sc.interceptors
        ],
        "topology": {
            "graphs": [
                [[i + 1, j + 1] for i, j in g.edges] for g in sc.graphs
            ],
            "schedule": {
                "kind": "explicit",
                "entries": [[t, idx + 1] for t, idx in sc.schedule],
            },
        },
        "guidance": {
            "coeff_near": sc.guidance.coeff_near,
            "coeff_far": sc.guidance.coeff_far,
            "exp_near": sc.guidance.exp_near,
            "exp_far": sc.guidance.exp_far,
            "exp_outer": sc.guidance.exp_outer,
            "consensus_time_s": sc.guidance.consensus_time,
            "gain_mode": "explicit",
            "gains": list(sc.guidance.gains),
            "mu_mode": "explicit",
            "mu": sc.guidance.robust_gain,
            "wdot_max": sc.guidance.wdot_max,
        },
        "allocation": {
            "norm": "inf" if math.isinf(sc.ell) else sc.ell,
            "a_max_g": sc.a_max / GRAVITY,
        },
        "uncertainty": (
            {"kind": "none"}
            if sc.uncertainty.kind == "none"
            else {
                "kind": sc.uncertainty.kind,
                "b0": list(sc.uncertainty.amplitudes),
                "shape": sc.uncertainty.shape,
                "seed": sc.uncertainty.seed,
            }
        ),
        "integration": {
            "dt": sc.dt,
            "t_max": sc.t_max,
            "r_capture": sc.r_capture,
            "sign_eps": sc.guidance.sign_eps,
        },
        "output": {"decimation": sc.decimation},
    }
    return doc


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize(sc), fh, indent=2)
        fh.write("\n")


def baseline_dict(
    name: str = "paper_baseline",
    norm=2.0,
    uncertainty: dict | None = None,
    seed: int = 2024,
    t_max: float = 60.0,
    dt: float = 1e-3,
) -> dict:
    """Reference five-interceptor engagement as a raw configuration."""
    interceptors = [
        {
            "range_m": 10000.0,
            "los_elev_deg": BASELINE_LOS_ELEV_DEG[i],
            "los_azim_deg": BASELINE_LOS_AZIM_DEG[i],
            "lead_elev_deg": BASELINE_LEAD_ELEV_DEG[i],
            "lead_azim_deg": BASELINE_LEAD_AZIM_DEG[i],
            "speed_mps": BASELINE_SPEEDS[i],
            "nav_gain": 3.0,
            "c_z": 1.0,
            "c_y": 1.0,
        }
        for i in range(5)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "seed": seed,
        "interceptors": interceptors,
        "topology": {
            "graphs": [[list(e) for e in g] for g in BASELINE_GRAPH_EDGES],
            "schedule": {"kind": "random", "dwell_min": 0.5, "dwell_max": 2.0},
        },
        "guidance": {
            "coeff_near": 1.0,
            "coeff_far": 5.0,
            "exp_near": 0.1,
            "exp_far": 2.0,
            "exp_outer": 2.0,
            "consensus_time_s": 3.0,
            "gain_mode": "auto",
            "gain_margin": 1.05,
            "mu_mode": "auto",
        },
        "allocation": {"norm": norm, "a_max_g": 40.0},
        "uncertainty": uncertainty or {"kind": "none"},
        "integration": {
            "dt": dt,
            "t_max": t_max,
            "r_capture": 0.5,
            "sign_eps": 1e-3,
        },
        "output": {"decimation": 10},
    }


PRESET_BUILDERS = {
    "paper_baseline": lambda: baseline_dict("paper_baseline", norm=2.0),
    "fig3": lambda: baseline_dict(
        "fig3",
        norm=5.0,
        uncertainty={
            "kind": "exp_lead_angle",
            "b0_range": [-3.0, 3.0],
            "shape": 8.0,
        },
    ),
    "fig4": lambda: baseline_dict("fig4", norm=1.0),
    "fig5": lambda: baseline_dict("fig5", norm=2.0),
    "fig6_linf": lambda: baseline_dict("fig6_linf", norm="inf"),
}


def preset_dict(name: str) -> dict:
    if name not in PRESET_BUILDERS:
        raise ValidationError(
            f"unknown preset {name!r}; available: {sorted(PRESET_BUILDERS)}"
        )
    return PRESET_BUILDERS[name]()


def load_scenario(path_or_preset) -> Scenario:
    """Load a scenario from a JSON file or a built-in preset name."""
    key = str(path_or_preset)
    if key in PRESET_BUILDERS:
        return scenario_from_dict(preset_dict(key))
    if not os.path.exists(key):
        raise ValidationError(f"no such scenario file or preset: {key}")
    try:
        with open(key, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{key}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(raw)
