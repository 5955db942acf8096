"""Fixed-step closed-loop integration of the multi-interceptor engagement.

Each step snapshots the swarm, exchanges time-to-go estimates over the active
graph, forms the scalar consensus command per interceptor, splits it into
pitch/yaw accelerations, clamps to the actuator limit, and advances the
spherical states one classical RK4 step with the commands held constant.
Captured interceptors freeze and drop out of every neighbor sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import allocation as alloc
from .errors import CertificationError, DomainError, ParameterError, ValidationError
from .guidance import certify, consensus_term
from .kinematics import (
    R_MIN_GUARD,
    InterceptorState,
    _state_rates,
    effective_lead_angle,
    wrap_angle,
)
from .topology import SwitchedNetwork, active_graph, topology_bounds

if TYPE_CHECKING:  # pragma: no cover
    from .scenario import Scenario

TOL_CONSENSUS = 0.01   # s; max pairwise time-to-go gap counting as agreement
CONSENSUS_DWELL = 0.2  # s; gap must stay below tolerance this long


@dataclass(frozen=True)
class UncertaintyModel:
    """Lumped time-to-go estimation error as a function of the lead angle.

    kind "none" returns 0; kind "exp_lead_angle" returns
    b0_i * exp(-shape / sigma), which decays to zero together with the lead
    angle, so the error only matters during the transient. amplitudes holds
    one b0 per interceptor; seed records how they were drawn.
    """

    kind: str = "none"
    amplitudes: tuple[float, ...] = ()
    shape: float = 8.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "exp_lead_angle"):
            raise ValidationError(f"unknown uncertainty kind {self.kind!r}")
        if self.kind == "exp_lead_angle" and self.shape < 0.0:
            raise ValidationError("uncertainty shape parameter must be >= 0")

    def value(self, agent: int, sigma: float) -> float:
        if self.kind == "none":
            return 0.0
        if sigma <= 0.0:
            return 0.0
        return self.amplitudes[agent] * math.exp(-self.shape / sigma)

    @property
    def is_zero(self) -> bool:
        return self.kind == "none" or not any(self.amplitudes)


@dataclass
class SwarmState:
    """All interceptor states at one instant plus capture bookkeeping."""

    t: float
    interceptors: list[InterceptorState]
    captured: list[bool]
    impact_times: list[float | None]

    @classmethod
    def fresh(cls, interceptors: list[InterceptorState], t: float = 0.0) -> "SwarmState":
        n = len(interceptors)
        return cls(t, interceptors, [False] * n, [None] * n)


@dataclass
class SimRecord:
    """Decimated time series of one run plus the derived scalar metrics."""

    t: np.ndarray
    eta: np.ndarray
    r: np.ndarray
    los_elev: np.ndarray
    los_azim: np.ndarray
    lead_elev: np.ndarray
    lead_azim: np.ndarray
    sigma: np.ndarray
    tgo: np.ndarray
    w: np.ndarray
    command: np.ndarray
    a_z: np.ndarray
    a_y: np.ndarray
    sat: np.ndarray
    capture_sample: tuple[int, ...]
    impact_times: tuple[float | None, ...]
    consensus_time: float | None
    impact_spread: float | None
    per_agent_cost: tuple[float, ...]
    joint_cost: float
    saturation_occupancy: tuple[float, ...]
    disconnect_times: tuple[float, ...]
    nav_gains: tuple[float, ...]
    dt: float
    decimation: int
    ell: float
    scenario_name: str
    seed: int
    failure: str | None = None
    certification_passed: bool | None = None

    @property
    def n_agents(self) -> int:
        return self.tgo.shape[1]

    def alive_mask(self) -> np.ndarray:
        """Boolean (n_samples, n) mask: agent not yet captured at sample."""
        n_samples = self.t.shape[0]
        mask = np.ones((n_samples, self.n_agents), dtype=bool)
        for i, k in enumerate(self.capture_sample):
            if k >= 0:
                mask[k:, i] = False
        return mask


def _guarded_rates(r, los_elev, lead_elev, lead_azim, speed, a_z, a_y):
    """Rates with the close-range freeze: below the range guard only the
    range keeps closing, so capture interpolation stays smooth while the
    1/r terms never blow up."""
    if r <= R_MIN_GUARD:
        return (-speed * math.cos(lead_elev) * math.cos(lead_azim),
                0.0, 0.0, 0.0, 0.0)
    return _state_rates(r, los_elev, lead_elev, lead_azim, speed, a_z, a_y)


def _rk4_advance(s: InterceptorState, a_z: float, a_y: float, dt: float) -> None:
    """One RK4 step in place, commands held constant (zero-order hold)."""
    r0, el0, az0 = s.r, s.los_elev, s.los_azim
    me0, ma0, v = s.lead_elev, s.lead_azim, s.speed
    k1 = _guarded_rates(r0, el0, me0, ma0, v, a_z, a_y)
    h = 0.5 * dt
    k2 = _guarded_rates(r0 + h * k1[0], el0 + h * k1[1],
                        me0 + h * k1[3], ma0 + h * k1[4], v, a_z, a_y)
    k3 = _guarded_rates(r0 + h * k2[0], el0 + h * k2[1],
                        me0 + h * k2[3], ma0 + h * k2[4], v, a_z, a_y)
    k4 = _guarded_rates(r0 + dt * k3[0], el0 + dt * k3[1],
                        me0 + dt * k3[3], ma0 + dt * k3[4], v, a_z, a_y)
    sixth = dt / 6.0
    s.r = r0 + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    s.los_elev = wrap_angle(el0 + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]))
    s.los_azim = wrap_angle(az0 + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]))
    s.lead_elev = wrap_angle(me0 + sixth * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]))
    s.lead_azim = wrap_angle(ma0 + sixth * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]))


def detect_capture(
    before: SwarmState, after: SwarmState, r_capture: float
) -> SwarmState:
    """Flag interceptors whose range crossed r_capture during the step.

    The impact time interpolates the range linearly across the step; already
    captured interceptors never re-trigger.
    """
    if r_capture <= 0.0:
        raise ParameterError(f"r_capture must be positive, got {r_capture}")
    dt = after.t - before.t
    for i, s in enumerate(after.interceptors):
        if after.captured[i]:
            continue
        r_prev = before.interceptors[i].r
        if r_prev > r_capture >= s.r:
            frac = (r_prev - r_capture) / (r_prev - s.r) if r_prev != s.r else 1.0
            after.captured[i] = True
            after.impact_times[i] = before.t + frac * dt
    return after


def _weight_at(weight, t: float) -> float:
    """Resolve a channel weight that is either a scalar or a piecewise
    constant schedule of (time, value) pairs."""
    if isinstance(weight, (int, float)):
        return float(weight)
    current = weight[0][1]
    for t_k, val in weight:
        if t_k <= t:
            current = val
        else:
            break
    return float(current)


class Simulation:
    """Compiled scenario: holds the swarm state and advances it step by step."""

    def __init__(self, scenario: "Scenario", check_certification: bool = True):
        self.scenario = scenario
        self.net: SwitchedNetwork = scenario.network()
        self.params = scenario.guidance
        self.uncertainty = scenario.uncertainty
        self.nav_gains = tuple(i.nav_gain for i in scenario.interceptors)
        self.certification_passed: bool | None = None
        if check_certification:
            report = certify(self.params, topology_bounds(self.net))
            self.certification_passed = report.passes
            if not report.passes:
                raise CertificationError(
                    "gains are not certified for this scenario; rerun with "
                    "certification waived to force it:\n" + report.to_text()
                )
        self.swarm = SwarmState.fresh(scenario.initial_states())
        self._neighbors = [g.neighbor_lists() for g in self.net.graphs]
        self._sched_times = list(self.net.switch_times())
        self._sched_idx = [idx for _, idx in self.net.schedule]
        self._sched_pos = 0
        self.step_count = 0
        self.costs = [0.0] * len(self.swarm.interceptors)
        self.sat_steps = [0] * len(self.swarm.interceptors)
        self.cmd_steps = [0] * len(self.swarm.interceptors)
        self.disconnect_times: list[float] = []

    # -- per-step pipeline -------------------------------------------------

    def _active_index(self, t: float) -> int:
        while (self._sched_pos + 1 < len(self._sched_times)
               and self._sched_times[self._sched_pos + 1] <= t):
            self._sched_pos += 1
        return self._sched_idx[self._sched_pos]

    def snapshot_commands(self, t: float) -> dict:
        """Measurements and commands for the current swarm state."""
        sc = self.scenario
        swarm = self.swarm
        n = len(swarm.interceptors)
        eta = self._active_index(t)
        nbrs = self._neighbors[eta]
        sigma = [0.0] * n
        w = [0.0] * n
        tgo = [0.0] * n
        for i, s in enumerate(swarm.interceptors):
            sig = effective_lead_angle(s)
            sigma[i] = sig
            w[i] = self.uncertainty.value(i, sig)
            denom = 4.0 * self.nav_gains[i] - 2.0
            tgo[i] = (s.r / s.speed) * (1.0 + math.sin(sig) ** 2 / denom) + w[i]
        commands = [0.0] * n
        az = [0.0] * n
        ay = [0.0] * n
        sat = [0] * n
        for i, s in enumerate(swarm.interceptors):
            if swarm.captured[i]:
                continue
            diffs = [tgo[j] - tgo[i] for j in nbrs[i] if not swarm.captured[j]]
            nav = self.nav_gains[i]
            sin2 = math.sin(sigma[i]) ** 2
            drift_cancel = -1.0 + math.cos(sigma[i]) * (1.0 - sin2 / (4.0 * nav - 2.0))
            u_cmd = consensus_term(diffs, self.params, self.params.gains[i]) + drift_cancel
            commands[i] = u_cmd
            denom = 4.0 * nav - 2.0
            scale = s.r / (s.speed**2 * denom)
            b_z = scale * math.sin(2.0 * s.lead_elev) * math.cos(s.lead_azim) ** 2
            b_y = scale * math.sin(2.0 * s.lead_azim) * math.cos(s.lead_elev)
            spec = sc.interceptors[i]
            c_z = _weight_at(spec.c_z, t)
            c_y = _weight_at(spec.c_y, t)
            try:
                raw_z, raw_y, _ = alloc._solve(b_z, b_y, u_cmd, c_z, c_y, sc.ell)
            except DomainError as exc:
                raise DomainError(
                    f"interceptor {i + 1} at t = {t:.4f} s: {exc}"
                ) from exc
            lim = sc.a_max
            a_z = min(lim, max(-lim, raw_z))
            a_y = min(lim, max(-lim, raw_y))
            if a_z != raw_z or a_y != raw_y:
                sat[i] = 1
                self.sat_steps[i] += 1
            self.cmd_steps[i] += 1
            az[i] = a_z
            ay[i] = a_y
            self.costs[i] += alloc.weighted_norm(a_z, a_y, c_z, c_y, sc.ell) * sc.dt
        return {
            "eta": eta, "sigma": sigma, "w": w, "tgo": tgo,
            "command": commands, "a_z": az, "a_y": ay, "sat": sat,
        }

    def advance(self, snap: dict) -> None:
        """Integrate one step using the snapshot's held commands."""
        sc = self.scenario
        swarm = self.swarm
        prev_r = [s.r for s in swarm.interceptors]
        for i, s in enumerate(swarm.interceptors):
            if swarm.captured[i]:
                continue
            try:
                _rk4_advance(s, snap["a_z"][i], snap["a_y"][i], sc.dt)
            except DomainError as exc:
                raise DomainError(
                    f"interceptor {i + 1} at t = {swarm.t:.4f} s: {exc}"
                ) from exc
        t_next = (self.step_count + 1) * sc.dt
        newly = []
        for i, s in enumerate(swarm.interceptors):
            if swarm.captured[i]:
                continue
            if prev_r[i] > sc.r_capture >= s.r:
                frac = ((prev_r[i] - sc.r_capture) / (prev_r[i] - s.r)
                        if prev_r[i] != s.r else 1.0)
                swarm.captured[i] = True
                swarm.impact_times[i] = swarm.t + frac * sc.dt
                newly.append(i)
        swarm.t = t_next
        self.step_count += 1
        if newly and sum(not c for c in swarm.captured) >= 2:
            if not self._alive_subgraph_connected(snap["eta"]):
                self.disconnect_times.append(swarm.t)

    def _alive_subgraph_connected(self, eta: int) -> bool:
        alive = [i for i, c in enumerate(self.swarm.captured) if not c]
        if len(alive) <= 1:
            return True
        alive_set = set(alive)
        nbrs = self._neighbors[eta]
        stack, seen = [alive[0]], {alive[0]}
        while stack:
            v = stack.pop()
            for u in nbrs[v]:
                if u in alive_set and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(alive)

    def done(self) -> bool:
        sc = self.scenario
        return all(self.swarm.captured) or self.swarm.t >= sc.t_max - 0.5 * sc.dt


def step(state: SwarmState, scenario: "Scenario") -> SwarmState:
    """Advance a swarm state one integration step under the scenario's law.

    Convenience wrapper over Simulation for tests and interactive use; the
    scenario's own certified gains are assumed (certification is not
    re-checked here).
    """
    sim = Simulation(scenario, check_certification=False)
    sim.swarm = state
    sim.step_count = int(round(state.t / scenario.dt))
    sim._sched_pos = 0
    snap = sim.snapshot_commands(state.t)
    sim.advance(snap)
    return sim.swarm


def run(scenario: "Scenario", check_certification: bool = True) -> SimRecord:
    """Integrate a scenario to capture or timeout and assemble the record."""
    sim = Simulation(scenario, check_certification=check_certification)
    sc = scenario
    n = len(sc.interceptors)
    max_steps = int(math.ceil(sc.t_max / sc.dt)) + 1
    n_rows = max_steps // sc.decimation + 2
    cols = {
        name: np.zeros((n_rows, n))
        for name in ("r", "los_elev", "los_azim", "lead_elev", "lead_azim",
                     "sigma", "tgo", "w", "command", "a_z", "a_y")
    }
    sat_col = np.zeros((n_rows, n), dtype=np.int8)
    t_col = np.zeros(n_rows)
    eta_col = np.zeros(n_rows, dtype=np.int64)
    capture_sample = [-1] * n
    frozen: dict[int, tuple] = {}
    row = 0
    failure: str | None = None

    try:
        while not sim.done():
            t = sim.step_count * sc.dt
            snap = sim.snapshot_commands(t)
            if sim.step_count % sc.decimation == 0:
                t_col[row] = t
                eta_col[row] = snap["eta"]
                for i, s in enumerate(sim.swarm.interceptors):
                    if sim.swarm.captured[i]:
                        if capture_sample[i] < 0:
                            capture_sample[i] = row
                        vals = frozen[i]
                    else:
                        vals = (s.r, s.los_elev, s.los_azim, s.lead_elev,
                                s.lead_azim, snap["sigma"][i], snap["tgo"][i],
                                snap["w"][i])
                        frozen[i] = vals
                        cols["command"][row, i] = snap["command"][i]
                        cols["a_z"][row, i] = snap["a_z"][i]
                        cols["a_y"][row, i] = snap["a_y"][i]
                        sat_col[row, i] = snap["sat"][i]
                    (cols["r"][row, i], cols["los_elev"][row, i],
                     cols["los_azim"][row, i], cols["lead_elev"][row, i],
                     cols["lead_azim"][row, i], cols["sigma"][row, i],
                     cols["tgo"][row, i], cols["w"][row, i]) = vals
                row += 1
            sim.advance(snap)
    except DomainError as exc:
        failure = str(exc)

    t_col = t_col[:row]
    eta_col = eta_col[:row]
    for name in cols:
        cols[name] = cols[name][:row]
    sat_col = sat_col[:row]

    alive_rows = _alive_matrix(row, capture_sample, n)
    consensus_time = _consensus_time(
        t_col, cols["tgo"], alive_rows, TOL_CONSENSUS, CONSENSUS_DWELL
    )
    impacts = list(sim.swarm.impact_times)
    spread = None
    if all(x is not None for x in impacts) and impacts:
        spread = max(impacts) - min(impacts)
    per_cost = tuple(sim.costs)
    occupancy = tuple(
        (s / c if c else 0.0) for s, c in zip(sim.sat_steps, sim.cmd_steps)
    )
    return SimRecord(
        t=t_col, eta=eta_col,
        r=cols["r"], los_elev=cols["los_elev"], los_azim=cols["los_azim"],
        lead_elev=cols["lead_elev"], lead_azim=cols["lead_azim"],
        sigma=cols["sigma"], tgo=cols["tgo"], w=cols["w"],
        command=cols["command"], a_z=cols["a_z"], a_y=cols["a_y"], sat=sat_col,
        capture_sample=tuple(capture_sample),
        impact_times=tuple(impacts),
        consensus_time=consensus_time,
        impact_spread=spread,
        per_agent_cost=per_cost,
        joint_cost=float(sum(per_cost)),
        saturation_occupancy=occupancy,
        disconnect_times=tuple(sim.disconnect_times),
        nav_gains=sim.nav_gains,
        dt=sc.dt,
        decimation=sc.decimation,
        ell=sc.ell,
        scenario_name=sc.name,
        seed=sc.seed,
        failure=failure,
        certification_passed=sim.certification_passed,
    )


def _alive_matrix(n_rows: int, capture_sample: list[int], n: int) -> np.ndarray:
    mask = np.ones((n_rows, n), dtype=bool)
    for i, k in enumerate(capture_sample):
        if k >= 0:
            mask[k:, i] = False
    return mask


def _consensus_time(
    t: np.ndarray,
    tgo: np.ndarray,
    alive: np.ndarray,
    tol: float,
    dwell: float,
) -> float | None:
    """First sample time where the max pairwise alive gap drops below tol
    and stays there for the dwell duration."""
    n_rows = t.shape[0]
    if n_rows < 2:
        return None
    gaps = np.zeros(n_rows)
    for k in range(n_rows):
        vals = tgo[k, alive[k]]
        gaps[k] = float(vals.max() - vals.min()) if vals.size >= 2 else 0.0
    sample_dt = float(t[1] - t[0])
    dwell_rows = max(1, int(round(dwell / sample_dt)))
    below = gaps < tol
    for k in range(n_rows - dwell_rows):
        if below[k : k + dwell_rows + 1].all():
            return float(t[k])
    return None


@dataclass(frozen=True)
class PostConsensusReport:
    """Trajectory-level checks that only make sense after agreement."""

    consensus_time: float | None
    sigma_violations: tuple[tuple[float, int, float], ...]
    tgo_rate_violations: tuple[tuple[float, int, float], ...]
    rate_bound_violations: tuple[tuple[float, int, float], ...]
    rate_bound_vacuous: bool

    @property
    def sigma_monotone_ok(self) -> bool:
        return not self.sigma_violations

    @property
    def tgo_decreasing_ok(self) -> bool:
        return not self.tgo_rate_violations

    @property
    def rate_bound_ok(self) -> bool:
        return self.rate_bound_vacuous or not self.rate_bound_violations


def post_consensus_checks(
    record: SimRecord,
    sigma_tol: float = 1e-3,
    settle_delay: float = CONSENSUS_DWELL,
) -> PostConsensusReport:
    """Verify the expected endgame behavior on a finished record.

    After consensus (plus a settling delay) every alive interceptor's lead
    angle must be non-increasing within sigma_tol per sample and its
    time-to-go strictly decreasing. The uncertainty-rate bound
    |dw/dt| < cos(sigma) (1 - sin^2(sigma) / (4 N - 2)) is sampled along the
    whole trajectory; it is vacuous when the run carried no uncertainty.
    """
    tc = record.consensus_time
    sigma_viol: list[tuple[float, int, float]] = []
    tgo_viol: list[tuple[float, int, float]] = []
    rate_viol: list[tuple[float, int, float]] = []
    n_rows = record.t.shape[0]
    sample_dt = record.dt * record.decimation
    vacuous = not np.any(record.w != 0.0)

    for i in range(record.n_agents):
        last = record.capture_sample[i]
        end = last if last >= 0 else n_rows
        if tc is not None:
            start = int(np.searchsorted(record.t, tc + settle_delay))
            for k in range(start, end - 1):
                d_sigma = record.sigma[k + 1, i] - record.sigma[k, i]
                if d_sigma > sigma_tol:
                    sigma_viol.append((float(record.t[k + 1]), i, float(d_sigma)))
                d_tgo = record.tgo[k + 1, i] - record.tgo[k, i]
                if d_tgo >= 0.0:
                    tgo_viol.append((float(record.t[k + 1]), i, float(d_tgo)))
        if not vacuous:
            nav = record.nav_gains[i]
            for k in range(1, end - 1):
                w_dot = (record.w[k + 1, i] - record.w[k - 1, i]) / (2.0 * sample_dt)
                sig = record.sigma[k, i]
                bound = math.cos(sig) * (
                    1.0 - math.sin(sig) ** 2 / (4.0 * nav - 2.0)
                )
                if abs(w_dot) >= bound:
                    rate_viol.append((float(record.t[k]), i, float(abs(w_dot) - bound)))

    return PostConsensusReport(
        consensus_time=tc,
        sigma_violations=tuple(sigma_viol),
        tgo_rate_violations=tuple(tgo_viol),
        rate_bound_violations=tuple(rate_viol),
        rate_bound_vacuous=vacuous,
    )
