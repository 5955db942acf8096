"""Serialization of run records: per-step CSV and a JSON metrics summary.

The CSV column layout is fixed: `t, eta`, then for each interceptor i the
block `r_i, thetaL_i, psiL_i, thetaM_i, psiM_i, sigma_i, tgo_i, w_i, U_i,
az_i, ay_i, sat_i`. Angles are radians, eta is the 1-based active-graph
index, and floats are written with shortest round-trip formatting so a rerun
with the same seed reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import math
import os

from .engine import SimRecord, post_consensus_checks

_AGENT_FIELDS = (
    ("r", "r"),
    ("thetaL", "los_elev"),
    ("psiL", "los_azim"),
    ("thetaM", "lead_elev"),
    ("psiM", "lead_azim"),
    ("sigma", "sigma"),
    ("tgo", "tgo"),
    ("w", "w"),
    ("U", "command"),
    ("az", "a_z"),
    ("ay", "a_y"),
    ("sat", "sat"),
)


def csv_header(n_agents: int) -> str:
    cols = ["t", "eta"]
    for i in range(1, n_agents + 1):
        cols.extend(f"{name}_{i}" for name, _ in _AGENT_FIELDS)
    return ",".join(cols)


def write_csv(record: SimRecord, path) -> None:
    n = record.n_agents
    arrays = [getattr(record, attr) for _, attr in _AGENT_FIELDS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_header(n) + "\n")
        for k in range(record.t.shape[0]):
            parts = [repr(float(record.t[k])), str(int(record.eta[k]) + 1)]
            for i in range(n):
                for arr in arrays:
                    val = arr[k, i]
                    if arr is record.sat:
                        parts.append(str(int(val)))
                    else:
                        parts.append(repr(float(val)))
            fh.write(",".join(parts) + "\n")


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def summary_dict(record: SimRecord, certification: dict | None = None) -> dict:
    """Scalar metrics of a run as a JSON-ready mapping."""
    checks = post_consensus_checks(record) if record.consensus_time else None
    return {
        "scenario": record.scenario_name,
        "seed": record.seed,
        "norm": "inf" if math.isinf(record.ell) else record.ell,
        "dt": record.dt,
        "decimation": record.decimation,
        "consensus_time": _json_float(record.consensus_time),
        "impact_times": [_json_float(x) for x in record.impact_times],
        "impact_spread": _json_float(record.impact_spread),
        "per_agent_cost": [float(c) for c in record.per_agent_cost],
        "joint_cost": float(record.joint_cost),
        "saturation_occupancy": [float(x) for x in record.saturation_occupancy],
        "disconnect_before_consensus": [
            t for t in record.disconnect_times
            if record.consensus_time is None or t < record.consensus_time
        ],
        "failure": record.failure,
        "certification_passed": record.certification_passed,
        "certification": certification,
        "post_consensus": None if checks is None else {
            "sigma_monotone_ok": checks.sigma_monotone_ok,
            "tgo_decreasing_ok": checks.tgo_decreasing_ok,
            "rate_bound_ok": checks.rate_bound_ok,
            "rate_bound_vacuous": checks.rate_bound_vacuous,
            "sigma_violations": len(checks.sigma_violations),
            "tgo_rate_violations": len(checks.tgo_rate_violations),
            "rate_bound_violations": len(checks.rate_bound_violations),
        },
    }


def write_summary(record: SimRecord, path, certification: dict | None = None) -> dict:
    doc = summary_dict(record, certification)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc


def write_bundle(record: SimRecord, out_dir, name: str | None = None,
                 certification: dict | None = None) -> dict:
    """Write timeseries.csv + summary.json under out_dir/<name>/."""
    label = name or record.scenario_name
    target = os.path.join(out_dir, label)
    os.makedirs(target, exist_ok=True)
    csv_path = os.path.join(target, "timeseries.csv")
    json_path = os.path.join(target, "summary.json")
    write_csv(record, csv_path)
    doc = write_summary(record, json_path, certification)
    return {"dir": target, "csv": csv_path, "summary": json_path, "metrics": doc}
