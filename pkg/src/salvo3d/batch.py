"""Reproduction presets and batch sweeps built on top of single runs.

reproduce() runs the canonical engagement under a specific allocation norm
and uncertainty setting; the "fig6" target additionally normalizes the joint
control effort across the norm family, with the 1-norm cost as the unit.
run_sweep() executes a declarative batch: randomized initial geometries with
freshly certified gains, or a step-size refinement series.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import replace

import numpy as np

from . import results
from .engine import SimRecord, run
from .errors import ValidationError
from .guidance import certify
from .scenario import (
    Scenario,
    load_scenario,
    norm_label,
    preset_dict,
    scenario_from_dict,
)

REPRODUCE_TARGETS = ("fig3", "fig4", "fig5", "fig6")

# Geometry envelope used when a sweep spec does not override it: ranges vary
# +-20% around 10 km, LOS elevation stays clear of the +-90 deg coordinate
# pole, and lead angles cover the spread of the baseline engagement.
DEFAULT_ENVELOPE = {
    "range_band": 0.2,
    "los_elev_deg": (-70.0, 70.0),
    "los_azim_deg": (-180.0, 180.0),
    "lead_elev_deg": (-120.0, 120.0),
    "lead_azim_deg": (-60.0, 60.0),
}


def reproduce(figure: str, out_dir: str | None = None) -> dict:
    """Run one of the canonical engagements and optionally write bundles.

    fig3 : norm 5 with lead-angle-shaped uncertainty
    fig4 : norm 1, no uncertainty
    fig5 : norm 2, no uncertainty
    fig6 : norms {1, 2, inf}, no uncertainty, plus normalized joint costs
    """
    if figure not in REPRODUCE_TARGETS:
        raise ValidationError(
            f"unknown reproduction target {figure!r}; expected one of {REPRODUCE_TARGETS}"
        )
    presets = {"fig6": ("fig4", "fig5", "fig6_linf")}.get(figure, (figure,))
    records: dict[str, SimRecord] = {}
    bundles = []
    for preset in presets:
        sc = scenario_from_dict(preset_dict(preset))
        rec = run(sc)
        records[preset] = rec
        if out_dir is not None:
            cert = certify(sc.guidance, sc.bounds())
            bundles.append(
                results.write_bundle(
                    rec, out_dir, name=preset,
                    certification=_cert_dict(cert),
                )
            )
    out = {"records": records, "bundles": bundles}
    if figure == "fig6":
        base = records["fig4"].joint_cost
        normalized = {
            "1": records["fig4"].joint_cost / base,
            "2": records["fig5"].joint_cost / base,
            "inf": records["fig6_linf"].joint_cost / base,
        }
        out["normalized_joint_costs"] = normalized
        if out_dir is not None:
            path = os.path.join(out_dir, "fig6_joint_costs.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "normalized_joint_costs": normalized,
                        "joint_costs": {
                            norm_label(records[p].ell): records[p].joint_cost
                            for p in presets
                        },
                    },
                    fh, indent=2,
                )
                fh.write("\n")
            out["costs_path"] = path
    return out


def _cert_dict(report) -> dict:
    return {
        "passes": report.passes,
        "settling_constant": report.settling_constant,
        "min_edges": report.min_edges,
        "min_lambda2": report.min_lambda2,
        "gain_bound": report.gain_bound,
        "gains": list(report.gains),
        "gain_margins": list(report.gain_margins),
        "mu": report.mu,
        "mu_bound": report.mu_bound,
        "wdot_max": report.wdot_max,
        "exponent_ok": report.exponent_ok,
        "failures": list(report.failures),
    }


def _base_dict(spec: dict) -> dict:
    base = spec.get("base", "paper_baseline")
    if isinstance(base, dict):
        return base
    key = str(base)
    try:
        return preset_dict(key)
    except ValidationError:
        if os.path.exists(key):
            with open(key, "r", encoding="utf-8") as fh:
                return json.load(fh)
        raise


def _apply_overrides(doc: dict, overrides: dict) -> dict:
    for section, value in overrides.items():
        if isinstance(value, dict) and isinstance(doc.get(section), dict):
            doc[section] = {**doc[section], **value}
        else:
            doc[section] = value
    return doc


def sample_geometry(doc: dict, rng: np.random.Generator, envelope: dict) -> dict:
    """Randomize interceptor initial geometry in place within the envelope."""
    band = float(envelope.get("range_band", DEFAULT_ENVELOPE["range_band"]))
    for entry in doc["interceptors"]:
        entry["range_m"] = float(entry["range_m"] * (1.0 + rng.uniform(-band, band)))
        for key in ("los_elev_deg", "los_azim_deg", "lead_elev_deg", "lead_azim_deg"):
            lo, hi = envelope.get(key, DEFAULT_ENVELOPE[key])
            entry[key] = float(rng.uniform(lo, hi))
    return doc


def run_sweep(spec: dict, out_dir: str | None = None) -> dict:
    """Execute a declarative batch of runs.

    spec kinds:
      geometry : {"kind": "geometry", "base": ..., "samples": int, "seed": int,
                  "envelope": {...}, "t_max": float, "overrides": {...}}
      dt       : {"kind": "dt", "base": ..., "dt_values": [..], "overrides": {...}}
    An empty spec yields an empty sweep.
    """
    if not spec:
        return {"runs": [], "aggregate": {}}
    kind = spec.get("kind")
    if kind == "geometry":
        out = _geometry_sweep(spec, out_dir)
    elif kind == "dt":
        out = _dt_sweep(spec, out_dir)
    else:
        raise ValidationError(f"sweep.kind must be 'geometry' or 'dt', got {kind!r}")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "aggregate.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(out["aggregate"], fh, indent=2)
            fh.write("\n")
        out["aggregate_path"] = path
    return out


def _geometry_sweep(spec: dict, out_dir: str | None) -> dict:
    samples = int(spec.get("samples", 50))
    seed = int(spec.get("seed", 0))
    envelope = {**DEFAULT_ENVELOPE, **spec.get("envelope", {})}
    runs = []
    consensus_times = []
    failures = []
    for k in range(samples):
        doc = _base_dict(spec)
        doc = _apply_overrides(doc, spec.get("overrides", {}))
        if "t_max" in spec:
            doc["integration"]["t_max"] = float(spec["t_max"])
        doc["seed"] = seed + k
        doc["name"] = f"{doc.get('name', 'sweep')}_s{k:03d}"
        rng = np.random.default_rng(seed + k)
        sample_geometry(doc, rng, envelope)
        try:
            sc = scenario_from_dict(doc)
            rec = run(sc)
        except Exception as exc:  # keep sweeping; record the failure
            failures.append({"sample": k, "error": str(exc)})
            continue
        consensus_times.append(rec.consensus_time)
        entry = {
            "sample": k,
            "seed": doc["seed"],
            "consensus_time": rec.consensus_time,
            "impact_spread": rec.impact_spread,
            "failure": rec.failure,
        }
        runs.append(entry)
        if out_dir is not None:
            results.write_bundle(rec, out_dir, name=f"sample_{k:03d}")
    ts = [sc for sc in consensus_times if sc is not None]
    aggregate = {
        "kind": "geometry",
        "samples": samples,
        "completed": len(runs),
        "failures": failures,
        "consensus_times": consensus_times,
        "max_consensus_time": max(ts) if ts else None,
        "all_reached_consensus": len(ts) == len(runs) and not failures,
    }
    return {"runs": runs, "aggregate": aggregate}


def _dt_sweep(spec: dict, out_dir: str | None) -> dict:
    dt_values = [float(x) for x in spec.get("dt_values", (1e-3, 5e-4))]
    if not dt_values:
        return {"runs": [], "aggregate": {}}
    runs = []
    impact_sets = []
    for k, dt in enumerate(dt_values):
        doc = _base_dict(spec)
        doc = _apply_overrides(doc, spec.get("overrides", {}))
        doc["integration"]["dt"] = dt
        doc["name"] = f"{doc.get('name', 'sweep')}_dt{k}"
        sc = scenario_from_dict(doc)
        rec = run(sc)
        impact_sets.append(rec.impact_times)
        runs.append({
            "dt": dt,
            "impact_times": [x for x in rec.impact_times],
            "consensus_time": rec.consensus_time,
        })
        if out_dir is not None:
            results.write_bundle(rec, out_dir, name=f"dt_{k}")
    deltas = []
    for a, b in zip(impact_sets, impact_sets[1:]):
        if all(x is not None for x in a) and all(x is not None for x in b):
            deltas.append(max(abs(x - y) for x, y in zip(a, b)))
        else:
            deltas.append(None)
    aggregate = {
        "kind": "dt",
        "dt_values": dt_values,
        "impact_time_deltas": deltas,
        "max_impact_time_delta": max((d for d in deltas if d is not None), default=None),
    }
    return {"runs": runs, "aggregate": aggregate}
