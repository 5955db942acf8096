"""Command-line surface.

Subcommands: run, certify, reproduce, sweep, validate. Exit codes: 0 on
success, 2 on scenario validation failure, 3 on gain-certification failure,
4 on a runtime kinematic domain error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import batch, results
from .engine import run as run_engine
from .errors import CertificationError, DomainError, ParameterError, ValidationError
from .guidance import certify
from .scenario import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CERTIFICATION = 3
EXIT_DOMAIN = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salvo3d",
        description=(
            "Multi-interceptor salvo simulator: predefined-time time-to-go "
            "consensus over switching communication graphs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write results")
    p_run.add_argument("--config", required=True,
                       help="scenario JSON file or preset name")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--force", action="store_true",
                       help="run even if gain certification fails")

    p_cert = sub.add_parser("certify", help="check the consensus gain conditions")
    p_cert.add_argument("--config", required=True,
                        help="scenario JSON file or preset name")

    p_rep = sub.add_parser("reproduce", help="run a canonical engagement preset")
    p_rep.add_argument("figure", choices=batch.REPRODUCE_TARGETS)
    p_rep.add_argument("--out", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a declarative batch of scenarios")
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON file")
    p_sweep.add_argument("--out", required=True, help="output directory")

    p_val = sub.add_parser("validate", help="load and validate a scenario")
    p_val.add_argument("--config", required=True,
                       help="scenario JSON file or preset name")
    return parser


def _cmd_run(args) -> int:
    sc = load_scenario(args.config)
    report = certify(sc.guidance, sc.bounds())
    if not report.passes and not args.force:
        print(report.to_text())
        return EXIT_CERTIFICATION
    record = run_engine(sc, check_certification=not args.force)
    bundle = results.write_bundle(
        record, args.out, certification=batch._cert_dict(report)
    )
    print(f"wrote {bundle['csv']}")
    print(f"wrote {bundle['summary']}")
    if record.failure:
        print(f"run aborted early: {record.failure}")
        return EXIT_DOMAIN
    _print_metrics(bundle["metrics"])
    return EXIT_OK


def _print_metrics(metrics: dict) -> None:
    print(f"consensus time: {metrics['consensus_time']} s")
    print(f"impact times: {metrics['impact_times']}")
    print(f"impact spread: {metrics['impact_spread']} s")
    print(f"joint cost: {metrics['joint_cost']:.4f}")


def _cmd_certify(args) -> int:
    sc = load_scenario(args.config)
    report = certify(sc.guidance, sc.bounds())
    print(report.to_text())
    return EXIT_OK if report.passes else EXIT_CERTIFICATION


def _cmd_reproduce(args) -> int:
    out = batch.reproduce(args.figure, out_dir=args.out)
    for bundle in out["bundles"]:
        print(f"wrote {bundle['summary']}")
    if "normalized_joint_costs" in out:
        print("normalized joint costs:",
              json.dumps(out["normalized_joint_costs"], indent=2))
    for name, rec in out["records"].items():
        if rec.failure:
            print(f"{name}: run aborted early: {rec.failure}")
            return EXIT_DOMAIN
    return EXIT_OK


def _cmd_sweep(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    out = batch.run_sweep(spec, out_dir=args.out)
    print(json.dumps(out["aggregate"], indent=2))
    return EXIT_OK


def _cmd_validate(args) -> int:
    sc = load_scenario(args.config)
    print(f"scenario {sc.name!r} is valid: {len(sc.interceptors)} interceptors, "
          f"{len(sc.graphs)} topologies, norm {sc.ell}, dt {sc.dt}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "certify": _cmd_certify,
        "reproduce": _cmd_reproduce,
        "sweep": _cmd_sweep,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ValidationError, ParameterError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CertificationError as exc:
        print(f"certification error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
