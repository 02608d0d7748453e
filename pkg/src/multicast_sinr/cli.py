"""Command-line front end.

Subcommands: check (feasibility verdict), balance (max-min SINR), trace
(boundary CSV), gen (random scenario), verify (randomized property suite),
map-zero-outage (reduce a time-varying instance to a scenario).

Exit codes: 0 feasible / success, 1 infeasible (or a failed verification),
2 boundary, 64 parse or validation error, 70 internal numerical error.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .balancer import power_balance, write_beta_trace
from .feasibility import (
    BOUNDARY,
    ConstraintSet,
    FEASIBLE,
    INFEASIBLE,
    LpOracleError,
    check_constrained,
    check_unconstrained,
    constraints_from_list,
    constraints_to_list,
    lp_oracle,
)
from .model import NetworkModel, SelectionCapError, network_from_dict, network_to_dict
from .region import (
    direction_fan,
    emit_region_csv,
    load_zero_outage,
    read_region_csv,
    trace_boundary,
    zero_outage_map,
    GOLDEN_REL_TOL,
)
from .spectral import NoConvergenceError
from .verify import run_suite

EXIT_FEASIBLE = 0
EXIT_INFEASIBLE = 1
EXIT_BOUNDARY = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70

_STATUS_EXIT = {FEASIBLE: EXIT_FEASIBLE, INFEASIBLE: EXIT_INFEASIBLE, BOUNDARY: EXIT_BOUNDARY}


@dataclass
class Scenario:
    model: NetworkModel
    constraints: Optional[ConstraintSet]
    description: Optional[str]


def load_scenario(path):
    """Read a scenario file: {"network": {...}, "constraints": [...]}.

    A bare network object (the fields themselves at top level) is accepted
    too, with no constraints attached.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "network" in data:
        model = network_from_dict(data["network"])
        cons = data.get("constraints")
        constraints = constraints_from_list(cons) if cons else None
        description = data.get("description")
    else:
        model = network_from_dict(data)
        constraints = None
        description = None
    return Scenario(model=model, constraints=constraints, description=description)


def scenario_to_dict(model, constraints=None, description=None):
    out = {"network": network_to_dict(model)}
    if constraints is not None:
        out["constraints"] = constraints_to_list(constraints)
    if description is not None:
        out["description"] = description
    return out


def _dump_json(data, out_path):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_mu(text, db=False):
    try:
        values = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ValueError(f"could not parse target {text!r}; expected comma-"
                         "separated numbers") from None
    if db:
        values = 10.0 ** (values / 10.0)
    return values


def _fmt(x):
    return format(float(x), ".12g")


def _fmt_vec(v):
    return "[" + ", ".join(_fmt(x) for x in v) + "]"


def cmd_check(args):
    scenario = load_scenario(args.scenario)
    mu = _parse_mu(args.mu, db=args.db)
    if args.constrained:
        if scenario.constraints is None:
            raise ValueError("scenario carries no constraints; drop --constrained")
        verdict = check_constrained(
            scenario.model, mu, scenario.constraints, method=args.method
        )
    else:
        verdict = check_unconstrained(scenario.model, mu, method=args.method)
    print(f"verdict: {verdict.status}")
    print(f"criterion: {_fmt(verdict.criterion_value)}")
    print(f"margin: {_fmt(verdict.margin)}")
    if verdict.witness is not None:
        print(f"witness: {_fmt_vec(verdict.witness)}")
    if args.oracle:
        oracle = lp_oracle(
            scenario.model, mu, scenario.constraints if args.constrained else None
        )
        agree = (verdict.status == FEASIBLE) == (oracle.status == FEASIBLE)
        if verdict.status == BOUNDARY:
            print(f"oracle: {oracle.status} (spectral verdict on the boundary)")
        else:
            print(f"oracle: {oracle.status} ({'agrees' if agree else 'DISAGREES'})")
    return _STATUS_EXIT[verdict.status]


def cmd_balance(args):
    scenario = load_scenario(args.scenario)
    report = power_balance(scenario.model, tol=args.tol)
    print(f"beta_star: {_fmt(report.beta_star)}")
    print(f"p_star: {_fmt_vec(report.p_star)}")
    print(f"iterations: {report.iterations}")
    print(f"converged: {report.converged}")
    print(f"certified: {report.certified}")
    if report.fallback_used:
        print(f"fallback: {report.fallback_used}")
    if args.trace_out:
        write_beta_trace(report, args.trace_out)
        print(f"trace written to {args.trace_out}")
    return EXIT_FEASIBLE


def cmd_trace(args):
    scenario = load_scenario(args.scenario)
    cons = None
    if args.constrained:
        if scenario.constraints is None:
            raise ValueError("scenario carries no constraints; drop --constrained")
        cons = scenario.constraints
    fan = direction_fan(scenario.model.num_sessions, args.fan, seed=args.seed)
    points = trace_boundary(scenario.model, fan, cons=cons, include_embedded=False)
    if args.verify_golden:
        dirs, betas, flags = read_region_csv(args.verify_golden)
        got_dirs = np.array([p.direction for p in points])
        got_betas = np.array([p.beta for p in points])
        got_flags = np.array([p.constrained for p in points])
        if dirs.shape != got_dirs.shape or not np.array_equal(flags, got_flags):
            print("golden mismatch: shape or constraint flags differ")
            return 1
        if np.max(np.abs(dirs - got_dirs)) > GOLDEN_REL_TOL:
            print("golden mismatch: directions differ")
            return 1
        worst = float(np.max(np.abs(betas - got_betas) / np.maximum(betas, 1e-300)))
        if worst > GOLDEN_REL_TOL:
            print(f"golden mismatch: worst relative beta deviation {worst:.3e}")
            return 1
        print(f"golden match: worst relative beta deviation {worst:.3e}")
        return 0
    if args.out:
        emit_region_csv(points, args.out)
    else:
        emit_region_csv(points, sys.stdout)
    return EXIT_FEASIBLE


def _parse_receivers(text, sessions):
    parts = [int(x) for x in text.split(",")]
    if len(parts) == 1:
        return parts * sessions
    if len(parts) != sessions:
        raise ValueError(
            f"--receivers lists {len(parts)} sessions but --sessions is {sessions}"
        )
    return parts


def cmd_gen(args):
    if args.sessions < 1:
        raise ValueError(f"--sessions must be >= 1, got {args.sessions}")
    receivers = _parse_receivers(args.receivers, args.sessions)
    rng = np.random.default_rng(args.seed)
    gains = rng.uniform(1e-6, 1.0, size=(sum(receivers), args.sessions))
    model = NetworkModel(
        num_sessions=args.sessions,
        receivers_per_session=tuple(receivers),
        gains=gains,
        noise_variance=args.sigma2,
    )
    data = scenario_to_dict(
        model, description=f"random scenario, seed {args.seed}"
    )
    _dump_json(data, args.out)
    return EXIT_FEASIBLE


def cmd_verify(args):
    factory = None
    if args.scenario:
        model = load_scenario(args.scenario).model
        factory = lambda rng: model  # noqa: E731
    ok = run_suite(
        trials=args.trials,
        seed=args.seed,
        model_factory=factory,
        inject_bug=args.inject_bug,
    )
    return EXIT_FEASIBLE if ok else 1


def cmd_map_zero_outage(args):
    inst = load_zero_outage(args.instance)
    model = zero_outage_map(inst)
    _dump_json(
        scenario_to_dict(model, description="zero-outage reduction"), args.out
    )
    return EXIT_FEASIBLE


def build_parser():
    parser = argparse.ArgumentParser(
        prog="multicast-sinr",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="feasibility verdict for a target vector")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--mu", required=True, help="comma-separated target SINRs (linear)")
    p.add_argument("--db", action="store_true", help="interpret --mu in decibels")
    p.add_argument("--constrained", action="store_true",
                   help="apply the scenario's power constraints")
    p.add_argument("--method", choices=("iterative", "brute"), default="iterative")
    p.add_argument("--oracle", action="store_true",
                   help="also run the LP oracle and report agreement")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("balance", help="maximize the minimum session SINR")
    p.add_argument("scenario")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--trace-out", help="write the iteration trace CSV here")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("trace", help="trace the feasible-region boundary")
    p.add_argument("scenario")
    p.add_argument("--fan", type=int, default=64, help="number of directions")
    p.add_argument("--seed", type=int, default=0, help="fan seed (5+ sessions)")
    p.add_argument("--constrained", action="store_true")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--verify-golden", metavar="CSV",
                   help="compare against a stored boundary instead of writing")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("gen", help="generate a random scenario")
    p.add_argument("--sessions", type=int, required=True)
    p.add_argument("--receivers", required=True,
                   help="receivers per session: one integer or a comma list")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma2", type=float, default=0.1)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="run the randomized property suite")
    p.add_argument("scenario", nargs="?",
                   help="optional fixed scenario to verify (default: random)")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--inject-bug", action="store_true",
                   help="negate the spectral criterion (harness self-test)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("map-zero-outage",
                       help="reduce a time-varying instance to a scenario")
    p.add_argument("instance", help="zero-outage instance JSON file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_map_zero_outage)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoConvergenceError, SelectionCapError, LpOracleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
