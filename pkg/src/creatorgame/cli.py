"""Command-line entry points.

Subcommands: ``simulate`` (episode evaluation to CSV), ``verify-nash``
(ε-Nash certification to JSON), ``welfare`` (optimization programs to JSON),
``bounds`` (bound checkers to CSV), ``sweep`` (built-in or file-defined
parameter sweeps). Every subcommand accepts ``--config`` and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .bestresponse import DeviationSet, verify_epsilon_nash
from .core import load_config, load_profile, naive_effort_cap
from .experiments import load_sweep_spec, run_sweep
from .policies import POLICY_NAMES, make_policy
from .simulator import EXACT, exact_eval_fullinfo, mc_eval
from .welfare import closed_form_2user, min_norm_meet, solve_G, solve_W


def _add_common(parser):
    parser.add_argument("--config", help="path to a JSON game configuration")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed (u64)")


def _add_policy_flags(parser):
    parser.add_argument("--policy", choices=POLICY_NAMES, required=True)
    parser.add_argument("--q", type=float, help="punishment effort threshold")
    parser.add_argument("--g", help="comma-separated direction criterion")
    parser.add_argument("--criteria", help="JSON file with per-producer criteria vectors")


def _build_policy(args, config):
    g = np.array([float(x) for x in args.g.split(",")]) if args.g else None
    criteria = None
    if args.criteria:
        doc = json.loads(Path(args.criteria).read_text())
        criteria = np.asarray(doc["criteria"], dtype=float)
    return make_policy(args.policy, config, q=args.q, g=g, criteria=criteria)


def _write_report_csv(path, report, seed):
    fields = ("round", "metric", "producer", "value", "stderr", "mode", "seed")
    rows = []
    T, P = report.welfare.shape[0], report.utilities.shape[0]
    for j in range(P):
        rows.append((0, "utility", j, report.utilities[j], report.utility_stderr[j],
                     report.mode, seed))
    for t in range(1, T + 1):
        rows.append((t, "welfare", "", report.welfare[t - 1], report.welfare_stderr[t - 1],
                     report.mode, seed))
        rows.append((t, "none_prob", "", report.none_probs[t - 1], 0.0, report.mode, seed))
        for j in range(P):
            rows.append((t, "selection_prob", j, report.selection_probs[t - 1, j],
                         report.selection_stderr[t - 1, j], report.mode, seed))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        writer.writerows(rows)


def _cmd_simulate(args):
    config = load_config(args.config)
    profile = load_profile(args.profile, config)
    policy = _build_policy(args, config)
    if args.mc is not None:
        report = mc_eval(config, policy, profile, args.mc, args.seed)
    else:
        report = exact_eval_fullinfo(config, policy, profile)
    _write_report_csv(args.out, report, args.seed)
    print(f"wrote {args.out} ({report.mode})")


def _parse_devsets(spec: str, config, policy) -> list[DeviationSet]:
    sets = []
    for part in spec.split(","):
        if part == "defect":
            q = getattr(policy, "q", None)
            if q is None:
                raise SystemExit("defect deviations need a punishment policy with --q")
            sets.append(DeviationSet.defect_at_s(q, getattr(policy, "g", None)))
        elif part == "zero":
            sets.append(DeviationSet.zero_one_round())
        elif part.startswith("grid:"):
            n = int(part.split(":", 1)[1])
            cap = 1.2 * naive_effort_cap(config.cost_exponent, config.discount)
            g = getattr(policy, "g", None)
            direction = g if g is not None else np.ones(config.dimension) / math.sqrt(config.dimension)
            sets.append(DeviationSet.norm_grid(np.linspace(0.0, cap, n), [direction]))
        else:
            raise SystemExit(f"unknown deviation set {part!r}")
    return sets


def _cmd_verify_nash(args):
    config = load_config(args.config)
    profile = load_profile(args.profile, config)
    policy = _build_policy(args, config)
    devsets = _parse_devsets(args.devset, config, policy)
    cert = verify_epsilon_nash(config, policy, profile, devsets, epsilon=args.epsilon)
    payload = {
        "verdict": cert.verdict,
        "epsilon": cert.epsilon,
        "max_gain": cert.max_gain,
        "per_producer_gain": cert.per_producer_gain.tolist(),
        "witness_producer": cert.witness_producer,
        "witness_label": cert.witness_label,
        "witness_row": None if cert.witness_row is None else cert.witness_row.tolist(),
        "deviations_checked": cert.deviations_checked,
        "premise": cert.premise,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"{cert.verdict} (max gain {cert.max_gain:.3e}); wrote {args.out}")


def _solution_payload(solution):
    return {
        "criteria": solution.criteria.tolist(),
        "objective": solution.objective,
        "shares": solution.shares.tolist(),
        "residuals": solution.residuals.tolist(),
        "certification": solution.certification,
    }


def _cmd_welfare(args):
    if args.program == "2user":
        if args.c is None or args.beta is None or args.theta is None:
            raise SystemExit("2user needs --c, --beta, and --theta")
        value, regime, ts = closed_form_2user(args.c, args.beta, args.theta)
        payload = {"value": value, "regime": regime, "theta_star": ts}
    else:
        config = load_config(args.config)
        c = args.c if args.c is not None else config.cost_exponent
        beta = args.beta if args.beta is not None else config.discount
        if args.program == "W":
            payload = _solution_payload(solve_W(c, beta, config.users, config.producers,
                                                seed=args.seed))
        elif args.program == "G":
            payload = _solution_payload(solve_G(config.users, config.producers, seed=args.seed))
        else:  # minnorm
            doc = json.loads(Path(args.pbar).read_text())
            target = np.asarray(doc["pbar"], dtype=float)
            p = min_norm_meet(config.users, target)
            payload = {"p": p.tolist(), "norm": float(np.linalg.norm(p))}
    Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"wrote {args.out}")


_CHECKS = {
    "thm31": lambda args: bounds_mod.check_zeroing_deviation(args.trials, args.seed),
    "thm32": lambda args: bounds_mod.check_selection_gap_bound(
        args.trials, args.seed, mode=bounds_mod.BANDIT, replications=args.replications),
    "lemma33": lambda args: bounds_mod.check_selection_gap_bound(args.trials, args.seed),
    "lemmaA1": lambda args: bounds_mod.check_softmax_shift_bound(args.trials, args.seed),
    "appendixE": lambda args: [
        r for P in (3, 5) for beta in (0.5, 0.9)
        for r in bounds_mod.check_appendix_derivatives(P, beta, 0.2, 12)
    ],
}


def _cmd_bounds(args):
    reports = _CHECKS[args.check](args)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("name", "params", "bound", "empirical", "stderr", "margin", "verdict"))
        for r in reports:
            writer.writerow((r.name, json.dumps(r.params, sort_keys=True), r.bound,
                             r.empirical, r.stderr, r.margin, r.verdict))
    bad = [r for r in reports if r.verdict == bounds_mod.VIOLATED]
    print(f"{len(reports)} checks, {len(bad)} violations; wrote {args.out}")
    if bad:
        sys.exit(1)


def _cmd_sweep(args):
    for spec in load_sweep_spec(args.spec):
        csv_path, manifest_path = run_sweep(spec, args.out_dir, args.seed)
        print(f"wrote {csv_path} and {manifest_path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="creatorgame")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evaluate a profile under a policy")
    _add_common(p)
    _add_policy_flags(p)
    p.add_argument("--profile", required=True, help="JSON strategy profile")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", help="exact evaluation (default)")
    group.add_argument("--mc", type=int, help="Monte Carlo with this many replications")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify-nash", help="certify or refute a candidate profile")
    _add_common(p)
    _add_policy_flags(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--devset", default="defect", help="comma list of defect|zero|grid:<n>")
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_verify_nash)

    p = sub.add_parser("welfare", help="solve a welfare program")
    _add_common(p)
    p.add_argument("--program", choices=("W", "G", "2user", "minnorm"), required=True)
    p.add_argument("--c", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--pbar", help="JSON file with a target vector for minnorm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_welfare)

    p = sub.add_parser("bounds", help="run a bound checker")
    _add_common(p)
    p.add_argument("--check", choices=sorted(_CHECKS), required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--replications", type=int, default=20_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sweep", help="run a named or file-defined sweep")
    _add_common(p)
    p.add_argument("--spec", required=True, help="built-in sweep name or JSON spec path")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sweep)

    args = parser.parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
