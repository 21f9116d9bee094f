"""Command-line surface: instance generation, evaluation, value-function
checking, policy extraction, solving, canonicalization, and the
correspondence suites.

Exit codes: 0 success, 1 usage or input error, 2 check failure (a decision
command answering "no"). Rationals are printed exactly as num/den; the only
floating-point output is the labeled Monte-Carlo standard error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from . import circuit as ct
from . import mdp as md
from . import oracle
from .bits import parse_bitstring
from .cnf import read_dimacs
from .evaluator import expected_reward_exact, expected_reward_mc
from .policy import load_policy
from .reductions import (
    emajsat_to_bounded_policy,
    forallexists_to_valuefn,
    majsat_to_eval,
    sat_to_next_action,
    unsat_to_consistency,
    write_instance,
)
from .valuefn import (
    InconsistentValueError,
    check_consistency,
    extract_policy,
    load_valuefn,
)
from .verify import SUITES, run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, reserving 2 for check failures
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _emit(args, records: List[tuple], text: str):
    if args.emit == "records":
        for key, value in records:
            print(f"{key}={value}")
    else:
        print(text)


def _resolve_horizon(declared: Optional[int], flag: Optional[int], parser) -> int:
    if flag is not None:
        return flag
    if declared is not None:
        return declared
    parser.error("no horizon: the manifest declares none, pass --horizon")


def _load_mdp_arg(path):
    return md.load_mdp(path)


def build_parser() -> _Parser:
    parser = _Parser(prog="smdp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--emit",
        choices=("text", "records"),
        default="text",
        help="output style: prose lines or key=value records",
    )

    for name in ("gen-satnext", "gen-majsat", "gen-emajsat", "gen-unsatcons", "gen-forall"):
        p = sub.add_parser(name, parents=[common], help=f"generate a {name[4:]} instance")
        p.add_argument("cnf", help="DIMACS-style CNF file")
        p.add_argument("-o", "--out", required=True, help="output directory")
        if name == "gen-satnext":
            p.add_argument("--mode", choices=("compact", "faithful"), default="compact")
        if name in ("gen-emajsat", "gen-forall"):
            p.add_argument("--num-x", type=int, required=True, help="size of the X block")
        if name == "gen-emajsat":
            p.add_argument(
                "--faithful-k",
                action="store_true",
                help="use the literal reward bound 1 instead of the majority bound 1/2",
            )

    p = sub.add_parser("eval", parents=[common], help="exact expected reward of a policy")
    p.add_argument("mdp", help="MDP manifest")
    p.add_argument("policy", help="policy manifest")
    p.add_argument("--horizon", type=int)

    p = sub.add_parser("eval-mc", parents=[common], help="Monte-Carlo reward estimate")
    p.add_argument("mdp")
    p.add_argument("policy")
    p.add_argument("--horizon", type=int)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("value", parents=[common], help="evaluate a value circuit at (state, step)")
    p.add_argument("valuefn", help="value-function manifest")
    p.add_argument("--state", required=True, help="state bits, e.g. 0110")
    p.add_argument("--step", type=int, required=True)

    p = sub.add_parser(
        "check-consistency", parents=[common], help="is the value function realized by some policy?"
    )
    p.add_argument("mdp")
    p.add_argument("valuefn")
    p.add_argument("--horizon", type=int)

    p = sub.add_parser(
        "extract-policy", parents=[common], help="action matching the value recursion at (state, step)"
    )
    p.add_argument("mdp")
    p.add_argument("valuefn")
    p.add_argument("--state", required=True)
    p.add_argument("--step", type=int, required=True)

    p = sub.add_parser("solve", parents=[common], help="optimal value by backward induction")
    p.add_argument("mdp")
    p.add_argument("--horizon", type=int)

    p = sub.add_parser(
        "next-action", parents=[common], help="actions optimal at a state a number of steps before the horizon"
    )
    p.add_argument("mdp")
    p.add_argument("--state", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--action", help="exit 0 iff this action is among the optimal ones")

    p = sub.add_parser("canon", parents=[common], help="canonical full-literal DNF of a netlist")
    p.add_argument("netlist")
    p.add_argument("-o", "--out", help="write the DNF netlist here instead of stdout")

    p = sub.add_parser("verify", parents=[common], help="run a correspondence suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_generate(args) -> int:
    cnf = read_dimacs(args.cnf)
    extra: List[str] = []
    if args.command == "gen-satnext":
        inst = sat_to_next_action(cnf, mode=args.mode)
        if args.mode == "compact":
            extra.append("mode compact: clause block shrunk to the instance clause count")
        sat = oracle.sat_oracle(cnf)
        extra.append(f"expected_action {'S' if sat else 'U'}  [derived: brute-force SAT]")
    elif args.command == "gen-majsat":
        inst = majsat_to_eval(cnf)
        count = oracle.model_count(cnf)
        extra.append(
            f"expected_reward {count}/{1 << cnf.num_vars}  [derived: brute-force model count]"
        )
    elif args.command == "gen-emajsat":
        inst = emajsat_to_bounded_policy(cnf, args.num_x, faithful_k=args.faithful_k)
        ans = oracle.emajsat_oracle(cnf, args.num_x)
        extra.append(f"expected_exists {'yes' if ans else 'no'}  [derived: brute-force enumeration]")
    elif args.command == "gen-unsatcons":
        inst = unsat_to_consistency(cnf)
        unsat = oracle.model_count(cnf) == 0
        extra.append(
            f"expected_{'consistent' if unsat else 'inconsistent'}  [derived: brute-force model count]"
        )
    else:
        inst = forallexists_to_valuefn(cnf, args.num_x)
        ans = oracle.forall_exists_oracle(cnf, args.num_x)
        extra.append(f"expected_exists {'yes' if ans else 'no'}  [derived: brute-force enumeration]")
    write_instance(inst, args.out, extra_expected=extra)
    _emit(
        args,
        [("instance", inst.name), ("directory", args.out), ("horizon", inst.horizon)],
        f"wrote {inst.name} instance (horizon {inst.horizon}) to {args.out}",
    )
    return 0


def _cmd_eval(args, parser) -> int:
    m, declared = _load_mdp_arg(args.mdp)
    policy = load_policy(args.policy)
    horizon = _resolve_horizon(declared, args.horizon, parser)
    report = expected_reward_exact(m, policy, horizon)
    _emit(
        args,
        [("reward", _fmt(report.expected_reward)), ("trajectories", report.trajectory_count)]
        + [(f"depth_{d}", _fmt(v)) for d, v in enumerate(report.per_depth)],
        _fmt(report.expected_reward),
    )
    return 0


def _cmd_eval_mc(args, parser) -> int:
    m, declared = _load_mdp_arg(args.mdp)
    policy = load_policy(args.policy)
    horizon = _resolve_horizon(declared, args.horizon, parser)
    est = expected_reward_mc(m, policy, horizon, samples=args.samples, seed=args.seed)
    _emit(
        args,
        [("estimate", _fmt(est.mean)), ("stderr", repr(est.stderr)), ("samples", est.samples)],
        f"{_fmt(est.mean)} (stderr {est.stderr:.6g}, {est.samples} samples)",
    )
    return 0


def _cmd_value(args) -> int:
    v = load_valuefn(args.valuefn)
    s = parse_bitstring(args.state)
    val = v.value(s, args.step)
    _emit(args, [("value", _fmt(val))], _fmt(val))
    return 0


def _cmd_check_consistency(args, parser) -> int:
    m, declared = _load_mdp_arg(args.mdp)
    if not isinstance(m, md.BoundedActionMdp):
        parser.error("consistency checking needs a bounded-action manifest (successor lines)")
    v = load_valuefn(args.valuefn)
    horizon = _resolve_horizon(declared, args.horizon, parser)
    res = check_consistency(m, v, horizon)
    if res.consistent:
        _emit(args, [("consistent", "yes")], "consistent")
        return 0
    cx = "".join(str(b) for b in res.counterexample)
    _emit(
        args,
        [("consistent", "no"), ("counterexample", cx), ("reason", res.reason)],
        f"inconsistent at state {cx}: {res.reason}",
    )
    return 2


def _cmd_extract_policy(args, parser) -> int:
    m, declared = _load_mdp_arg(args.mdp)
    if not isinstance(m, md.BoundedActionMdp):
        parser.error("policy extraction needs a bounded-action manifest (successor lines)")
    v = load_valuefn(args.valuefn)
    s = parse_bitstring(args.state)
    try:
        a = extract_policy(m, v, v.horizon, s, args.step)
    except InconsistentValueError as exc:
        _emit(args, [("action", "none"), ("reason", str(exc))], f"no action: {exc}")
        return 2
    _emit(args, [("action", m.actions[a]), ("index", a)], m.actions[a])
    return 0


def _cmd_solve(args, parser) -> int:
    m, declared = _load_mdp_arg(args.mdp)
    horizon = _resolve_horizon(declared, args.horizon, parser)
    em = md.expand(m)
    sol = oracle.solve_optimal(em, horizon)
    s0 = tuple(m.initial)
    best = sol.values[s0][horizon]
    opt = tuple(m.actions[a] for a in sol.optimal_actions[s0][horizon])
    _emit(
        args,
        [("value", _fmt(best)), ("optimal_actions", ",".join(opt)), ("states", len(em.states))],
        f"optimal value {_fmt(best)} over {len(em.states)} reachable states; "
        f"optimal first actions: {', '.join(opt)}",
    )
    return 0


def _cmd_next_action(args, parser) -> int:
    m, _ = _load_mdp_arg(args.mdp)
    s = parse_bitstring(args.state)
    acts = oracle.best_next_action(m, args.steps, s)
    names = tuple(m.actions[a] for a in acts)
    _emit(
        args,
        [("optimal_actions", ",".join(names))],
        ", ".join(names),
    )
    if args.action is not None:
        if args.action not in m.actions:
            parser.error(f"unknown action {args.action!r}; choose from {', '.join(m.actions)}")
        return 0 if args.action in names else 2
    return 0


def _cmd_canon(args) -> int:
    c = ct.read_netlist(args.netlist)
    dnf = ct.canonical_dnf(c)
    counts = [ct.count_dnf_terms(dnf, o) for o in range(dnf.num_outputs)]
    text = ct.serialize(dnf)
    if args.out:
        ct.write_netlist(dnf, args.out)
    _emit(
        args,
        [("terms", ",".join(map(str, counts)))]
        + ([("out", args.out)] if args.out else []),
        f"terms per output: {', '.join(map(str, counts))}"
        + (f"\nwrote {args.out}" if args.out else "\n" + text.rstrip("\n")),
    )
    return 0


def _cmd_verify(args) -> int:
    rows = run_suite(args.suite, n=args.n, cases=args.cases, seed=args.seed)
    failures = sum(1 for r in rows if not r.ok)
    if args.emit == "records":
        for r in rows:
            print(f"case={r.case}\texpected={r.expected}\tgot={r.got}\tok={'yes' if r.ok else 'no'}")
        print(f"total={len(rows)}")
        print(f"failures={failures}")
    else:
        width = max(len(r.case) for r in rows)
        for r in rows:
            print(f"{r.case:<{width}}  {'pass' if r.ok else 'FAIL'}  expected: {r.expected}  got: {r.got}")
        print(f"{len(rows) - failures}/{len(rows)} pass")
    return 2 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command.startswith("gen-"):
            return _cmd_generate(args)
        if args.command == "eval":
            return _cmd_eval(args, parser)
        if args.command == "eval-mc":
            return _cmd_eval_mc(args, parser)
        if args.command == "value":
            return _cmd_value(args)
        if args.command == "check-consistency":
            return _cmd_check_consistency(args, parser)
        if args.command == "extract-policy":
            return _cmd_extract_policy(args, parser)
        if args.command == "solve":
            return _cmd_solve(args, parser)
        if args.command == "next-action":
            return _cmd_next_action(args, parser)
        if args.command == "canon":
            return _cmd_canon(args)
        if args.command == "verify":
            return _cmd_verify(args)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"smdp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
