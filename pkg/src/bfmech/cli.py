"""Command-line harness: generate instances, run mechanisms, sweep and audit."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import fileio
from .algorithms import ls_greedy
from .exhaustive import brute_opt
from .generators import FAMILIES, GeneratorParams, family_stream, generate
from .greedy import greedy_enum_sm, greedy_sm
from .local_search import approx_local_search
from .lp import CutLpModel, F_value, pipage_round, solve_lp
from .mechanisms import (
    FracMechanismParams,
    det_mech_symsm_frac_spec,
    execute,
    registry,
)
from .oracle import CANARY, GREEDY_SM, RATIO_BOUNDS, SweepResult, audit_mechanism, \
    measure_instances, ratio_of

ALGORITHMS = ("ls-greedy", "greedy-sm", "greedy-enum-sm")


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from None


def _mechanisms(args) -> dict:
    mechs = registry(args.eps if args.eps is not None else Fraction(1, 200))
    if args.rho is not None:
        eps = args.eps if args.eps is not None else Fraction(1)
        mechs["det-mech-symsm-frac"] = det_mech_symsm_frac_spec(FracMechanismParams.generic(args.rho, eps))
    mechs["canary-pay-bid"] = CANARY
    mechs["greedy-sm"] = GREEDY_SM
    return mechs


def _fmt(x) -> str:
    return fileio.fmt(x)


def _set(S) -> str:
    return "{" + ",".join(str(i) for i in sorted(S)) + "}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such instance file: {path}")
    return fileio.load(p)


def cmd_generate(args) -> int:
    params = GeneratorParams(edge_prob=args.edge_prob, budget_fraction=args.budget_fraction,
                             unit_weights=args.unit_weights, clauses=args.clauses)
    if args.n < 1:
        print("error: n must be at least 1", file=sys.stderr)
        return 2
    if args.count == 1:
        inst = generate(args.family, args.n, args.seed, params)
        _emit(fileio.dumps(inst), args.out)
        return 0
    if not args.out:
        print("error: --out DIR is required with --count > 1", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, inst in enumerate(family_stream(args.family, args.count, args.seed, (1, args.n), params)):
        fileio.save(inst, out / f"{args.family}-{k:04d}.json")
    return 0


def _run_algorithm(name: str, inst, args) -> tuple[frozenset, str]:
    if name == "ls-greedy":
        S, rep = ls_greedy(inst, args.eps if args.eps is not None else Fraction(1, 10))
        return S, f"side {rep.chosen}"
    if name == "greedy-sm":
        return greedy_sm(inst, inst.budget / 2)[0], "greedy"
    return greedy_enum_sm(inst), "enumeration"


def cmd_run(args) -> int:
    inst = _load(args.instance)
    opt = brute_opt(inst)[0]
    lines = []
    if args.target in ALGORITHMS:
        S, tag = _run_algorithm(args.target, inst, args)
        value, ok = inst.v(S), inst.total_cost(S) <= inst.budget
        lines.append(f"{args.target}: S={_set(S)} value={_fmt(value)} cost={_fmt(inst.total_cost(S))} ({tag})")
    else:
        mechs = _mechanisms(args)
        if args.target not in mechs:
            print(f"error: unknown mechanism {args.target!r}", file=sys.stderr)
            return 2
        outcome = execute(mechs[args.target], inst, args.mode, args.seed)
        value = outcome.expectation
        ok = True
        for p, res in outcome.branches:
            paid = res.total_payment
            ok &= paid <= inst.budget and all(res.payments[i] >= inst.cost(i) for i in res.winners)
            pays = " ".join(f"{i}:{_fmt(res.payments[i])}" for i in sorted(res.winners))
            lines.append(f"p={_fmt(p)} winners={_set(res.winners)} value={_fmt(res.value)} "
                         f"payments=[{pays}] branch={res.branch_tag}")
    r = ratio_of(opt, value)
    bound = RATIO_BOUNDS.get(args.target)
    if bound is not None:
        ok &= r is not None and r <= bound
    lines.append(f"opt={_fmt(opt)} value={_fmt(value)} ratio={'inf' if r is None else _fmt(r)} "
                 f"checks={'pass' if ok else 'fail'}")
    print("\n".join(lines))
    if args.out:
        res = SweepResult([{
            "instance_digest": fileio.digest(inst), "mechanism": args.target, "n": inst.n,
            "B": _fmt(inst.budget), "opt": _fmt(opt), "value_or_expectation": _fmt(value),
            "ratio": "inf" if r is None else _fmt(r), "all_checks_passed": "true" if ok else "false",
            **({"ratio_decimal": "inf" if r is None else f"{float(r):.{args.decimals}f}"}
               if args.decimals is not None else {})}], None, 0)
        Path(args.out).write_text(res.to_csv(), encoding="utf-8")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    mechs = _mechanisms(args)
    if args.target not in mechs:
        print(f"error: unknown mechanism {args.target!r}", file=sys.stderr)
        return 2
    params = GeneratorParams(edge_prob=args.edge_prob, budget_fraction=args.budget_fraction,
                             unit_weights=args.unit_weights, clauses=args.clauses)
    stream = family_stream(args.family, args.count, args.seed, (args.n_min, args.n_max), params)
    res = measure_instances(mechs[args.target], stream, audit=args.audit, decimals=args.decimals)
    _emit(res.to_csv(), args.out)
    worst = "n/a" if not res.rows else ("inf" if res.worst_ratio is None else _fmt(res.worst_ratio))
    bound = RATIO_BOUNDS.get(args.target)
    print(f"{args.target}: {len(res.rows)} instances, worst ratio {worst}"
          f"{'' if bound is None else f' (bound {_fmt(bound)})'}, violations {res.violations}",
          file=sys.stderr)
    return 0 if res.violations == 0 else 1


def cmd_audit(args) -> int:
    inst = _load(args.instance)
    mechs = _mechanisms(args)
    if args.target not in mechs:
        print(f"error: unknown mechanism {args.target!r}", file=sys.stderr)
        return 2
    rep = audit_mechanism(mechs[args.target], inst, ratio_bound=RATIO_BOUNDS.get(args.target))
    lines = [f"instance {rep.instance_digest} mechanism {rep.mechanism}"]
    for c in rep.checks:
        lines.append(f"{c.prop}: {c.verdict}" + ("" if c.witness is None else f" witness={c.witness}"))
    r = rep.measured_ratio
    lines.append(f"opt={_fmt(rep.opt)} expectation={_fmt(rep.value)} ratio={'inf' if r is None else _fmt(r)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if rep.passed else 1


def cmd_lp(args) -> int:
    inst = _load(args.instance)
    if inst.valuation.kind != "cut":
        print("error: the LP relaxation needs a cut instance", file=sys.stderr)
        return 2
    model = CutLpModel.from_instance(inst, inst.agents, inst.budget)
    sol = solve_lp(model, method=args.method)
    lines = [f"opt_f={_fmt(sol.objective)} method={sol.method}",
             "x=[" + ", ".join(_fmt(x) for x in sol.x) + "]"]
    if args.round:
        state, steps = pipage_round(model, sol.x)
        lines.append(f"pipage steps={len(steps)} F={_fmt(F_value(model, state.x))}")
        lines.append("rounded=[" + ", ".join(_fmt(x) for x in state.x) + "]")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_localsearch(args) -> int:
    inst = _load(args.instance)
    res = approx_local_search(inst, args.eps if args.eps is not None else 0)
    _emit(f"S={_set(res.S)} value={_fmt(inst.v(res.S))} moves={res.iterations} "
          f"queries={res.oracle_queries}\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bfmech", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, instance=True, target=True):
        if target:
            p.add_argument("target", help="mechanism or algorithm id")
        if instance:
            p.add_argument("instance", help="instance JSON file")
        p.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--eps", type=_rational)
        p.add_argument("--rho", type=_rational)
        p.add_argument("--out")
        p.add_argument("--decimals", type=int)

    def gen_opts(p):
        p.add_argument("--edge-prob", type=float, default=0.5)
        p.add_argument("--budget-fraction", type=_rational, default=Fraction(1, 3))
        p.add_argument("--unit-weights", action="store_true")
        p.add_argument("--clauses", type=int, default=3)

    g = sub.add_parser("generate", help="write seeded random instances")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out")
    gen_opts(g)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run a mechanism or algorithm on one instance")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="ratio sweep over a generated family (CSV)")
    common(s, instance=False)
    s.add_argument("--family", choices=FAMILIES, required=True)
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--n-max", type=int, default=10)
    s.add_argument("--audit", action="store_true", help="also run truthfulness audits")
    gen_opts(s)
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("audit", help="truthfulness, IR and budget audit on one instance")
    common(a)
    a.set_defaults(func=cmd_audit)

    lp = sub.add_parser("lp", help="solve the cut LP relaxation, optionally pipage-round")
    common(lp, target=False)
    lp.add_argument("--method", choices=("hull", "simplex"), default="hull")
    lp.add_argument("--round", action="store_true")
    lp.set_defaults(func=cmd_lp)

    ls = sub.add_parser("localsearch", help="approximate local search")
    common(ls, target=False)
    ls.set_defaults(func=cmd_localsearch)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, fileio.InstanceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
