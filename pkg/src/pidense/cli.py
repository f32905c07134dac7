"""Command line front end.

Subcommands: sat, valid, check, gen, diff, bench.  Machine output is
compact JSON with sorted keys and no timing fields, so fixed-seed runs
are byte-identical; --pretty switches to a human layout that includes
wall time.  Exit codes: 0 for sat/valid/true/agreement, 1 for the
negative verdict, 2 for errors and exhausted budgets.
"""

import argparse
import json
import random
import sys

from .formula import ParseError, neg, parse, random_formula, to_str
from .oracle import differential_run, gen_theorems
from .semantics import (
    KripkeModel,
    gen_dense_model,
    is_dense,
    model_check,
    mono_density_report,
)
from .solver import BudgetExceeded, SolverConfig, solve_sat, solve_valid


def _add_common(p):
    p.add_argument("--mode", choices=("kde", "kde-pi"), default="kde-pi",
                   help="kde is the single-relation logic, kde-pi the indexed family")
    p.add_argument("--pi", type=int, default=1, help="largest modal index")
    p.add_argument("--loop", choices=("seen", "counter"), default="seen")
    p.add_argument("--counter-bound", type=int, default=None)
    p.add_argument("--ccs", choices=("branch", "exhaustive"), default="branch")
    p.add_argument("--trace", action="store_true", help="include the search trace")
    p.add_argument("--trace-dot", action="store_true",
                   help="print the trace as a DOT graph instead of JSON")
    p.add_argument("--budget-steps", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--pretty", action="store_true")


def _config(args):
    mode = "kde-mono" if args.mode == "kde" else "kde-pi"
    counter_bound = args.counter_bound
    if args.loop == "counter" and counter_bound is None:
        counter_bound = 8
    return SolverConfig(
        pi=0 if mode == "kde-mono" else args.pi,
        mode=mode,
        loop_mode=args.loop,
        counter_bound=counter_bound,
        ccs_mode=args.ccs,
        trace=args.trace or args.trace_dot,
        budget_steps=args.budget_steps,
        budget_seconds=args.budget_seconds,
    )


def _parse_formula(text, cfg):
    if cfg.mono:
        return parse(text, mono=True)
    return parse(text, pi=cfg.pi)


def _emit(obj, pretty):
    if pretty:
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _verdict_payload(v, cfg, pretty):
    out = {"result": v.result, "stats": v.stats.to_dict(include_wall_time=pretty)}
    if v.lasso:
        out["lasso"] = v.lasso
    if v.trace is not None:
        out["trace"] = v.trace
    return out


def _trace_to_dot(trace):
    lines = ["digraph search {", '  node [shape=box, fontname="monospace"];']
    counter = [0]

    def esc(s):
        return s.replace("\\", "\\\\").replace('"', '\\"')

    def fresh():
        counter[0] += 1
        return "n%d" % counter[0]

    def set_node(node):
        nid = fresh()
        label = "\\n".join(esc(x) for x in node.get("set", ["?"]))
        lines.append('  %s [label="%s"];' % (nid, label))
        for entry in node.get("diamonds", []):
            did = fresh()
            dlabel = entry.get("diamond", "?")
            lines.append(
                '  %s [label="%s", shape=ellipse];' % (did, esc(dlabel))
            )
            lines.append("  %s -> %s;" % (nid, did))
            if "window" in entry:
                wid = fresh()
                rows = entry["window"].get("rows", [])
                wlabel = "\\n".join(
                    esc("{%s}" % ", ".join(r)) for r in rows
                )
                lines.append('  %s [label="%s"];' % (wid, wlabel or "empty"))
                lines.append("  %s -> %s;" % (did, wid))
            if "next" in entry:
                cid = set_node(entry["next"])
                lines.append("  %s -> %s;" % (did, cid))
        return nid

    root = trace.get("root")
    if root is not None:
        rid = set_node(root)
        lines.append('  start [shape=plaintext, label="%s"];' % esc(trace["formula"]))
        lines.append("  start -> %s;" % rid)
    else:
        lines.append('  start [shape=plaintext, label="%s: %s"];'
                     % (esc(trace["formula"]), trace["result"]))
    lines.append("}")
    return "\n".join(lines)


def _run_decision(args, validity):
    cfg = _config(args)
    try:
        f = _parse_formula(args.formula, cfg)
    except ParseError as e:
        print("parse error: %s" % e, file=sys.stderr)
        return 2
    try:
        v = solve_valid(f, cfg) if validity else solve_sat(f, cfg)
    except BudgetExceeded as e:
        print("budget exceeded: %s" % e, file=sys.stderr)
        return 2
    if args.trace_dot:
        print(_trace_to_dot(v.trace))
    else:
        _emit(_verdict_payload(v, cfg, args.pretty), args.pretty)
    return 0 if v.result in ("sat", "valid") else 1


def cmd_sat(args):
    return _run_decision(args, validity=False)


def cmd_valid(args):
    return _run_decision(args, validity=True)


def cmd_check(args):
    cfg = _config(args)
    try:
        with open(args.model) as fh:
            model = KripkeModel.from_dict(json.load(fh))
        f = _parse_formula(args.formula, cfg)
    except (OSError, ValueError, KeyError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    if args.world not in model.worlds:
        print("error: unknown world %r" % args.world, file=sys.stderr)
        return 2
    if cfg.mono:
        report = mono_density_report(model)
    else:
        report = is_dense(model, cfg.pi)
    truth = model_check(model, args.world, f)
    out = {
        "result": "true" if truth else "false",
        "world": args.world,
        "dense": report.ok,
        "density_violations": len(report.violations),
    }
    _emit(out, args.pretty)
    return 0 if truth else 1


def cmd_gen(args):
    cfg = _config(args)
    rng = random.Random(args.seed)
    if args.kind == "dense-model":
        for _ in range(args.count):
            m = gen_dense_model(
                rng.randrange(10**9), cfg.pi, args.size, ("p", "q", "r"),
                mono=cfg.mono,
            )
            _emit(m.to_dict(), args.pretty)
    elif args.kind == "formulas":
        for _ in range(args.count):
            f = random_formula(
                rng, max_depth=args.depth, pi=cfg.pi, atoms=("p", "q", "r")
            )
            _emit({"formula": to_str(f, cfg.mono)}, args.pretty)
    elif args.kind == "theorems":
        for t in gen_theorems(args.seed, args.count, cfg):
            _emit(
                {"formula": to_str(t.formula, cfg.mono), "steps": len(t.steps)},
                args.pretty,
            )
    return 0


def cmd_diff(args):
    cfg = _config(args)
    rng = random.Random(args.seed)
    records = []
    if args.suite == "k-fragment":
        corpus = [
            random_formula(rng, max_depth=args.depth, pi=0, atoms=("p", "q"))
            for _ in range(args.count)
        ]
        records = differential_run(corpus, cfg, seed=args.seed)
    elif args.suite == "theorems":
        for i, t in enumerate(gen_theorems(args.seed, args.count, cfg)):
            f = neg(t.formula)
            v = solve_sat(f, cfg)
            records.append({
                "index": i,
                "formula": to_str(f, cfg.mono),
                "solver_verdict": v.result,
                "oracle_verdict": "unsat",
                "agree": v.result == "unsat",
                "seed": args.seed,
            })
    elif args.suite == "model-truths":
        i = 0
        while i < args.count:
            m = gen_dense_model(
                rng.randrange(10**9), cfg.pi, rng.randint(2, 5), ("p", "q"),
                mono=cfg.mono,
            )
            f = random_formula(
                rng, max_depth=args.depth, pi=cfg.pi, atoms=("p", "q")
            )
            w = m.worlds[rng.randrange(len(m.worlds))]
            if not model_check(m, w, f):
                continue
            v = solve_sat(f, cfg)
            records.append({
                "index": i,
                "formula": to_str(f, cfg.mono),
                "solver_verdict": v.result,
                "oracle_verdict": "sat",
                "agree": v.result == "sat",
                "seed": args.seed,
            })
            i += 1
    for r in records:
        _emit(r, args.pretty)
    bad = sum(1 for r in records if not r["agree"])
    if bad:
        print("%d disagreement(s)" % bad, file=sys.stderr)
        return 1
    return 0


def _bench_formula(family, j, cfg):
    if family == "density-chain":
        text = "<0>p0" + "".join(" & [0][1]q%d" % i for i in range(j + 1))
        if cfg.mono:
            text = text.replace("<0>", "<>").replace("[0]", "[]").replace("[1]", "[]")
    else:  # nested-diamond
        if cfg.mono:
            text = "<>" * (j + 1) + "p"
        else:
            parts = "".join("<%d>" % (i % (cfg.pi + 1)) for i in range(j + 1))
            text = parts + "p"
    return _parse_formula(text, cfg)


def cmd_bench(args):
    cfg = _config(args)
    rows = []
    for j in range(args.max_size + 1):
        try:
            f = _bench_formula(args.family, j, cfg)
        except ParseError as e:
            print("error: %s" % e, file=sys.stderr)
            return 2
        try:
            v = solve_sat(f, cfg)
        except BudgetExceeded:
            rows.append({"size": j, "result": "budget"})
            break
        from .formula import size as fsize

        rows.append({
            "size": j,
            "formula_size": fsize(f),
            "result": v.result,
            "stats": v.stats.to_dict(include_wall_time=False),
            "wall_time": v.stats.wall_time,
        })
    if args.pretty:
        print("%-5s %-10s %-7s %-12s %-12s %-10s" % (
            "step", "size", "result", "choices", "peak_ccs", "seconds"))
        for r in rows:
            if r["result"] == "budget":
                print("%-5d budget" % r["size"])
                continue
            print("%-5d %-10d %-7s %-12d %-12d %-10.3f" % (
                r["size"], r["formula_size"], r["result"],
                r["stats"]["choice_points"], r["stats"]["peak_live_ccs"],
                r["wall_time"]))
    else:
        for r in rows:
            r = dict(r)
            r.pop("wall_time", None)
            _emit(r, False)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pidense",
        description="decision procedure for bounded-density multimodal logics",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sat", help="decide satisfiability of a formula")
    p.add_argument("formula")
    _add_common(p)
    p.set_defaults(fn=cmd_sat)

    p = sub.add_parser("valid", help="decide validity of a formula")
    p.add_argument("formula")
    _add_common(p)
    p.set_defaults(fn=cmd_valid)

    p = sub.add_parser("check", help="evaluate a formula in a model file")
    p.add_argument("formula")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--world", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("gen", help="generate models, formulas, or theorems")
    p.add_argument("--kind", choices=("dense-model", "formulas", "theorems"),
                   required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--size", type=int, default=4, help="worlds per model")
    p.add_argument("--depth", type=int, default=3, help="max modal depth")
    _add_common(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("diff", help="compare solver against an oracle suite")
    p.add_argument("--suite", choices=("k-fragment", "theorems", "model-truths"),
                   required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p)
    p.set_defaults(fn=cmd_diff)

    p = sub.add_parser("bench", help="run a growing formula family")
    p.add_argument("--family", choices=("density-chain", "nested-diamond"),
                   required=True)
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(fn=cmd_bench)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print("budget exceeded: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
