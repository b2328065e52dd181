"""Command-line interface: ``epimu <command> ...``.

Exit codes: 0 success / property holds, 1 property fails or mismatches
found, 2 input error, 3 budget exceeded.
"""
import argparse
import json
import os
import sys

from . import __version__
from .checker import model_check
from .config import Config
from .distinction import a_distinction, is_a_distinguished
from .errors import BudgetExceeded, InputError, NonMixingError
from .formula import check_nonmixing, parse_formula, to_text
from .hardness import build_reduction, load_sfx, verify_reduction
from .mas import format_mas, format_run, load_mas
from .oracle import (BoundedTree, check_epistemic_diagram, check_plain_diagram,
                     tree_eval_bounded)


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


def _read_formula(arg, require_closed=False):
    """Inline formula text, or the contents of a file if ``arg`` names one."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            arg = fh.read()
    return parse_formula(arg, require_closed=require_closed)


def _config(args):
    kw = {}
    if getattr(args, "budget_states", None):
        kw["state_cap"] = args.budget_states
    if getattr(args, "fuel", None):
        kw["fuel"] = args.fuel
    return Config.from_env(**kw)


def cmd_check(args):
    config = _config(args)
    m = load_mas(args.model)
    f = _read_formula(args.formula, require_closed=True)
    res = model_check(f, m, config)
    out = res.to_json(witness_sets=args.witness_sets, trace=args.trace_ins)
    if args.oracle_depth:
        bt = BoundedTree(m, args.oracle_depth, config.node_cap)
        te = tree_eval_bounded(f, bt, fuel=config.fuel)
        rows = {}
        for q in sorted(m.inits):
            i = bt.node_of((q,))
            decided = (i in te.lower) == (i in te.upper)
            rows[str(q)] = {"decided": decided, "value": (i in te.lower) if decided else None}
        agree = all(r["value"] == res.per_init[int(q)] for q, r in rows.items() if r["decided"])
        out["oracle"] = {"depth": args.oracle_depth, "per_init": rows, "agrees": agree}
    if args.json:
        print(_dump(out))
    else:
        print(f"formula: {to_text(f)}")
        for q, v in sorted(res.per_init.items()):
            print(f"  initial state {q}: {'holds' if v else 'fails'}")
        print(f"verdict: {'holds' if res.holds else 'fails'} "
              f"(systems used: {', '.join(str(t.n) for t in res.ins.tower)} states)")
    return 0 if res.holds else 1


def cmd_nonmixing(args):
    m = load_mas(args.model)
    f = _read_formula(args.formula)
    verdict = check_nonmixing(f, m)
    if args.json:
        print(_dump(verdict.to_json()))
    elif verdict.ok:
        print("ok: formula is non-mixing for this system")
    else:
        v = verdict.violation
        print(f"non-mixing violation at node {v.node_str}: agents {v.a} and {v.b} "
              f"have incomparable observations")
    return 0 if verdict.ok else 1


def cmd_distinguish(args):
    m = load_mas(args.model)
    d = a_distinction(m, args.agent, _config(args).state_cap)
    text = format_mas(d.mas)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.map:
        with open(args.map, "w", encoding="utf-8") as fh:
            fh.write("\n".join(d.map_lines()) + "\n")
    summary = {"agent": args.agent, "states": d.mas.n, "transitions": len(d.mas.trans),
               "source_states": m.n, "distinguished": is_a_distinguished(d.mas, args.agent),
               "map": d.map_lines()}
    if args.json:
        print(_dump(summary))
    elif not args.out:
        sys.stdout.write(text)
    else:
        print(f"{d.mas.n} states written to {args.out}")
    return 0


def _parse_set(text):
    try:
        return frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"bad state set {text!r}; expected e.g. 1,3") from None


def cmd_oracle(args):
    config = _config(args)
    m = load_mas(args.model)
    if args.diagram == "epistemic":
        if not args.agent or args.set is None:
            raise InputError("--diagram epistemic needs --agent and --set")
        rep = check_epistemic_diagram(m, args.agent, _parse_set(args.set), args.depth, config.node_cap)
        out = {"diagram": "epistemic", "agent": args.agent, "depth": args.depth, **rep.to_json()}
        ok = rep.ok
    else:
        if not args.formula:
            raise InputError("--formula is required")
        f = _read_formula(args.formula)
        if args.diagram == "plain":
            rep = check_plain_diagram(f, m, args.depth, config.fuel, config.node_cap)
            out = {"diagram": "plain", "depth": args.depth, **rep.to_json()}
            ok = rep.ok
        else:
            bt = BoundedTree(m, args.depth, config.node_cap)
            te = tree_eval_bounded(f, bt, fuel=config.fuel)
            decided = te.decided(bt)
            out = {"depth": args.depth, "exact_depth": te.exact_depth,
                   "approximants": te.approximants, "nodes": len(bt),
                   "holds": [format_run(r) for r in bt.to_runs(te.lower)],
                   "undecided": [format_run(r) for r in bt.to_runs(bt.all - decided)]}
            ok = True
    print(_dump(out))
    return 0 if ok else 1


def cmd_gen_hard(args):
    expr, alphabet = load_sfx(args.expr)
    red = build_reduction(expr, alphabet)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "model.mas"), "w", encoding="utf-8") as fh:
        fh.write(format_mas(red.mas))
    with open(os.path.join(args.out, "query.muk"), "w", encoding="utf-8") as fh:
        fh.write(to_text(red.query) + "\n")
    out = {"states": red.mas.n, "agents": list(red.mas.agents), "end_atom": red.end_atom,
           "main_init": red.main_init, "phi": to_text(red.phi)}
    if args.json:
        print(_dump(out))
    else:
        print(f"wrote {args.out}/model.mas ({red.mas.n} states) and {args.out}/query.muk")
    return 0


def cmd_verify_reduction(args):
    from .checker import checker_node_oracle
    expr, alphabet = load_sfx(args.expr)
    red = build_reduction(expr, alphabet)
    rep = verify_reduction(expr, alphabet, args.maxlen, args.depth,
                           fallback=checker_node_oracle(red.mas, _config(args)))
    out = {"maxlen": args.maxlen, **rep.to_json()}
    if args.json:
        print(_dump(out))
    else:
        print(f"{rep.words} words checked, {len(rep.mismatches)} mismatches, "
              f"{len(rep.undecided)} undecided")
    return 0 if rep.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="epimu", description="Model checking fixpoint formulas with knowledge operators under perfect recall.")
    p.add_argument("--version", action="version", version=f"epimu {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--budget-states", type=int, default=None, help="cap on constructed states")

    c = sub.add_parser("check", help="model check a closed formula")
    c.add_argument("--model", required=True)
    c.add_argument("--formula", required=True, help="formula file or inline text")
    c.add_argument("--witness-sets", action="store_true")
    c.add_argument("--trace-ins", action="store_true")
    c.add_argument("--oracle-depth", type=int, default=None)
    common(c)
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("nonmixing", help="test membership in the non-mixing fragment")
    c.add_argument("--model", required=True)
    c.add_argument("--formula", required=True)
    common(c)
    c.set_defaults(func=cmd_nonmixing)

    c = sub.add_parser("distinguish", help="build the distinguished system for one agent")
    c.add_argument("--model", required=True)
    c.add_argument("--agent", required=True)
    c.add_argument("--out")
    c.add_argument("--map")
    common(c)
    c.set_defaults(func=cmd_distinguish)

    c = sub.add_parser("oracle", help="bounded unfolding semantics and diagram checks")
    c.add_argument("--model", required=True)
    c.add_argument("--formula")
    c.add_argument("--depth", type=int, default=6)
    c.add_argument("--fuel", type=int, default=None)
    c.add_argument("--diagram", choices=["plain", "epistemic"])
    c.add_argument("--agent")
    c.add_argument("--set")
    common(c)
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("gen-hard", help="generate a hard instance from an expression file")
    c.add_argument("--expr", required=True)
    c.add_argument("--out", required=True)
    common(c)
    c.set_defaults(func=cmd_gen_hard)

    c = sub.add_parser("verify-reduction", help="check the reduction property on short words")
    c.add_argument("--expr", required=True)
    c.add_argument("--maxlen", type=int, default=4)
    c.add_argument("--depth", type=int, default=None)
    common(c)
    c.set_defaults(func=cmd_verify_reduction)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonMixingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
