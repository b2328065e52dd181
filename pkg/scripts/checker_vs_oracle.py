"""Compare model_check with the bounded unfolding on random instances."""
import argparse
import random
import time

from epimu.checker import checker_node_oracle, model_check
from epimu.formula import alpha_rename, check_nonmixing, free_vars, to_text
from epimu.generators import _random_formula, random_mas
from epimu.oracle import BoundedTree, tree_eval_bounded


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depth", type=int, default=5, help="unfolding depth")
    ap.add_argument("--states", type=int, default=4)
    ap.add_argument("--open-k", action="store_true",
                    help="allow K/P over open arguments (knowledge inside fixpoints)")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    done = nodes = bad = skipped = 0
    t0 = time.perf_counter()
    while done < args.count:
        m = random_mas(rng, max_states=args.states, agents=2, nested_obs=args.open_k)
        f = alpha_rename(_random_formula(rng, 4, sorted(m.atoms), [], m.agents, True,
                                         closed_k=not args.open_k))
        if free_vars(f) or not check_nonmixing(f, m).ok:
            skipped += 1
            continue
        done += 1
        model_check(f, m)
        holds = checker_node_oracle(m)
        bt = BoundedTree(m, args.depth)
        te = tree_eval_bounded(f, bt)
        for i in te.decided(bt):
            nodes += 1
            if holds(f, bt.runs[i]) != (i in te.lower):
                bad += 1
                print("disagreement:", to_text(f), bt.runs[i])
    print(f"{done} formulas, {nodes} decided nodes compared, {bad} disagreements, "
          f"{skipped} skipped, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
