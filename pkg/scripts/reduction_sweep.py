"""Build the hard instance for each expression file and report sizes and verdicts."""
import argparse
import glob
import os
import time

from epimu.checker import checker_node_oracle, model_check
from epimu.hardness import (brute_force_nonempty, build_reduction,
                            complement_depth, expr_text, load_sfx,
                            verify_reduction)

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models", "sfx")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("files", nargs="*")
    ap.add_argument("--maxlen", type=int, default=4)
    args = ap.parse_args()
    files = args.files or sorted(glob.glob(os.path.join(MODELS, "*.sfx")))
    print(f"{'file':<16} {'depth':>5} {'states':>6} {'agents':>6} {'words':>5} "
          f"{'bad':>3} {'empty?':>7} {'checker':>7} {'secs':>6}  expression")
    for path in files:
        t0 = time.perf_counter()
        e, alphabet = load_sfx(path)
        red = build_reduction(e, alphabet)
        rep = verify_reduction(e, alphabet, args.maxlen,
                               fallback=checker_node_oracle(red.mas))
        verdict = model_check(red.query, red.mas).per_init[red.main_init]
        nonempty = brute_force_nonempty(e, alphabet, 8)
        print(f"{os.path.basename(path):<16} {complement_depth(e):>5} {red.mas.n:>6} "
              f"{len(red.mas.agents):>6} {rep.words:>5} {len(rep.mismatches):>3} "
              f"{'no' if nonempty else 'yes':>7} {'holds' if verdict else 'fails':>7} "
              f"{time.perf_counter() - t0:>6.2f}  {expr_text(e)}")


if __name__ == "__main__":
    main()
