"""Time the EF/AG query matrix over the bundled nets, one engine at a time.

Timings are for trend inspection; nothing here asserts a threshold.
"""
import argparse
import sys

from tempo_net.folding import ENGINES
from tempo_net.regress import run_bench, run_known_results


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--engines", default=",".join(e for e in ENGINES if e != "sym2"))
    ap.add_argument("--max-states", type=int, default=2000)
    ap.add_argument("--nets", nargs="*")
    ap.add_argument("--skip-known", action="store_true", help="skip the reference-result checks")
    args = ap.parse_args()
    ok = True
    if not args.skip_known:
        ok &= run_known_results()
    ok &= run_bench(args.engines.split(","), args.max_states, args.nets)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
