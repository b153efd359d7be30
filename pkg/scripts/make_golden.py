"""Regenerate nets/golden.json from global-folding runs of the bench matrix.

Golden entries are a regression baseline: the reference constraints that
have published values are checked separately by ``bench --known-results``.
"""
import argparse
import json
import pathlib

from tempo_net.net import load_bundled
from tempo_net.regress import BENCH_NETS, ag_query, ef_query


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-states", type=int, default=3000)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1]
                                         / "src" / "tempo_net" / "nets" / "golden.json"))
    args = ap.parse_args()
    golden = {}
    for name in BENCH_NETS:
        net = load_bundled(name)
        entries = golden[name] = {}
        for place in net.places:
            for n in range(3):
                o = ef_query(net, place, n, "fold-global", args.max_states)
                entries[o.query] = {"verdict": o.verdict, "constraint": o.constraint}
                print(name, o.query, o.verdict, o.constraint, flush=True)
        o = ag_query(net, args.max_states * 10)
        entries[o.query] = {"verdict": o.verdict, "constraint": o.constraint}
        print(name, o.query, o.constraint, flush=True)
    pathlib.Path(args.out).write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
