"""AG k-bounded(k) synthesis on each bundled net.

With k=2 the producer and scheduling nets do not converge: every round cuts
a thinner slice off the parameter region (a >= 8, a >= 6, 3a >= 16, ...),
so those runs stop on the round budget.
"""
import argparse
import time

from tempo_net.errors import BudgetExceeded
from tempo_net.linarith import LinExpr
from tempo_net.net import load_bundled
from tempo_net.props import KBounded
from tempo_net.synthesis import ag_synthesis


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nets", nargs="*", default=["producer", "scheduling", "tutorial", "producer_pmark"])
    ap.add_argument("--k", type=int, nargs="*", default=[1])
    ap.add_argument("--max-rounds", type=int, default=25)
    ap.add_argument("--max-states", type=int, default=5000, help="per-round state budget")
    args = ap.parse_args()
    for name in args.nets:
        net = load_bundled(name)
        for k in args.k:
            t = time.perf_counter()
            try:
                r = ag_synthesis(net, KBounded(LinExpr.const(k)), max_rounds=args.max_rounds,
                                 max_states=args.max_states)
                res = f"{r.constraint}  [{r.rounds} rounds, {r.explored} states]"
            except BudgetExceeded as exc:
                res = f"budget exceeded ({exc})"
            print(f"{name:15s} k={k}  {res}  {time.perf_counter() - t:.2f}s", flush=True)


if __name__ == "__main__":
    main()
