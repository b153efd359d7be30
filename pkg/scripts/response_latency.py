"""Smallest bound b for which p2 >= 1 ~> p3 >= 1 holds on ground net3(l, u).

Scans b upward with the symbolic bounded-response check and prints the
first bound that holds for each (l, u) pair.  Pairs with u >= 5 make p2
unbounded, and the check then runs until the state budget.
"""
import argparse

from tempo_net.linarith import parse_constraint
from tempo_net.net import load_bundled
from tempo_net.props import parse_prop
from tempo_net.synthesis import bounded_response


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", nargs="*", default=["0,2", "1,4", "2,3", "3,4", "4,4"])
    ap.add_argument("--max-b", type=int, default=20)
    args = ap.parse_args()
    base = load_bundled("net3")
    for pair in args.pairs:
        l, u = pair.split(",")
        net = base.with_k0(base.k0 & parse_constraint(f"l = {l} and u = {u}", base.resolver()))
        phi, psi = parse_prop("p2 >= 1", net), parse_prop("p3 >= 1", net)
        found = next((b for b in range(args.max_b + 1) if bounded_response(net, phi, psi, b).holds), None)
        print(f"net3({l},{u}): " + (f"worst latency {found}" if found is not None else f"above {args.max_b}"))


if __name__ == "__main__":
    main()
