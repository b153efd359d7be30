from __future__ import annotations

from fractions import Fraction

import pytest

from tempo_net.linarith import equivalent
from tempo_net.net import (Bag, NetError, bundled_names, format_net, instantiate, load_bundled, net_from_json,
                           net_to_json, parse_net, resolve_net)

TOY = """
net toy
param a
place p q
trans t : p -> q in [1, a]
trans back : q -> p inhibit p in [0, inf]
marking p=2
constraint a <= 5
"""


def test_parse_toy():
    n = parse_net(TOY)
    assert n.places == ("p", "q")
    assert n.labels == ("t", "back")
    assert n.transition("back").interval.upper is None
    assert n.initial_marking["p"] == 2
    # interval non-emptiness is folded into the initial constraint
    assert "1 <= a" in str(n.k0)


@pytest.mark.parametrize("name", bundled_names())
def test_format_roundtrip(name):
    n = load_bundled(name)
    m = parse_net(format_net(n))
    assert m.places == n.places and m.labels == n.labels
    assert equivalent(m.k0, n.k0)
    assert format_net(m) == format_net(n)


@pytest.mark.parametrize("name", bundled_names())
def test_json_roundtrip(name):
    n = load_bundled(name)
    assert format_net(net_from_json(net_to_json(n))) == format_net(n)


@pytest.mark.parametrize("text, needle", [
    ("place p\ntrans t : p -> p in [0, 1]", "missing 'net"),
    ("net x\nplace p\ntrans t : p -> r in [0, 1]", "undeclared place"),
    ("net x\nplace p\ntrans t : p -> p", "interval"),
    ("net x\nplace p\ntrans t : p -> p in [2, 1]", "empty"),
    ("net x\nplace p\n", "at least one transition"),
    ("net x\nparam p\nplace p\ntrans t : p -> p in [0, 1]", "both as place and parameter"),
    ("net x\nparam a\nplace p\ntrans t : p -> p in [0, a]\nconstraint a < 0", "unsatisfiable"),
    ("net x\nplace p\nfrobnicate\ntrans t : p -> p in [0, 1]", "unknown keyword"),
])
def test_parse_errors(text, needle):
    with pytest.raises(NetError, match=needle):
        parse_net(text)


def test_error_carries_line_number():
    with pytest.raises(NetError) as exc:
        parse_net("net x\nplace p\ntrans t : p -> zz in [0, 1]")
    assert exc.value.line == 3


def test_instantiate_checks_valuation():
    n = load_bundled("scheduling")
    g = instantiate(n, {"a": 40})
    assert g.lower[g.index("r2")] == 80
    with pytest.raises(NetError):
        instantiate(n, {"a": 10})
    with pytest.raises(NetError):
        instantiate(n, {})
    with pytest.raises(NetError):
        instantiate(load_bundled("producer_pmark"), {"a": 1, "x1": Fraction(1, 2), "x3": 0})


def test_inhibitor_semantics_ground():
    g = instantiate(load_bundled("inhibitor"), {"l1": 0, "u1": 1, "l2": 0, "u2": 1, "l3": 0, "u3": 1})
    t2 = g.index("t2")
    assert g.enabled(g.m0, t2)
    assert g.inhibited(g.m0, t2)
    assert not g.active(g.m0, t2)


def test_bag_arithmetic():
    b = Bag({"p": 2, "q": 0})
    assert b.support() == ["p"]
    assert b.is_ground()


def test_resolve_bundled_fallback():
    assert resolve_net("examples/scheduling.tpn").name == "scheduling"
    with pytest.raises((NetError, FileNotFoundError, OSError)):
        resolve_net("no/such/net.tpn")
