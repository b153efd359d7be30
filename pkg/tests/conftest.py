from __future__ import annotations

import random
from fractions import Fraction

import pytest

from tempo_net.net import instantiate, load_bundled

# nets used by the randomized suites
BENCH = ("producer", "scheduling", "tutorial", "net3", "inhibitor")


def sample_valuation(name: str, rng: random.Random) -> dict:
    """A random parameter valuation satisfying the net's initial constraint."""
    if name in ("producer", "producer_safe"):
        hi = 3 if name == "producer_safe" else 10
        return {"a": Fraction(rng.randint(0, 2 * hi), 2) if name == "producer" else Fraction(rng.randint(0, 7), 2)}
    if name == "scheduling":
        return {"a": rng.choice([30, 35, 40, 48, 49, 55, 60, 70])}
    if name == "tutorial":
        a = rng.randint(0, 25)
        return {"a": a, "b": a + rng.randint(0, 10)}
    if name == "net3":
        l = rng.randint(0, 5)
        return {"l": l, "u": l + rng.randint(0, 3)}
    if name == "inhibitor":
        out = {}
        for i in (1, 2, 3):
            lo = rng.randint(0, 4)
            out[f"l{i}"], out[f"u{i}"] = lo, lo + rng.randint(0, 3)
        return out
    if name == "producer_pmark":
        return {"a": 1, "x1": rng.randint(0, 2), "x3": rng.randint(0, 2)}
    raise KeyError(name)


@pytest.fixture(scope="session")
def nets():
    return {n: load_bundled(n) for n in BENCH + ("producer_safe", "producer_pmark")}


@pytest.fixture(scope="session")
def ground():
    def make(name, **vals):
        return instantiate(load_bundled(name), vals)
    return make
