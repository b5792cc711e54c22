"""Random small instances for property and oracle tests."""

from __future__ import annotations

import random
from fractions import Fraction

from delibsched.model import (
    ZERO,
    DiscreteDistribution,
    MethodSpec,
    ProblemInstance,
    Variant,
    parse_instance,
)

DEMO_TEXT = """\
alt_cost 2
horizon 3
method M1
  exec  0:2/5 1:1/2 2:1/10
end
method M2
  exec  0:1/2 1:1/10 2:2/5
end
"""


def demo_instance(**changes) -> ProblemInstance:
    inst = parse_instance(DEMO_TEXT)
    return inst.replace(**changes) if changes else inst


def random_pmf(rng: random.Random, values: range, max_support: int) -> DiscreteDistribution:
    size = rng.randint(1, min(max_support, len(values)))
    support = rng.sample(list(values), size)
    weights = [rng.randint(1, 6) for _ in support]
    total = sum(weights)
    return DiscreteDistribution.from_pairs((v, Fraction(w, total)) for v, w in zip(support, weights))


def random_instance(
    rng: random.Random,
    variant: Variant,
    *,
    max_methods: int = 3,
    max_support: int = 3,
    max_alt: int = 4,
    max_resource: int = 4,
    horizon: int = 3,
) -> ProblemInstance:
    alt = rng.randint(0, max_alt)
    limit = rng.randint(0, max_resource) if variant is Variant.FULL else 0
    methods = []
    for i in range(rng.randint(1, max_methods)):
        exec_cost = random_pmf(rng, range(0, alt + 2), max_support)
        delib = ZERO if variant is Variant.BASIC else random_pmf(rng, range(0, 3), max_support)
        res = random_pmf(rng, range(0, max_resource + 1), max_support) if variant is Variant.FULL else ZERO
        methods.append(MethodSpec(i + 1, f"M{i + 1}", exec_cost, delib, res))
    return ProblemInstance(tuple(methods), alt, limit, horizon, variant)
