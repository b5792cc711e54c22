"""Brute-force certification of policy tables.

Everything here works on explicit observation histories and the definition of
a run's total cost (deliberation spent plus the cheapest solution held at the
end). Nothing is memoised on a collapsed ``(k, c, r)`` state, so a bug in the
dynamic program cannot be shared with these routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .model import HALT, Action, ProblemInstance, Variant, expected_value

MAX_BRANCHES = 10**7

INTERRUPTED = ("interrupted",)


class OracleSizeError(RuntimeError):
    """The outcome tree is too large to enumerate."""


@dataclass
class DecisionTreePolicy:
    """A history-dependent policy.

    ``children`` maps every outcome key of the node's method to the subtree
    followed after observing it. Keys are ``("done", resource, exec_cost)``
    for a completed evaluation and ``("interrupted",)`` for one that ran out of
    resource. HALT nodes have no children.
    """

    action: Action
    children: dict[tuple, "DecisionTreePolicy"] = field(default_factory=dict)

    def depth(self) -> int:
        if not self.children:
            return 0 if self.action.is_halt else 1
        return 1 + max(child.depth() for child in self.children.values())

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children.values())


@dataclass(frozen=True)
class _History:
    # one (method id, outcome key) per evaluated method
    steps: tuple[tuple[int, tuple], ...] = ()

    def extend(self, method_id: int, key: tuple) -> "_History":
        return _History(self.steps + ((method_id, key),))

    def resource_used(self) -> int:
        return sum(key[1] for _, key in self.steps if key[0] == "done")

    def incumbent(self, alt_cost: int) -> int:
        return min([alt_cost] + [key[2] for _, key in self.steps if key[0] == "done"])

    def interrupted(self) -> bool:
        return any(key == INTERRUPTED for _, key in self.steps)


def outcome_branches(instance: ProblemInstance, method_id: int, resource_left: int) -> list[tuple[tuple, Fraction]]:
    """Joint outcomes of one evaluation with their probabilities."""
    m = instance.method(method_id)
    branches = []
    p_interrupt = Fraction(0)
    for rho, p_rho in m.resource.support:
        if rho > resource_left:
            p_interrupt += p_rho
            continue
        for x, p_x in m.exec_cost.support:
            branches.append((("done", rho, x), p_rho * p_x))
    if p_interrupt:
        branches.append((INTERRUPTED, p_interrupt))
    return branches


def _path_cost(instance: ProblemInstance, history: _History) -> Fraction:
    delib = sum((expected_value(instance.method(mid).delib_cost) for mid, _ in history.steps), Fraction(0))
    return delib + history.incumbent(instance.alt_cost)


def _horizon(instance: ProblemInstance, K: int | None) -> int:
    if K is not None:
        return K
    if not isinstance(instance.horizon, int):
        raise ValueError("pass K explicitly for an infinite-horizon instance")
    return instance.horizon


class _Counter:
    def __init__(self, limit: int):
        self.limit = limit
        self.n = 0

    def tick(self):
        self.n += 1
        if self.n > self.limit:
            raise OracleSizeError(f"outcome tree exceeds {self.limit} branches")


def _walk_tree(instance, node: DecisionTreePolicy, history: _History, prob: Fraction, K: int, counter) -> Iterator[tuple[Fraction, Fraction]]:
    counter.tick()
    if node.action.is_halt or history.interrupted():
        if not node.action.is_halt:
            raise ValueError("policy evaluates a method after an interruption")
        yield prob, _path_cost(instance, history)
        return
    if len(history.steps) >= K:
        raise ValueError(f"policy is deeper than the horizon {K}")
    resource_left = instance.resource_limit - history.resource_used()
    branches = outcome_branches(instance, node.action.method, resource_left)
    keys = {key for key, _ in branches}
    if set(node.children) != keys:
        missing = keys - set(node.children)
        extra = set(node.children) - keys
        raise ValueError(f"policy branches do not match outcomes (missing {sorted(missing)}, extra {sorted(extra)})")
    for key, p in branches:
        yield from _walk_tree(instance, node.children[key], history.extend(node.action.method, key), prob * p, K, counter)


def _walk_table(instance, table, history: _History, prob: Fraction, K: int, counter) -> Iterator[tuple[Fraction, Fraction]]:
    counter.tick()
    k = K - len(history.steps)
    c = history.incumbent(instance.alt_cost)
    r = instance.resource_limit - history.resource_used()
    if k == 0 or history.interrupted():
        yield prob, _path_cost(instance, history)
        return
    action = table.action(k, c, r if table.variant is Variant.FULL else None)
    if action.is_halt:
        yield prob, _path_cost(instance, history)
        return
    for key, p in outcome_branches(instance, action.method, r):
        yield from _walk_table(instance, table, history.extend(action.method, key), prob * p, K, counter)


def policy_value_exact(instance: ProblemInstance, policy, K: int | None = None, *, max_branches: int = MAX_BRANCHES) -> Fraction:
    """Expected total cost of ``policy`` by expanding its whole outcome tree.

    ``policy`` is a :class:`DecisionTreePolicy` or a policy table (anything
    exposing ``variant``, ``K`` and ``action(k, c, r)``). For a table the
    horizon defaults to the table's own.
    """
    counter = _Counter(max_branches)
    if isinstance(policy, DecisionTreePolicy):
        leaves = _walk_tree(instance, policy, _History(), Fraction(1), _horizon(instance, K), counter)
    else:
        leaves = _walk_table(instance, policy, _History(), Fraction(1), policy.K if K is None else K, counter)
    total = Fraction(0)
    mass = Fraction(0)
    for p, cost in leaves:
        total += p * cost
        mass += p
    assert mass == 1, mass
    return total


def tree_size_bound(instance: ProblemInstance, K: int) -> int:
    """Upper bound on histories visited by :func:`enumerate_optimal`."""
    actions = instance.n_methods + (0 if instance.variant is Variant.BASIC else 1)
    branches = max(len(m.resource.support) * len(m.exec_cost.support) + 1 for m in instance.methods)
    fan = actions * branches
    return sum(fan**d for d in range(K + 1))


def enumerate_optimal(instance: ProblemInstance, K: int | None = None, *, max_branches: int = MAX_BRANCHES) -> tuple[Fraction, DecisionTreePolicy]:
    """Minimum expected total cost over all history-dependent policies of depth <= K.

    BASIC instances use exactly K evaluations; the other variants may halt at
    any node. Returns the value and a policy attaining it.
    """
    K = _horizon(instance, K)
    bound = tree_size_bound(instance, K)
    if bound > max_branches:
        raise OracleSizeError(f"enumeration needs up to {bound} histories (limit {max_branches})")
    halt_anywhere = instance.variant is not Variant.BASIC

    def best(history: _History) -> tuple[Fraction, DecisionTreePolicy]:
        depth = len(history.steps)
        if depth == K or history.interrupted():
            return _path_cost(instance, history), DecisionTreePolicy(HALT)
        best_value: Fraction | None = None
        best_node = None
        if halt_anywhere:
            best_value, best_node = _path_cost(instance, history), DecisionTreePolicy(HALT)
        resource_left = instance.resource_limit - history.resource_used()
        for m in instance.methods:
            value = Fraction(0)
            children = {}
            for key, p in outcome_branches(instance, m.id, resource_left):
                v, child = best(history.extend(m.id, key))
                value += p * v
                children[key] = child
            if best_value is None or value < best_value:
                best_value, best_node = value, DecisionTreePolicy(Action(m.id), children)
        return best_value, best_node

    return best(_History())


def fixed_sequence_policy(instance: ProblemInstance, method_ids: list[int]) -> DecisionTreePolicy:
    """Open-loop policy evaluating ``method_ids`` in order whatever happens."""

    def build(history: _History, rest: list[int]) -> DecisionTreePolicy:
        if not rest or history.interrupted():
            return DecisionTreePolicy(HALT)
        mid = rest[0]
        resource_left = instance.resource_limit - history.resource_used()
        children = {
            key: build(history.extend(mid, key), rest[1:])
            for key, _ in outcome_branches(instance, mid, resource_left)
        }
        return DecisionTreePolicy(Action(mid), children)

    return build(_History(), list(method_ids))
