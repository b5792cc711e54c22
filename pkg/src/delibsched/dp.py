"""Backward induction over (steps left, incumbent cost, resource left).

Each layer ``k`` is stored as an integer numerator grid over a single
per-layer denominator. Probabilities are rational with bounded denominators,
so layer ``k`` values always fit the denominator ``D[k-1] * Px * Pr`` (exec
and resource pmf scales) widened to absorb the expected deliberation costs.
Working on integers keeps the arithmetic exact without paying for a gcd on
every operation; :class:`fractions.Fraction` values appear only at lookup.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import (
    INFINITE,
    Action,
    InstanceError,
    ProblemInstance,
    UnboundedHorizonError,
    Variant,
    expected_value,
)
from .render import format_decimal


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Optimal values ``C^k(c[, r])`` and minimising actions for every state.

    ``numerators[k]`` is an object array of Python ints with shape
    ``(alt_cost + 1, resource_limit + 1)`` (the resource axis has length one
    unless the variant is FULL); the value of cell ``(k, c, r)`` is
    ``numerators[k][c, r] / denominators[k]``. ``actions`` holds method ids
    with 0 meaning HALT.
    """

    variant: Variant
    K: int
    alt_cost: int
    resource_limit: int
    numerators: tuple[np.ndarray, ...]
    denominators: tuple[int, ...]
    actions: np.ndarray

    def _index(self, k: int, c: int, r: int | None) -> tuple[int, int, int]:
        if self.variant is Variant.FULL:
            if r is None:
                raise IndexError("resource index required for a FULL table")
        elif r not in (None, 0):
            raise IndexError(f"{self.variant.value} table has no resource axis")
        r = r or 0
        if not 0 <= k <= self.K:
            raise IndexError(f"k={k} outside 0..{self.K}")
        if not 0 <= c <= self.alt_cost:
            raise IndexError(f"c={c} outside 0..{self.alt_cost}")
        r_max = self.resource_limit if self.variant is Variant.FULL else 0
        if not 0 <= r <= r_max:
            raise IndexError(f"r={r} outside 0..{r_max}")
        return k, c, r

    def value(self, k: int, c: int, r: int | None = None) -> Fraction:
        k, c, r = self._index(k, c, r)
        return Fraction(int(self.numerators[k][c, r]), self.denominators[k])

    def action(self, k: int, c: int, r: int | None = None) -> Action:
        k, c, r = self._index(k, c, r)
        return Action(int(self.actions[k, c, r]))

    def root(self) -> tuple[Fraction, Action]:
        r = self.resource_limit if self.variant is Variant.FULL else None
        return lookup(self, self.K, self.alt_cost, r)

    def values(self, k: int) -> np.ndarray:
        """Layer ``k`` as an object array of Fractions, shape ``(C+1, R+1)``."""
        den = self.denominators[k]
        return np.vectorize(lambda n: Fraction(int(n), den), otypes=[object])(self.numerators[k])

    @property
    def r_axis(self) -> range:
        return range(self.resource_limit + 1 if self.variant is Variant.FULL else 1)


def lookup(table: PolicyTable, k: int, c: int, r: int | None = None) -> tuple[Fraction, Action]:
    return table.value(k, c, r), table.action(k, c, r)


def _lcm_all(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v)
    return out


def _scaled_pmf(dist, scale: int) -> list[tuple[int, int]]:
    return [(v, int(p * scale)) for v, p in dist.support]


def _solve(instance: ProblemInstance, K: int, variant: Variant) -> PolicyTable:
    if not isinstance(K, int) or K < 0:
        raise ValueError(f"K must be a nonnegative integer, got {K!r}")
    C = instance.alt_cost
    R = instance.resource_limit if variant is Variant.FULL else 0
    methods = instance.methods
    allow_halt = variant is not Variant.BASIC
    if variant is not Variant.FULL:
        # without a resource axis every evaluation must surely fit
        for m in methods:
            if not m.resource.is_point_mass(0):
                raise InstanceError(f"{m.label} consumes resource; use the full model")

    px = _lcm_all(p.denominator for m in methods for p in m.exec_cost.probs)
    pr = _lcm_all(p.denominator for m in methods for p in m.resource.probs)
    e_delib = [expected_value(m.delib_cost) for m in methods]
    pd = _lcm_all(e.denominator for e in e_delib)

    c_axis = np.arange(C + 1, dtype=object)
    prepared = []
    for m in methods:
        ex = [(x, n) for x, n in _scaled_pmf(m.exec_cost, px) if x <= C]
        below = np.zeros(C + 1, dtype=object)
        for x, n in ex:
            below[x:] += n
        ex_tail = px - below  # P(exec > c) * px
        rs = [(rho, n) for rho, n in _scaled_pmf(m.resource, pr) if rho <= R]
        below = np.zeros(R + 1, dtype=object)
        for rho, n in rs:
            below[rho:] += n
        res_tail = pr - below  # P(resource > r) * pr
        prepared.append((ex, ex_tail, rs, res_tail))

    base = np.empty((C + 1, R + 1), dtype=object)
    base[:, :] = c_axis[:, None]
    numerators = [base]
    denominators = [1]
    actions = np.zeros((K + 1, C + 1, R + 1), dtype=np.int32)

    for k in range(1, K + 1):
        prev, prev_den = numerators[-1], denominators[-1]
        scale = prev_den * px * pr
        den = math.lcm(scale, pd)
        lift = den // scale
        if allow_halt:
            best = base * den
            best_action = np.zeros((C + 1, R + 1), dtype=np.int32)
        else:
            best = None
            best_action = np.zeros((C + 1, R + 1), dtype=np.int32)

        for idx, (ex, ex_tail, rs, res_tail) in enumerate(prepared):
            # completed evaluation: keep c when exec > c, else move to exec value
            after = ex_tail[:, None] * prev
            for x, n in ex:
                after[x:, :] += n * prev[x, :][None, :]
            # average over resource consumed; interruption leaves c in place
            cand = np.outer(c_axis * (prev_den * px), res_tail)
            for rho, n in rs:
                cand[:, rho:] += n * after[:, : R + 1 - rho]
            if lift != 1:
                cand *= lift
            if e_delib[idx]:
                cand += int(e_delib[idx] * den)
            if best is None:
                best = cand
                best_action[:, :] = idx + 1
            else:
                better = np.less(cand, best).astype(bool)
                best = np.where(better, cand, best)
                best_action[better] = idx + 1

        g = math.gcd(den, *(int(v) for v in best.flat))
        if g > 1:
            best = best // g
            den //= g
        numerators.append(best)
        denominators.append(den)
        actions[k] = best_action

    for arr in numerators:
        arr.flags.writeable = False
    actions.flags.writeable = False
    return PolicyTable(
        variant=variant,
        K=K,
        alt_cost=C,
        resource_limit=R,
        numerators=tuple(numerators),
        denominators=tuple(denominators),
        actions=actions,
    )


def solve_basic(instance: ProblemInstance, K: int) -> PolicyTable:
    """Exactly-K table with no deliberation cost; ties go to the lowest method id."""
    if instance.variant is not Variant.BASIC:
        raise InstanceError(f"solve_basic needs a basic instance, got {instance.variant.value}")
    return _solve(instance, K, Variant.BASIC)


def solve_with_cost(instance: ProblemInstance, K: int) -> PolicyTable:
    """At-most-K table charging expected deliberation cost; HALT wins ties."""
    if instance.variant is Variant.FULL:
        raise InstanceError("solve_with_cost cannot handle resource consumption; use solve_full")
    return _solve(instance, K, Variant.COST)


def solve_full(instance: ProblemInstance, K: int) -> PolicyTable:
    """At-most-K table over (c, r) with interruption when resource runs out."""
    return _solve(instance, K, Variant.FULL)


def horizon_bound(instance: ProblemInstance) -> int:
    """Step bound beyond which extra deliberation can only cost more.

    Uses the smallest possible deliberation cost of any method, so every step
    is guaranteed to cost at least that much.
    """
    c_min = min(m.delib_cost.min_value for m in instance.methods)
    if c_min <= 0:
        raise UnboundedHorizonError("unbounded horizon: some method may deliberate at zero cost")
    return max(1, -(-instance.alt_cost // c_min))


def resolve_horizon(instance: ProblemInstance, K: int | str | None = None) -> int:
    K = instance.horizon if K is None else K
    if K == INFINITE:
        return horizon_bound(instance)
    return int(K)


def solve(instance: ProblemInstance, K: int | str | None = None) -> PolicyTable:
    """Solve with the routine matching the instance variant."""
    K = resolve_horizon(instance, K)
    if instance.variant is Variant.BASIC:
        return solve_basic(instance, K)
    if instance.variant is Variant.COST:
        return solve_with_cost(instance, K)
    return solve_full(instance, K)


def table_rows(table: PolicyTable):
    """Rows ``(k, c[, r], value, action)`` in descending k, c, r order."""
    full = table.variant is Variant.FULL
    for k in range(table.K, -1, -1):
        for c in range(table.alt_cost, -1, -1):
            for r in reversed(table.r_axis):
                value = table.value(k, c, r if full else None)
                action = Action(int(table.actions[k, c, r]))
                yield ((k, c, r) if full else (k, c)), value, action


def table_to_csv(table: PolicyTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    full = table.variant is Variant.FULL
    writer.writerow(["k", "c"] + (["r"] if full else []) + ["value_exact", "value_decimal", "action"])
    for key, value, action in table_rows(table):
        writer.writerow(list(key) + [f"{value.numerator}/{value.denominator}", format_decimal(value), str(action)])
    return buf.getvalue()


def table_to_text(table: PolicyTable) -> str:
    """Grid with one column per k (descending) and one row per c, like a printed table."""
    lines = []
    full = table.variant is Variant.FULL
    ks = range(table.K, -1, -1)
    for r in reversed(table.r_axis):
        if full:
            lines.append(f"r = {r}")
        header = ["c \\ k"] + [str(k) for k in ks]
        rows = [header]
        for c in range(table.alt_cost, -1, -1):
            row = [str(c)]
            for k in ks:
                v = table.value(k, c, r if full else None)
                row.append(f"{format_decimal(v)} {Action(int(table.actions[k, c, r]))}")
            rows.append(row)
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        for row in rows:
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip())
        if full:
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"
