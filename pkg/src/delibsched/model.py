"""Problem instances: methods, discrete distributions and the instance file format.

All probabilities are held as :class:`fractions.Fraction` so every downstream
quantity (expected costs, table values) is exact.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

INFINITE = "inf"


class InstanceError(ValueError):
    """Invalid distribution or problem instance."""


class ParseError(InstanceError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class UnboundedHorizonError(InstanceError):
    """An infinite horizon was requested but some method can deliberate for free."""


class Variant(str, enum.Enum):
    BASIC = "basic"
    COST = "cost"
    FULL = "full"


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite pmf over nonnegative integers.

    ``support`` is a tuple of ``(value, probability)`` pairs sorted strictly by
    value; every probability is positive and they sum to exactly one.
    """

    support: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if not self.support:
            raise InstanceError("distribution has empty support")
        prev = None
        total = Fraction(0)
        for value, prob in self.support:
            if not isinstance(value, int) or isinstance(value, bool):
                raise InstanceError(f"support value {value!r} is not an integer")
            if value < 0:
                raise InstanceError(f"negative support value {value}")
            if prev is not None and value <= prev:
                if value == prev:
                    raise InstanceError(f"duplicate support value {value}")
                raise InstanceError("support values must be sorted ascending")
            if not isinstance(prob, Fraction):
                raise InstanceError(f"probability {prob!r} is not a Fraction")
            if prob <= 0:
                raise InstanceError(f"probability of value {value} must be positive, got {prob}")
            prev = value
            total += prob
        if total != 1:
            raise InstanceError(f"probabilities sum to {total}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, Fraction | int | str]]) -> "DiscreteDistribution":
        """Build from unsorted pairs; duplicate values are an error, not merged."""
        items = [(v, Fraction(p)) for v, p in pairs]
        values = [v for v, _ in items]
        if len(set(values)) != len(values):
            dup = next(v for v in values if values.count(v) > 1)
            raise InstanceError(f"duplicate support value {dup}")
        return cls(tuple(sorted(items)))

    @classmethod
    def point(cls, value: int) -> "DiscreteDistribution":
        return cls(((value, Fraction(1)),))

    @property
    def values(self) -> list[int]:
        return [v for v, _ in self.support]

    @property
    def probs(self) -> list[Fraction]:
        return [p for _, p in self.support]

    @property
    def min_value(self) -> int:
        return self.support[0][0]

    @property
    def max_value(self) -> int:
        return self.support[-1][0]

    def is_point_mass(self, value: int | None = None) -> bool:
        if len(self.support) != 1:
            return False
        return value is None or self.support[0][0] == value

    def prob(self, value: int) -> Fraction:
        for v, p in self.support:
            if v == value:
                return p
        return Fraction(0)

    def __contains__(self, value: object) -> bool:
        return any(v == value for v, _ in self.support)

    def to_text(self) -> str:
        parts = []
        for v, p in self.support:
            parts.append(f"{v}:{p.numerator}" if p.denominator == 1 else f"{v}:{p.numerator}/{p.denominator}")
        return " ".join(parts)


def expected_value(d: DiscreteDistribution) -> Fraction:
    return sum((v * p for v, p in d.support), Fraction(0))


def mix(d1: DiscreteDistribution, d2: DiscreteDistribution, alpha: Fraction) -> DiscreteDistribution:
    """The mixture ``alpha*d1 + (1-alpha)*d2`` with merged supports."""
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise InstanceError(f"mixture weight {alpha} outside [0, 1]")
    acc: dict[int, Fraction] = {}
    for v, p in d1.support:
        acc[v] = acc.get(v, Fraction(0)) + alpha * p
    for v, p in d2.support:
        acc[v] = acc.get(v, Fraction(0)) + (1 - alpha) * p
    return DiscreteDistribution(tuple(sorted((v, p) for v, p in acc.items() if p > 0)))


ZERO = DiscreteDistribution.point(0)


@dataclass(frozen=True, order=True)
class Action:
    """Either halt deliberation (``method == 0``) or evaluate method ``method``."""

    method: int

    @property
    def is_halt(self) -> bool:
        return self.method == 0

    def __str__(self) -> str:
        return "H" if self.method == 0 else f"M{self.method}"

    @classmethod
    def parse(cls, text: str) -> "Action":
        if text == "H":
            return HALT
        if text.startswith("M") and text[1:].isdigit() and int(text[1:]) > 0:
            return cls(int(text[1:]))
        raise ValueError(f"bad action {text!r}")


HALT = Action(0)


def method_action(method_id: int) -> Action:
    if method_id < 1:
        raise ValueError(f"method ids start at 1, got {method_id}")
    return Action(method_id)


@dataclass(frozen=True)
class MethodSpec:
    id: int
    name: str
    exec_cost: DiscreteDistribution
    delib_cost: DiscreteDistribution = ZERO
    resource: DiscreteDistribution = ZERO

    @property
    def label(self) -> str:
        return f"M{self.id}"


def infer_variant(methods: Sequence[MethodSpec]) -> Variant:
    if all(m.resource.is_point_mass(0) for m in methods):
        if all(m.delib_cost.is_point_mass(0) for m in methods):
            return Variant.BASIC
        return Variant.COST
    return Variant.FULL


@dataclass(frozen=True)
class ProblemInstance:
    """A method set together with the alternative cost, resource limit and horizon.

    ``horizon`` is a positive integer or :data:`INFINITE`. Construction raises
    :class:`InstanceError` on any violated invariant and
    :class:`UnboundedHorizonError` when an infinite horizon cannot be bounded.
    """

    methods: tuple[MethodSpec, ...]
    alt_cost: int
    resource_limit: int = 0
    horizon: int | str = 1
    variant: Variant = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise InstanceError("instance has no methods")
        for i, m in enumerate(self.methods, start=1):
            if m.id != i:
                raise InstanceError(f"method ids must be 1..M in order; got {m.id} at position {i}")
        if self.alt_cost < 0:
            raise InstanceError(f"alt_cost must be nonnegative, got {self.alt_cost}")
        if self.resource_limit < 0:
            raise InstanceError(f"resource_limit must be nonnegative, got {self.resource_limit}")
        if self.horizon != INFINITE:
            if not isinstance(self.horizon, int) or self.horizon < 1:
                raise InstanceError(f"horizon must be a positive integer or 'inf', got {self.horizon!r}")

        inferred = infer_variant(self.methods)
        if self.variant is None:
            object.__setattr__(self, "variant", inferred)
        else:
            object.__setattr__(self, "variant", Variant(self.variant))
            if self.variant is Variant.BASIC and inferred is not Variant.BASIC:
                raise InstanceError("variant basic requires zero deliberation cost and resource on every method")
            if self.variant is Variant.COST and inferred is Variant.FULL:
                raise InstanceError("variant cost requires zero resource consumption on every method")

        if self.horizon == INFINITE:
            free = [m.label for m in self.methods if m.delib_cost.min_value == 0]
            if free:
                raise UnboundedHorizonError(
                    "unbounded horizon: deliberation cost of " + ", ".join(free) + " can be 0"
                )

    @property
    def n_methods(self) -> int:
        return len(self.methods)

    def method(self, method_id: int) -> MethodSpec:
        if not 1 <= method_id <= len(self.methods):
            raise InstanceError(f"no method M{method_id}")
        return self.methods[method_id - 1]

    def replace(self, **changes) -> "ProblemInstance":
        kw = dict(
            methods=self.methods,
            alt_cost=self.alt_cost,
            resource_limit=self.resource_limit,
            horizon=self.horizon,
            variant=self.variant,
        )
        kw.update(changes)
        return ProblemInstance(**kw)


# ---------------------------------------------------------------------------
# instance file format

_PMF_ENTRY = re.compile(r"^(-?\d+):(\d+)(?:/(\d+))?$")


def _parse_pmf(tokens: list[tuple[str, int]], lineno: int) -> DiscreteDistribution:
    if not tokens:
        raise ParseError("empty distribution", lineno)
    pairs = []
    seen: set[int] = set()
    for tok, col in tokens:
        m = _PMF_ENTRY.match(tok)
        if not m:
            raise ParseError(f"bad pmf entry {tok!r}; expected value:num/den", lineno, col)
        value = int(m.group(1))
        if value < 0:
            raise ParseError(f"negative value {value}", lineno, col)
        if value in seen:
            raise ParseError(f"duplicate support value {value}", lineno, col)
        den = int(m.group(3)) if m.group(3) is not None else 1
        if den == 0:
            raise ParseError("zero denominator", lineno, col)
        prob = Fraction(int(m.group(2)), den)
        if prob <= 0:
            raise ParseError(f"probability of value {value} must be positive", lineno, col)
        seen.add(value)
        pairs.append((value, prob))
    total = sum((p for _, p in pairs), Fraction(0))
    if total != 1:
        raise ParseError(f"probabilities sum to {total}", lineno, tokens[0][1])
    return DiscreteDistribution.from_pairs(pairs)


def _tokenize(line: str) -> list[tuple[str, int]]:
    line = line.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _parse_int(tok: str, lineno: int, col: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {tok!r}", lineno, col) from None
    if value < 0:
        raise ParseError(f"{what} must be nonnegative, got {value}", lineno, col)
    return value


def parse_instance(text: str) -> ProblemInstance:
    """Parse instance-file text into a validated :class:`ProblemInstance`."""
    header: dict[str, object] = {}
    methods: list[MethodSpec] = []
    current: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(raw)
        if not tokens:
            continue
        key, col = tokens[0]
        args = tokens[1:]

        if current is not None:
            if key == "end":
                if args:
                    raise ParseError("unexpected tokens after 'end'", lineno, args[0][1])
                if "exec" not in current:
                    raise ParseError(f"method {current['name']} has no exec line", current["line"])
                methods.append(
                    MethodSpec(
                        id=len(methods) + 1,
                        name=current["name"],
                        exec_cost=current["exec"],
                        delib_cost=current.get("delib", ZERO),
                        resource=current.get("res", ZERO),
                    )
                )
                current = None
            elif key in ("exec", "delib", "res"):
                if key in current:
                    raise ParseError(f"duplicate {key} line", lineno, col)
                current[key] = _parse_pmf(args, lineno)
            else:
                raise ParseError(f"unknown method field {key!r}", lineno, col)
            continue

        if key == "method":
            if len(args) > 1:
                raise ParseError("method takes a single name", lineno, args[1][1])
            name = args[0][0] if args else f"M{len(methods) + 1}"
            current = {"name": name, "line": lineno}
            continue
        if key == "end":
            raise ParseError("'end' outside a method block", lineno, col)
        if key not in ("alt_cost", "resource_limit", "horizon", "variant"):
            raise ParseError(f"unknown key {key!r}", lineno, col)
        if key in header:
            raise ParseError(f"duplicate key {key!r}", lineno, col)
        if len(args) != 1:
            raise ParseError(f"{key} takes exactly one value", lineno, col)
        tok, tcol = args[0]
        if key == "horizon":
            if tok == INFINITE:
                header[key] = INFINITE
            else:
                h = _parse_int(tok, lineno, tcol, "horizon")
                if h < 1:
                    raise ParseError("horizon must be positive", lineno, tcol)
                header[key] = h
        elif key == "variant":
            try:
                header[key] = Variant(tok.lower())
            except ValueError:
                raise ParseError(f"unknown variant {tok!r}; expected basic, cost or full", lineno, tcol) from None
        else:
            header[key] = _parse_int(tok, lineno, tcol, key)

    if current is not None:
        raise ParseError(f"method {current['name']} is missing 'end'", current["line"])
    if not methods:
        raise ParseError("instance has no methods")
    if "alt_cost" not in header:
        raise ParseError("missing alt_cost")
    if "horizon" not in header:
        raise ParseError("missing horizon")

    variant = header.get("variant") or infer_variant(methods)
    if variant is Variant.FULL and "resource_limit" not in header:
        raise ParseError("resource_limit is required for variant full")

    try:
        return ProblemInstance(
            methods=tuple(methods),
            alt_cost=header["alt_cost"],
            resource_limit=header.get("resource_limit", 0),
            horizon=header["horizon"],
            variant=header.get("variant"),
        )
    except UnboundedHorizonError:
        raise
    except InstanceError as exc:
        raise ParseError(str(exc)) from None


def serialize_instance(instance: ProblemInstance) -> str:
    lines = [
        f"alt_cost {instance.alt_cost}",
        f"resource_limit {instance.resource_limit}",
        f"horizon {instance.horizon}",
        f"variant {instance.variant.value}",
    ]
    for m in instance.methods:
        lines += [
            f"method {m.name}",
            f"  exec  {m.exec_cost.to_text()}",
            f"  delib {m.delib_cost.to_text()}",
            f"  res   {m.resource.to_text()}",
            "end",
        ]
    return "\n".join(lines) + "\n"


def load_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def make_instance(
    exec_pmfs: Sequence[Mapping[int, Fraction | str | int]],
    alt_cost: int,
    *,
    delib_pmfs: Sequence[Mapping] | None = None,
    res_pmfs: Sequence[Mapping] | None = None,
    resource_limit: int = 0,
    horizon: int | str = 1,
    variant: Variant | None = None,
) -> ProblemInstance:
    """Shorthand constructor taking ``{value: prob}`` mappings per method."""
    methods = []
    for i, ex in enumerate(exec_pmfs):
        methods.append(
            MethodSpec(
                id=i + 1,
                name=f"M{i + 1}",
                exec_cost=DiscreteDistribution.from_pairs(ex.items()),
                delib_cost=DiscreteDistribution.from_pairs(delib_pmfs[i].items()) if delib_pmfs else ZERO,
                resource=DiscreteDistribution.from_pairs(res_pmfs[i].items()) if res_pmfs else ZERO,
            )
        )
    return ProblemInstance(tuple(methods), alt_cost, resource_limit, horizon, variant)
