"""Computationally optimal deliberation policies for independent, uninterruptible methods."""

from .dp import PolicyTable, horizon_bound, lookup, solve, solve_basic, solve_full, solve_with_cost
from .execute import (
    DeliberationState,
    ExecutionTrace,
    Outcome,
    advise_step,
    apply_outcome,
    next_action,
    simulate,
)
from .model import (
    HALT,
    INFINITE,
    Action,
    DiscreteDistribution,
    MethodSpec,
    ProblemInstance,
    Variant,
    expected_value,
    load_instance,
    make_instance,
    parse_instance,
    serialize_instance,
)
from .oracle import DecisionTreePolicy, enumerate_optimal, policy_value_exact

__all__ = [
    "HALT",
    "INFINITE",
    "Action",
    "DecisionTreePolicy",
    "DeliberationState",
    "DiscreteDistribution",
    "ExecutionTrace",
    "MethodSpec",
    "Outcome",
    "PolicyTable",
    "ProblemInstance",
    "Variant",
    "advise_step",
    "apply_outcome",
    "enumerate_optimal",
    "expected_value",
    "horizon_bound",
    "load_instance",
    "lookup",
    "make_instance",
    "next_action",
    "parse_instance",
    "policy_value_exact",
    "serialize_instance",
    "simulate",
    "solve",
    "solve_basic",
    "solve_full",
    "solve_with_cost",
]
