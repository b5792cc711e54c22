import random
from fractions import Fraction

import pytest

from delibsched.dp import solve, solve_basic
from delibsched.model import HALT, Action, Variant
from delibsched.oracle import (
    DecisionTreePolicy,
    OracleSizeError,
    enumerate_optimal,
    fixed_sequence_policy,
    outcome_branches,
    policy_value_exact,
)

from gen import demo_instance, random_instance


def test_demo_optimum_k3():
    value, witness = enumerate_optimal(demo_instance(), 3)
    assert value == Fraction(153, 1000)
    assert witness.action == Action(2)
    assert policy_value_exact(demo_instance(), witness) == value


def test_demo_optimum_k1():
    value, witness = enumerate_optimal(demo_instance(), 1)
    assert value == Fraction(7, 10)
    assert witness.action == Action(1)


def test_table_policy_value():
    inst = demo_instance()
    assert policy_value_exact(inst, solve_basic(inst, 3)) == Fraction(153, 1000)


def test_always_halt_costs_the_alternative():
    rng = random.Random(5)
    for variant in Variant:
        inst = random_instance(rng, variant)
        assert policy_value_exact(inst, DecisionTreePolicy(HALT)) == inst.alt_cost


def test_fixed_single_evaluation():
    inst = demo_instance()
    assert policy_value_exact(inst, fixed_sequence_policy(inst, [1]), K=1) == Fraction(7, 10)
    assert policy_value_exact(inst, fixed_sequence_policy(inst, [2]), K=1) == Fraction(9, 10)


def test_branches_cover_joint_support():
    inst = random_instance(random.Random(2), Variant.FULL, max_methods=1, max_resource=3)
    for r in range(inst.resource_limit + 1):
        branches = outcome_branches(inst, 1, r)
        assert sum(p for _, p in branches) == 1
        assert len({k for k, _ in branches}) == len(branches)


def test_incomplete_policy_rejected():
    inst = demo_instance()
    with pytest.raises(ValueError, match="do not match"):
        policy_value_exact(inst, DecisionTreePolicy(Action(1), {("done", 0, 0): DecisionTreePolicy(HALT)}))


def test_policy_deeper_than_horizon_rejected():
    inst = demo_instance()
    with pytest.raises(ValueError, match="deeper"):
        policy_value_exact(inst, fixed_sequence_policy(inst, [1, 1]), K=1)


def test_size_guard():
    inst = random_instance(random.Random(0), Variant.FULL, max_methods=3)
    with pytest.raises(OracleSizeError):
        enumerate_optimal(inst, 12)
    with pytest.raises(OracleSizeError):
        policy_value_exact(demo_instance(), fixed_sequence_policy(demo_instance(), [1, 2, 1]), K=3, max_branches=10)


def _random_policy(rng, inst, K):
    def build(history_len, resource_left, stopped):
        if stopped or history_len == K or rng.random() < 0.2:
            return DecisionTreePolicy(HALT)
        mid = rng.randint(1, inst.n_methods)
        children = {}
        for key, _ in outcome_branches(inst, mid, resource_left):
            if key[0] == "done":
                children[key] = build(history_len + 1, resource_left - key[1], False)
            else:
                children[key] = DecisionTreePolicy(HALT)
        return DecisionTreePolicy(Action(mid), children)

    return build(0, inst.resource_limit, False)


@pytest.mark.parametrize("variant", [Variant.COST, Variant.FULL])
def test_optimum_beats_random_policies(variant):
    rng = random.Random(11)
    for _ in range(20):
        inst = random_instance(rng, variant)
        best, _ = enumerate_optimal(inst, 3)
        for _ in range(5):
            assert best <= policy_value_exact(inst, _random_policy(rng, inst, 3), K=3)


@pytest.mark.parametrize("variant", list(Variant))
def test_state_policies_reach_the_history_optimum(variant):
    # the best policy over full histories is matched by one reading only (k, c, r)
    rng = random.Random(23)
    for _ in range(15):
        inst = random_instance(rng, variant)
        table = solve(inst)
        assert policy_value_exact(inst, table) == enumerate_optimal(inst)[0]


def test_more_resource_never_hurts_oracle():
    rng = random.Random(17)
    for _ in range(15):
        inst = random_instance(rng, Variant.FULL, max_resource=3)
        values = [enumerate_optimal(inst.replace(resource_limit=r), 2)[0] for r in range(5)]
        assert values == sorted(values, reverse=True)
