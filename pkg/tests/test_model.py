from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delibsched.model import (
    INFINITE,
    DiscreteDistribution,
    InstanceError,
    ParseError,
    UnboundedHorizonError,
    Variant,
    expected_value,
    mix,
    parse_instance,
    serialize_instance,
)

from gen import DEMO_TEXT, demo_instance


def test_parse_demo():
    inst = parse_instance(DEMO_TEXT)
    assert inst.variant is Variant.BASIC
    assert inst.n_methods == 2
    assert inst.alt_cost == 2 and inst.horizon == 3 and inst.resource_limit == 0
    m1, m2 = inst.methods
    assert m1.exec_cost.support == ((0, Fraction(2, 5)), (1, Fraction(1, 2)), (2, Fraction(1, 10)))
    assert m2.exec_cost.support == ((0, Fraction(1, 2)), (1, Fraction(1, 10)), (2, Fraction(2, 5)))
    assert m1.delib_cost.is_point_mass(0) and m1.resource.is_point_mass(0)


def test_probabilities_must_sum_to_one():
    text = "alt_cost 2\nhorizon 1\nmethod A\n  exec 0:1/2 1:1/3\nend\n"
    with pytest.raises(ParseError, match="probabilities sum to 5/6") as exc:
        parse_instance(text)
    assert exc.value.line == 4


def test_explicit_zero_lines_infer_basic():
    text = "alt_cost 2\nhorizon 2\nmethod A\n exec 0:1/2 2:1/2\n delib 0:1\n res 0:1\nend\n"
    assert parse_instance(text).variant is Variant.BASIC


@pytest.mark.parametrize(
    "text, message",
    [
        ("alt_cost 2\nhorizon 1\n", "no methods"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec -1:1\nend\n", "negative value"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec 1:1/2 1:1/2\nend\n", "duplicate support value 1"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec 1:1\n", "missing 'end'"),
        ("alt_cost 2\nhorizon 1\nmethod A\n delib 1:1\nend\n", "no exec line"),
        ("alt_cost two\nhorizon 1\n", "must be an integer"),
        ("alt_cost 2\nhorizon 0\nmethod A\n exec 1:1\nend\n", "horizon must be positive"),
        ("alt_cost 2\nhorizon 1\nfoo 3\n", "unknown key"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec 1:1\n res 1:1\nend\n", "resource_limit is required"),
        ("alt_cost 2\nhorizon 1\nvariant basic\nmethod A\n exec 1:1\n delib 1:1\nend\n", "variant basic requires"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec 1:0/3 2:1\nend\n", "must be positive"),
        ("alt_cost 2\nhorizon 1\nmethod A\n exec 1\nend\n", "bad pmf entry"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_instance(text)


def test_parse_error_reports_column():
    text = "alt_cost 2\nhorizon 1\nmethod A\n  exec 0:1/2 x:1/2\nend\n"
    with pytest.raises(ParseError) as exc:
        parse_instance(text)
    assert (exc.value.line, exc.value.column) == (4, 14)
    assert "line 4, column 14" in str(exc.value)


def test_infinite_horizon_needs_positive_delib():
    text = "alt_cost 2\nhorizon inf\nmethod A\n exec 0:1\n delib 0:1/2 1:1/2\nend\n"
    with pytest.raises(UnboundedHorizonError):
        parse_instance(text)
    ok = parse_instance(text.replace("0:1/2 1:1/2", "1:1/2 2:1/2"))
    assert ok.horizon == INFINITE and ok.variant is Variant.COST


def test_comments_and_explicit_variant_override():
    text = "# header\nalt_cost 3 # trailing\nhorizon 2\nvariant full\nresource_limit 1\nmethod A\n exec 0:1\nend\n"
    inst = parse_instance(text)
    assert inst.variant is Variant.FULL and inst.resource_limit == 1


@pytest.mark.parametrize(
    "pmf, expected",
    [
        ({0: "2/5", 1: "1/2", 2: "1/10"}, Fraction(7, 10)),
        ({5: 1}, Fraction(5)),
        ({0: "1/2", 1: "1/10", 2: "2/5"}, Fraction(9, 10)),
    ],
)
def test_expected_value(pmf, expected):
    assert expected_value(DiscreteDistribution.from_pairs(pmf.items())) == expected


def test_distribution_validation():
    with pytest.raises(InstanceError, match="sum to"):
        DiscreteDistribution(((0, Fraction(1, 2)),))
    with pytest.raises(InstanceError, match="empty"):
        DiscreteDistribution(())
    with pytest.raises(InstanceError, match="sorted"):
        DiscreteDistribution(((2, Fraction(1, 2)), (1, Fraction(1, 2))))


@st.composite
def distributions(draw, max_value=8):
    values = draw(st.lists(st.integers(0, max_value), min_size=1, max_size=4, unique=True))
    weights = draw(st.lists(st.integers(1, 9), min_size=len(values), max_size=len(values)))
    total = sum(weights)
    return DiscreteDistribution.from_pairs((v, Fraction(w, total)) for v, w in zip(values, weights))


@st.composite
def instances(draw):
    from delibsched.model import MethodSpec, ProblemInstance

    n = draw(st.integers(1, 3))
    methods = tuple(
        MethodSpec(i + 1, f"m{i + 1}", draw(distributions()), draw(distributions(3)), draw(distributions(3)))
        for i in range(n)
    )
    return ProblemInstance(
        methods,
        alt_cost=draw(st.integers(0, 6)),
        resource_limit=draw(st.integers(0, 6)),
        horizon=draw(st.integers(1, 5)),
    )


@settings(max_examples=60)
@given(instances())
def test_round_trip(inst):
    again = parse_instance(serialize_instance(inst))
    assert again == inst
    assert parse_instance(serialize_instance(again)) == again


@settings(max_examples=60)
@given(instances())
def test_parsed_probabilities_sum_to_one(inst):
    for m in parse_instance(serialize_instance(inst)).methods:
        for d in (m.exec_cost, m.delib_cost, m.resource):
            assert sum(d.probs) == 1


@given(distributions(), distributions(), st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_expected_value_is_linear_in_mixtures(d1, d2, alpha):
    assert expected_value(mix(d1, d2, alpha)) == alpha * expected_value(d1) + (1 - alpha) * expected_value(d2)


def test_replace_keeps_validation():
    inst = demo_instance()
    with pytest.raises(InstanceError):
        inst.replace(alt_cost=-1)
