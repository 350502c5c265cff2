"""
Open shapes ignore statements about properties they never mention; closed
shapes reject them
"""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from wikibase_graph import BuiltinDatatype, EntityId, Statement, WikibaseGraph, time_value
from wshex_ast import (
    EMPTY, OPEN_ANY_QUALIFIERS, AnyValue, DatatypeConstraint, EachOf, OneOf, Schema, Shape, ShapeRef, Star,
    TripleConstraint, ValueSet,
)
from wshex_validator import ValidationStatus, Validator

NODES = [EntityId.item(n) for n in (1, 2, 3)]
PROPS = [EntityId.prop(n) for n in (1, 2, 3)]
FRESH = EntityId.prop(9)

values = st.sampled_from(NODES + [time_value(1990)])
conditions = st.sampled_from([
    ShapeRef('S'), DatatypeConstraint(BuiltinDatatype.ITEM), DatatypeConstraint(BuiltinDatatype.TIME),
    ValueSet((NODES[1],)), AnyValue(),
])
triple_exprs = st.recursive(
    st.one_of(st.just(EMPTY), st.builds(TripleConstraint, st.sampled_from(PROPS), conditions,
                                        st.just(OPEN_ANY_QUALIFIERS))),
    lambda inner: st.one_of(st.builds(EachOf, inner, inner), st.builds(OneOf, inner, inner), st.builds(Star, inner)),
    max_leaves=4,
)


@st.composite
def statement_lists(draw):
    statements = []
    for node in NODES:
        for prop in draw(st.lists(st.sampled_from(PROPS), max_size=3)):
            statements.append(Statement(f"{node}${len(statements)}", node, prop, draw(values)))
    return statements


def verdict(statements, shape, node):
    return Validator(WikibaseGraph(statements), Schema({'S': shape})).check(node, 'S')


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(statement_lists(), triple_exprs, st.sampled_from(NODES), values)
def test_open_shape_ignores_unmentioned_properties(statements, te, node, value):
    shape = Shape(te)
    extra = Statement('extra', node, FRESH, value)
    assert verdict(statements, shape, node) is verdict(statements + [extra], shape, node)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(statement_lists(), triple_exprs, st.sampled_from(NODES), values)
def test_closed_shape_rejects_unmentioned_properties(statements, te, node, value):
    extra = Statement('extra', node, FRESH, value)
    assert verdict(statements + [extra], Shape(te, closed=True), node) is ValidationStatus.NON_CONFORMING
