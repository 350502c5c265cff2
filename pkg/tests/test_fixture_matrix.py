"""
Verdicts for the Tim Berners-Lee example graph under the two example schemas
"""

import pytest

from wikibase_graph import (
    CERN, LONDON, NEW_HAVEN, PRINCESS_OF_ASTURIAS, SPAIN, TIM_BL, UK, VINT_CERF,
)
from wshex_validator import EngineOptions, ValidationStatus, Validator, validate

CONFORMS, FAILS = ValidationStatus.CONFORMING, ValidationStatus.NON_CONFORMING

EXAMPLE_VERDICTS = [
    (UK, 'Country', CONFORMS),
    (SPAIN, 'Country', CONFORMS),
    (CERN, 'Organization', CONFORMS),
    (LONDON, 'Place', CONFORMS),
    (PRINCESS_OF_ASTURIAS, 'Award', CONFORMS),
    (NEW_HAVEN, 'Place', FAILS),
    (VINT_CERF, 'Person', FAILS),
    (TIM_BL, 'Person', FAILS),
]


@pytest.mark.parametrize('node,label,expected', EXAMPLE_VERDICTS)
def test_example_schema(fixture_graph, example_schema, node, label, expected):
    assert Validator(fixture_graph, example_schema).check(node, label) is expected


@pytest.mark.parametrize('node,label,expected', [
    (TIM_BL, 'Person', CONFORMS),
    (VINT_CERF, 'Person', CONFORMS),
    (NEW_HAVEN, 'Place', CONFORMS),
    (LONDON, 'Place', CONFORMS),
])
def test_optional_schema(fixture_graph, optional_schema, node, label, expected):
    assert Validator(fixture_graph, optional_schema).check(node, label) is expected


def test_all_pairs_in_one_report(fixture_graph, example_schema):
    targets = [(node, label) for node, label, _ in EXAMPLE_VERDICTS]
    report = validate(fixture_graph, example_schema, targets)
    assert [entry.status for entry in report] == [expected for _, _, expected in EXAMPLE_VERDICTS]


def test_failure_traces(fixture_graph, example_schema):
    validator = Validator(fixture_graph, example_schema)
    assert validator.explain(NEW_HAVEN, 'Place') == ('OpenShape', 'TripleConstraint(P27)')
    # Vint Cerf has no birth date, so the first EachOf cannot be split
    assert validator.explain(VINT_CERF, 'Person') == ('OpenShape', 'EachOf', 'size')

    trace = validator.explain(TIM_BL, 'Person')
    assert trace and trace[0] == 'OpenShape'


def test_person_fails_through_the_award_qualifier(fixture_graph, example_schema):
    # Tim Berners-Lee shares the award with Vint Cerf, who is not a Person here
    validator = Validator(fixture_graph, example_schema)
    assert validator.check(VINT_CERF, 'Person') is FAILS
    assert validator.check(TIM_BL, 'Person') is FAILS
    assert (TIM_BL, 'Person') not in validator.assignment()


def test_conforming_pairs_support_each_other(fixture_graph, optional_schema):
    validator = Validator(fixture_graph, optional_schema)
    validator.check(TIM_BL, 'Person')
    tau = validator.assignment()
    assert {(TIM_BL, 'Person'), (VINT_CERF, 'Person'), (LONDON, 'Place'), (CERN, 'Organization')} <= tau.pairs
    assert all(validator.holds_under(tau, node, label) for node, label in tau)


def test_pedantic_reading_rejects_employment_periods(fixture_graph, optional_schema):
    validator = Validator(fixture_graph, optional_schema, EngineOptions(literal_each_of_qs=True))
    assert validator.check(TIM_BL, 'Person') is FAILS
    assert validator.check(VINT_CERF, 'Person') is CONFORMS
