import json

import pytest

from wikibase_graph import (
    BuiltinDatatype, EntityId, Qualifier, Statement, WikibaseGraph, monolingual_value, quantity_value,
    string_value, time_value,
)
from wshex_ast import AnyValue, DatatypeConstraint, ValueSet
from wshex_errors import EngineLimit, SchemaNotWellFormed
from wshex_parser import parse_schema
from wshex_validator import (
    EngineOptions, ReportEntry, ValidationReport, ValidationStatus, Validator, satisfies_cond,
    summarize_report, validate,
)

Q, P = EntityId.item, EntityId.prop
X, Y = Q(1), Q(2)
CONFORMS, FAILS = ValidationStatus.CONFORMING, ValidationStatus.NON_CONFORMING


class Graph:
    """Builds statements with fresh ids"""

    def __init__(self):
        self.statements = []

    def add(self, subject, prop, value, *qualifiers):
        sid = f"{subject}${len(self.statements)}"
        self.statements.append(Statement(sid, subject, P(prop), value,
                                         frozenset(Qualifier(P(p), v) for p, v in qualifiers)))
        return self

    def build(self):
        return WikibaseGraph(self.statements)


def check(text, graph, node=X, label='S', **options):
    return Validator(graph.build(), parse_schema(text), EngineOptions(**options)).check(node, label)


class TestCond:
    def test_value_set(self):
        assert satisfies_cond(ValueSet((Q(5),)), Q(5))
        assert not satisfies_cond(ValueSet((Q(5),)), Q(6))

    def test_datatypes(self):
        time = DatatypeConstraint(BuiltinDatatype.TIME)
        assert satisfies_cond(time, time_value(1955))
        assert not satisfies_cond(time, Q(84))
        assert satisfies_cond(DatatypeConstraint(BuiltinDatatype.ITEM), Q(84))
        assert not satisfies_cond(DatatypeConstraint(BuiltinDatatype.ITEM), P(31))
        assert satisfies_cond(DatatypeConstraint(BuiltinDatatype.PROPERTY), P(31))

    def test_literal_value_sets_compare_values(self):
        members = ValueSet((monolingual_value('x', 'en'), quantity_value(4)))
        assert satisfies_cond(members, quantity_value('4.0'))
        assert not satisfies_cond(members, monolingual_value('x', 'de'))
        assert not satisfies_cond(ValueSet((string_value('x'),)), Q(5))

    def test_any_value(self):
        assert satisfies_cond(AnyValue(), time_value(2000))

    def test_in_a_triple_constraint(self):
        text = "<S> { :P1 [ :Q5 ] }"
        assert check(text, Graph().add(X, 1, Q(5))) is CONFORMS
        assert check(text, Graph().add(X, 1, Q(6))) is FAILS


class TestShapeRules:
    def test_and(self):
        text = "<S> { :P1 Item } AND { :P2 Time }"
        assert check(text, Graph().add(X, 1, Q(5)).add(X, 2, time_value(1))) is CONFORMS
        assert check(text, Graph().add(X, 1, Q(5))) is FAILS

    def test_closed_shape_sees_every_statement(self):
        graph = Graph().add(X, 1, Q(5)).add(X, 2, time_value(1))
        assert check("<S> CLOSED { :P1 Item }", graph) is FAILS
        assert check("<S> { :P1 Item }", graph) is CONFORMS

    def test_open_shape_keeps_statements_of_mentioned_properties(self):
        graph = Graph().add(X, 1, Q(5)).add(X, 1, Q(6))
        assert check("<S> { :P1 Item }", graph) is FAILS

    def test_empty_open_shape_on_unknown_node(self):
        assert check("<S> { }", Graph(), node=Q(99)) is CONFORMS

    def test_empty_closed_shape(self):
        assert check("<S> CLOSED { }", Graph()) is CONFORMS
        assert check("<S> CLOSED { }", Graph().add(X, 1, Q(5))) is FAILS

    def test_reference(self):
        text = "<S> { :P1 @<T> }\n<T> { :P2 Time }"
        assert check(text, Graph().add(X, 1, Y).add(Y, 2, time_value(1))) is CONFORMS
        assert check(text, Graph().add(X, 1, Y)) is FAILS

    def test_shape_on_a_data_value(self):
        # Data values have no statements
        assert check("<S> { :P1 { } }", Graph().add(X, 1, time_value(1))) is CONFORMS
        assert check("<S> { :P1 { :P2 Item } }", Graph().add(X, 1, time_value(1))) is FAILS


class TestTripleExpressionRules:
    def test_each_of_splits_statements_of_one_property(self):
        graph = Graph().add(X, 1, Q(5)).add(X, 1, time_value(1))
        assert check("<S> { :P1 Item ; :P1 Time }", graph) is CONFORMS
        assert check("<S> { :P1 Item ; :P1 Item }", graph) is FAILS

    def test_one_of_either_branch(self):
        text = "<S> { :P1 Item | :P2 Time }"
        assert check(text, Graph().add(X, 1, Q(5))) is CONFORMS
        assert check(text, Graph().add(X, 2, time_value(1))) is CONFORMS
        assert check(text, Graph().add(X, 1, Q(5)).add(X, 2, time_value(1))) is FAILS

    def test_star_on_no_statements(self):
        assert check("<S> { :P1 Item * }", Graph().add(X, 2, Q(5))) is CONFORMS

    def test_star_on_several_statements(self):
        graph = Graph().add(X, 1, Q(5)).add(X, 1, Q(6)).add(X, 1, Q(7))
        assert check("<S> { :P1 Item * }", graph) is CONFORMS
        assert check("<S> { :P1 Item * }", graph.add(X, 1, time_value(1))) is FAILS

    def test_star_of_pairs(self):
        text = "<S> { ( :P1 Item ; :P2 Time ) * }"
        graph = Graph().add(X, 1, Q(5)).add(X, 2, time_value(1)).add(X, 1, Q(6)).add(X, 2, time_value(2))
        assert check(text, graph) is CONFORMS
        assert check(text, graph.add(X, 1, Q(7))) is FAILS

    def test_triple_constraint_needs_a_single_statement_with_its_property(self):
        graph = Graph().add(X, 569, time_value(1955))
        assert check("<S> CLOSED { :P19 Item }", graph) is FAILS

    def test_cardinality_ranges(self):
        text = "<S> { :P1 Item {2,3} }"
        graph = Graph().add(X, 1, Q(5))
        assert check(text, graph) is FAILS
        assert check(text, graph.add(X, 1, Q(6))) is CONFORMS
        assert check(text, graph.add(X, 1, Q(7))) is CONFORMS
        assert check(text, graph.add(X, 1, Q(8))) is FAILS


class TestQualifierRules:
    def test_open_qualifiers_ignore_other_properties(self):
        graph = Graph().add(X, 1, Q(5), (580, time_value(1)), (999, Q(3)))
        assert check("<S> { :P1 Item {| :P580 Time |} }", graph) is CONFORMS

    def test_closed_qualifiers_see_every_qualifier(self):
        graph = Graph().add(X, 1, Q(5), (580, time_value(1)), (999, Q(3)))
        assert check("<S> { :P1 Item [| :P580 Time |] }", graph) is FAILS
        assert check("<S> { :P1 Item [| :P580 Time |] }",
                     Graph().add(X, 1, Q(5), (580, time_value(1)))) is CONFORMS

    def test_each_of_qs_splits_qualifiers(self):
        graph = Graph().add(X, 108, Q(5), (580, time_value(1984)), (582, time_value(1994)))
        assert check("<S> { :P108 Item {| :P580 Time, :P582 Time |} }", graph) is CONFORMS

    def test_each_of_qs_literal_reading(self):
        graph = Graph().add(X, 108, Q(5), (580, time_value(1984)), (582, time_value(1994)))
        text = "<S> { :P108 Item {| :P580 Time, :P582 Time |} }"
        assert check(text, graph, literal_each_of_qs=True) is FAILS

    def test_one_of_qs(self):
        text = "<S> { :P1 Item {| :P580 Time | :P582 Time |} }"
        assert check(text, Graph().add(X, 1, Q(5), (582, time_value(1)))) is CONFORMS
        assert check(text, Graph().add(X, 1, Q(5), (580, time_value(1)), (582, time_value(1)))) is FAILS

    def test_star_qs(self):
        text = "<S> { :P166 Item {| :P1706 Item * |} }"
        assert check(text, Graph().add(X, 166, Q(5))) is CONFORMS
        assert check(text, Graph().add(X, 166, Q(5), (1706, Q(6)), (1706, Q(7)))) is CONFORMS
        assert check(text, Graph().add(X, 166, Q(5), (1706, Q(6)), (1706, time_value(1)))) is FAILS

    def test_empty_qs(self):
        with_qualifier = Graph().add(X, 1, Q(5), (585, time_value(2013)))
        assert check("<S> { :P1 Item }", with_qualifier) is CONFORMS
        assert check("<S> { :P1 Item [| |] }", with_qualifier) is FAILS
        assert check("<S> { :P1 Item [| |] }", Graph().add(X, 1, Q(5))) is CONFORMS

    def test_property_qs_checks_the_value(self):
        assert check("<S> { :P1 Item {| :P580 Time |} }", Graph().add(X, 1, Q(5), (580, Q(6)))) is FAILS

    def test_references_from_qualifiers(self):
        text = "<S> { :P1 Item {| :P1706 @<T> |} }\n<T> { :P2 Time }"
        graph = Graph().add(X, 1, Q(5), (1706, Y))
        assert check(text, graph) is FAILS
        assert check(text, graph.add(Y, 2, time_value(1))) is CONFORMS


class TestFixedPoint:
    def test_cycle_of_references_conforms(self):
        graph = Graph().add(X, 1, Y).add(Y, 1, X)
        assert check("<S> { :P1 @<S> }", graph) is CONFORMS

    def test_failure_propagates_around_a_cycle(self):
        graph = Graph().add(X, 1, Y).add(Y, 1, X).add(X, 2, time_value(1))
        validator = Validator(graph.build(), parse_schema("<S> { :P1 @<S> ; :P2 Time }"))
        assert validator.check(X, 'S') is FAILS
        assert validator.check(Y, 'S') is FAILS

    def test_verdict_is_independent_of_query_order(self):
        graph = Graph().add(X, 1, Y).add(Y, 1, Q(3)).add(Q(3), 1, Y).build()
        schema = parse_schema("<S> { :P1 @<S> }")
        first, second = Validator(graph, schema), Validator(graph, schema)
        assert first.check(X, 'S') is CONFORMS
        second.check(Q(3), 'S')
        assert second.check(X, 'S') is CONFORMS

    def test_assignment_is_a_model(self, fixture_graph, example_schema):
        validator = Validator(fixture_graph, example_schema)
        for node in fixture_graph.subjects():
            for label in example_schema.labels:
                validator.check(node, label)
        tau = validator.assignment()
        assert len(tau) > 0
        for node, label in tau:
            assert validator.holds_under(tau, node, label)

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            Validator(WikibaseGraph(), parse_schema("<S> {}")).check(X, 'T')

    def test_schema_must_be_well_formed(self):
        from wshex_ast import Schema, Shape, ShapeRef, TripleConstraint
        schema = Schema({'S': Shape(TripleConstraint(P(1), ShapeRef('T')))})
        with pytest.raises(SchemaNotWellFormed):
            Validator(WikibaseGraph(), schema)


# Twenty statements that no arrangement into triples can cover
STAR_OF_TRIPLES = "<S> { ( :P1 Item ; :P1 Item ; :P1 Item | :P1 Time ) * }\n<T> { }"


def twenty_statements():
    graph = Graph()
    for n in range(20):
        graph.add(X, 1, Q(100 + n))
    return graph.build()


class TestStepBudget:
    def test_check_raises(self):
        validator = Validator(twenty_statements(), parse_schema(STAR_OF_TRIPLES), EngineOptions(step_budget=1000))
        with pytest.raises(EngineLimit) as info:
            validator.check(X, 'S')
        assert (info.value.node, info.value.label, info.value.steps) == (X, 'S', 1000)

    def test_report_keeps_going(self):
        report = validate(twenty_statements(), parse_schema(STAR_OF_TRIPLES), [(X, 'S'), (X, 'T')],
                          EngineOptions(step_budget=1000))
        assert report.status(X, 'S') is ValidationStatus.ENGINE_LIMIT
        assert report.status(X, 'T') is CONFORMS
        assert report[(X, 'S')].to_text() == (
            "Q1@S: ENGINE-LIMIT (step budget of 1000 exhausted while checking Q1@S)")
        assert json.loads(report.to_json_lines()[0])['status'] == 'engine-limit'


class TestReports:
    def test_validate_targets(self, fixture_graph, example_schema):
        targets = [(Q(145), 'Country'), (Q(29), 'Country'), (Q(42944), 'Organization'), (Q(49145), 'Place')]
        report = validate(fixture_graph, example_schema, targets)
        assert [entry.status for entry in report] == [CONFORMS, CONFORMS, CONFORMS, FAILS]
        assert report.to_text_lines()[:3] == [
            'Q145@Country: CONFORMS', 'Q29@Country: CONFORMS', 'Q42944@Organization: CONFORMS']
        assert report[(Q(49145), 'Place')].trace == ('OpenShape', 'TripleConstraint(P27)')
        assert report.to_text_lines()[3] == 'Q49145@Place: FAILS (OpenShape > TripleConstraint(P27))'

    def test_json_lines(self, fixture_graph, example_schema):
        report = validate(fixture_graph, example_schema, [(Q(49145), 'Place'), (Q(84), 'Place')])
        records = [json.loads(line) for line in report.to_json_lines()]
        assert records == [
            {'node': 'Q49145', 'shape': 'Place', 'status': 'fails',
             'trace': ['OpenShape', 'TripleConstraint(P27)']},
            {'node': 'Q84', 'shape': 'Place', 'status': 'conforms', 'trace': []},
        ]

    def test_frame_and_summary(self, fixture_graph, example_schema):
        report = validate(fixture_graph, example_schema,
                          [(Q(84), 'Place'), (Q(49145), 'Place'), (Q(145), 'Country'), (Q(80), 'Person')])
        frame = report.to_frame()
        assert list(frame.columns) == ['node', 'shape', 'status', 'trace', 'approx']
        assert len(frame) == 4

        summary = summarize_report(report)
        assert summary['targets'] == 4
        assert summary['by_status'] == {'fails': 2, 'conforms': 2}
        assert summary['by_shape']['Place'] == {'conforms': 1, 'fails': 1}
        assert summary['conformance_rate'] == 50.0

    def test_empty_summary(self):
        assert summarize_report(ValidationReport())['targets'] == 0

    def test_unknown_target_label(self, fixture_graph, example_schema):
        with pytest.raises(KeyError):
            validate(fixture_graph, example_schema, [(Q(80), 'Researcher')])

    def test_threads_give_the_same_report(self, fixture_graph, example_schema):
        targets = [(node, label) for node in fixture_graph.subjects() for label in example_schema.labels]
        serial = validate(fixture_graph, example_schema, targets)
        threaded = validate(fixture_graph, example_schema, targets, jobs=4)
        assert serial.to_json_lines() == threaded.to_json_lines()

    def test_entry_text_with_local_flag(self):
        entry = ReportEntry(X, 'S', CONFORMS, approx=True)
        assert entry.to_text() == 'Q1@S: CONFORMS (local-approx)'
        assert entry.to_json()['approx'] is True
