import json

import pytest

import dump_ingest
from dump_ingest import (
    IngestMode, IngestOptions, IngestStats, SnakPolicy, decode_datavalue, doc_to_statements, load_graph,
    local_record, parse_entity_line, read_report_lines, stream_validate,
)
from wikibase_graph import BuiltinDatatype, EntityId, fixture_statements, quantity_value
from wshex_errors import MalformedLine, OversizeLine, UnsupportedSnak
from wshex_parser import parse_schema
from wshex_validator import ValidationStatus, Validator, validate

LOCAL = IngestOptions(mode=IngestMode.LOCAL_ONLY)


def entity_line(entity_id, claims=None, comma=True):
    line = json.dumps({'type': 'item', 'id': entity_id, 'claims': claims or {}})
    return line + (',' if comma else '')


def value_claim(prop, statement_id, datavalue, **extra):
    return {'mainsnak': {'snaktype': 'value', 'property': prop, 'datavalue': datavalue},
            'type': 'statement', 'id': statement_id, 'rank': 'normal', **extra}


def item(n):
    return {'type': 'wikibase-entityid', 'value': {'entity-type': 'item', 'numeric-id': n, 'id': f"Q{n}"}}


class TestDecode:
    def test_entity_without_id_field(self):
        raw = {'type': 'wikibase-entityid', 'value': {'entity-type': 'property', 'numeric-id': 31}}
        assert decode_datavalue(raw) == EntityId.prop(31)

    def test_quantity_with_unit(self):
        raw = {'type': 'quantity', 'value': {'amount': '+1.50', 'unit': 'http://www.wikidata.org/entity/Q11573'}}
        value = decode_datavalue(raw)
        assert value.same_value(quantity_value('1.5', EntityId.item(11573)))

    def test_string_typed_by_snak_datatype(self):
        raw = {'type': 'string', 'value': '0000-0001-2345-6789'}
        assert decode_datavalue(raw, 'external-id').datatype is BuiltinDatatype.EXTERNAL_IDENTIFIER
        assert decode_datavalue(raw).datatype is BuiltinDatatype.STRING

    def test_monolingual_and_coordinates(self):
        text = decode_datavalue({'type': 'monolingualtext', 'value': {'text': 'Londres', 'language': 'es'}})
        assert text.datatype is BuiltinDatatype.MONOLINGUAL_TEXT
        point = decode_datavalue({'type': 'globecoordinate', 'value': {'latitude': 51.5, 'longitude': -0.1}})
        assert point.lexical == '51.5,-0.1'

    def test_unknown_datavalue_type(self):
        with pytest.raises(UnsupportedSnak):
            decode_datavalue({'type': 'hologram', 'value': {}})


class TestEntityLines:
    def test_framing_lines(self):
        for line in ['[', ']', '', '  ', ']\n']:
            assert parse_entity_line(line) is None

    def test_trailing_comma_and_claims(self):
        doc = parse_entity_line(entity_line('Q84', {'P27': [value_claim('P27', 'Q84$1', item(145))]}))
        assert doc.id == EntityId.item(84)
        (statement,) = doc_to_statements(doc)
        assert (statement.statement_id, statement.value) == ('Q84$1', EntityId.item(145))

    def test_empty_claims_list(self):
        doc = parse_entity_line('{"type": "item", "id": "Q145", "claims": []}')
        assert doc_to_statements(doc) == []

    def test_some_value_snaks_are_skipped(self):
        claim = {'mainsnak': {'snaktype': 'somevalue', 'property': 'P19'}, 'id': 'Q1$1', 'rank': 'normal'}
        doc = parse_entity_line(entity_line('Q1', {'P19': [claim]}))
        assert doc.skipped_snaks == 1
        assert doc_to_statements(doc) == []

    def test_no_value_qualifier_is_skipped(self):
        claim = value_claim('P108', 'Q1$1', item(42944), qualifiers={
            'P582': [{'snaktype': 'novalue', 'property': 'P582'}]})
        doc = parse_entity_line(entity_line('Q1', {'P108': [claim]}))
        assert doc.skipped_snaks == 1
        assert doc_to_statements(doc)[0].qualifiers == frozenset()

    def test_unsupported_snak_policy(self):
        line = entity_line('Q1', {'P1': [value_claim('P1', 'Q1$1', {'type': 'hologram', 'value': {}})]})
        assert parse_entity_line(line).unsupported_snaks == 1
        with pytest.raises(UnsupportedSnak):
            parse_entity_line(line, IngestOptions(on_unsupported_snak=SnakPolicy.ERROR))

    @pytest.mark.parametrize('line', ['{"id": ', '[1, 2]', '{"claims": {}}', '{"id": "Z9"}',
                                      '{"id": "Q1", "claims": {"P1": [{"id": "Q1$1"}]}}'])
    def test_malformed(self, line):
        with pytest.raises(MalformedLine):
            parse_entity_line(line)

    def test_oversize_line(self):
        with pytest.raises(OversizeLine):
            parse_entity_line(entity_line('Q1'), IngestOptions(max_line_bytes=16))


class TestLoadGraph:
    def test_example_dump_gives_the_example_graph(self, dump_lines):
        graph, stats = load_graph(dump_lines)
        loaded = {s for subject in graph.subjects() for s in graph.neighs(subject)}
        assert loaded == set(fixture_statements())
        assert (stats.lines, stats.framing_lines, stats.entities, stats.statements) == (7, 2, 5, 11)
        assert stats.ignored_references == 1
        assert stats.malformed_lines == 0

    def test_malformed_lines_are_counted(self):
        lines = ['[', entity_line('Q1'), 'not json,', entity_line('Q2', comma=False), ']']
        graph, stats = load_graph(lines)
        assert stats.malformed_lines == 1
        assert stats.entity_ids == [EntityId.item(1), EntityId.item(2)]
        assert EntityId.item(2) in graph.items

    def test_strict_mode_stops_at_the_first_bad_line(self):
        with pytest.raises(MalformedLine) as info:
            load_graph(['[', entity_line('Q1'), 'not json'], IngestOptions(strict=True))
        assert info.value.line_number == 3
        assert str(info.value).startswith('line 3: invalid JSON')

    def test_duplicate_statement_ids(self):
        claim = value_claim('P31', 'Q1$same', item(5))
        lines = [entity_line('Q1', {'P31': [claim]}), entity_line('Q2', {'P31': [claim]})]
        graph, stats = load_graph(lines)
        assert (stats.statements, stats.duplicate_statements) == (1, 1)
        assert len(graph) == 1

    def test_local_mode_is_not_a_graph(self):
        with pytest.raises(ValueError):
            load_graph([], LOCAL)

    def test_worker_processes_match_a_single_process(self, dump_lines, monkeypatch):
        monkeypatch.setattr(dump_ingest, 'BATCH_LINES', 2)
        lines = dump_lines[:3] + ['not json,'] + dump_lines[3:]
        serial_graph, serial_stats = load_graph(lines)
        graph, stats = load_graph(lines, IngestOptions(jobs=2))

        assert stats == serial_stats
        assert stats.malformed_lines == 1
        assert stats.entity_ids == [EntityId.item(n) for n in (80, 84, 92743, 42944, 329157)]
        assert {s for subject in graph.subjects() for s in graph.neighs(subject)} == set(fixture_statements())
        assert graph.items == serial_graph.items


class TestLocalValidation:
    def test_references_to_other_entities_are_accepted(self, dump_lines, data_dir):
        schema = parse_schema((data_dir / 'researcher.wshex').read_text(encoding='utf-8'))
        entries = {e.node: e for e in stream_validate(dump_lines, schema, 'Researcher')}
        tim = entries[EntityId.item(80)]
        assert tim.status is ValidationStatus.CONFORMING
        assert tim.approx
        assert tim.to_text() == 'Q80@Researcher: CONFORMS (local-approx)'

    def test_exact_verdicts_carry_no_flag(self, dump_lines, example_schema):
        entries = {e.node: e for e in stream_validate(dump_lines, example_schema, 'Organization')}
        assert entries[EntityId.item(42944)].status is ValidationStatus.CONFORMING
        assert not entries[EntityId.item(42944)].approx

    def test_local_failures_stay_failures(self, dump_lines, example_schema):
        entries = {e.node: e for e in stream_validate(dump_lines, example_schema, 'Person')}
        vint = entries[EntityId.item(92743)]
        assert vint.status is ValidationStatus.NON_CONFORMING
        assert not vint.approx

    def test_local_mode_only_ever_accepts_more(self, dump_lines, example_schema, data_dir):
        researcher = parse_schema((data_dir / 'researcher.wshex').read_text(encoding='utf-8'))
        graph, _ = load_graph(dump_lines)
        for schema in (example_schema, researcher):
            for label in schema.labels:
                full = Validator(graph, schema)
                for entry in stream_validate(dump_lines, schema, label):
                    if full.check(entry.node, label) is ValidationStatus.CONFORMING:
                        assert entry.status is ValidationStatus.CONFORMING

    def test_stats_are_filled_while_streaming(self, dump_lines, example_schema):
        stats = IngestStats()
        entries = list(stream_validate(dump_lines, example_schema, 'Place', stats=stats))
        assert len(entries) == 5
        assert (stats.entities, stats.statements, stats.framing_lines) == (5, 11, 2)
        assert stats.entity_ids == []

    def test_worker_processes_keep_the_input_order(self, dump_lines, example_schema, monkeypatch):
        monkeypatch.setattr(dump_ingest, 'BATCH_LINES', 2)
        serial = list(stream_validate(dump_lines, example_schema, 'Person'))
        stats = IngestStats()
        parallel = list(stream_validate(dump_lines, example_schema, 'Person',
                                        IngestOptions(mode=IngestMode.LOCAL_ONLY, jobs=2), stats=stats))
        assert parallel == serial
        assert [e.node for e in parallel] == [EntityId.item(n) for n in (80, 84, 92743, 42944, 329157)]
        assert (stats.entities, stats.statements, stats.entity_ids) == (5, 11, [])

    def test_unknown_shape(self, dump_lines, example_schema):
        with pytest.raises(KeyError):
            list(stream_validate(dump_lines, example_schema, 'Researcher'))

    def test_full_mode_is_rejected(self, example_schema):
        with pytest.raises(ValueError):
            list(stream_validate([], example_schema, 'Place', IngestOptions()))


class TestReportLines:
    def test_reads_both_report_kinds(self, dump_lines, fixture_graph, example_schema):
        report = validate(fixture_graph, example_schema, [(EntityId.item(49145), 'Place')])
        local = [json.dumps(local_record(e)) for e in stream_validate(dump_lines[:2], example_schema, 'Place')]
        records = read_report_lines(report.to_json_lines() + [''] + local)

        assert records[0] == {'node': 'Q49145', 'shape': 'Place', 'status': ValidationStatus.NON_CONFORMING,
                              'trace': ['OpenShape', 'TripleConstraint(P27)'], 'approx': False}
        assert records[1]['node'] == 'Q80'
        assert records[1]['status'] is ValidationStatus.NON_CONFORMING

    def test_bad_record(self):
        with pytest.raises(MalformedLine) as info:
            read_report_lines(['{"node": "Q1", "shape": "S", "status": "conforms"}', '{"node": "Q1"}'])
        assert info.value.line_number == 2
