"""
Wikibase JSON dump ingestion

Reads entity-document dumps (one JSON entity per line, optionally framed
as a JSON array with trailing commas), decodes value snaks into the graph
model and either builds a full WikibaseGraph or validates each entity on
its own statements as the lines stream past.

Some-value / no-value snaks and statement references are not modeled;
they are dropped and counted.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from itertools import islice
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from wikibase_graph import (
    BuiltinDatatype, DataValue, EntityId, GlobeCoordinateValue, Qualifier, Rank, SNAK_DATATYPES,
    Statement, TimeValue, Value, WikibaseGraph, monolingual_value, quantity_value,
)
from wshex_ast import Schema
from wshex_config import MAX_LINE_BYTES
from wshex_errors import DuplicateStatementId, MalformedLine, OversizeLine, UnsupportedSnak, WShExError
from wshex_validator import EngineOptions, ReportEntry, ValidationStatus, Validator

logger = logging.getLogger('WShEx.ingest')

PROGRESS_EVERY = 10_000  # entities between progress log lines
BATCH_LINES = 256  # lines handed to a worker at a time

FRAMING_LINES = {'', '[', ']'}

# Snak datatypes whose datavalue is a plain string
_STRING_BACKED = {
    BuiltinDatatype.STRING, BuiltinDatatype.URL, BuiltinDatatype.EXTERNAL_IDENTIFIER,
    BuiltinDatatype.COMMONS_MEDIA, BuiltinDatatype.MATHEMATICAL_EXPRESSION,
    BuiltinDatatype.GEOGRAPHIC_SHAPE, BuiltinDatatype.MUSICAL_NOTATION, BuiltinDatatype.TABULAR_DATA,
}

# ============================================================================
# TYPES
# ============================================================================

class IngestMode(Enum):
    FULL_GRAPH = 'full'
    LOCAL_ONLY = 'local'


class SnakPolicy(Enum):
    SKIP = 'skip'
    ERROR = 'error'


@dataclass(frozen=True)
class IngestOptions:
    mode: IngestMode = IngestMode.FULL_GRAPH
    on_unsupported_snak: SnakPolicy = SnakPolicy.SKIP
    max_line_bytes: int = MAX_LINE_BYTES
    strict: bool = False  # abort on the first malformed line instead of counting it
    jobs: int = 1


@dataclass(frozen=True)
class ClaimRecord:
    """One decoded claim of an entity document"""

    statement_id: str
    property: EntityId
    value: Value
    qualifiers: FrozenSet[Qualifier] = frozenset()
    rank: Rank = Rank.NORMAL


@dataclass(frozen=True)
class EntityDocument:
    id: EntityId
    entity_type: str
    claims: Dict[EntityId, Tuple[ClaimRecord, ...]]
    skipped_snaks: int = 0
    unsupported_snaks: int = 0
    ignored_references: int = 0

    def claim_records(self) -> Iterator[ClaimRecord]:
        for prop in sorted(self.claims, key=lambda p: p.numeric_id):
            yield from self.claims[prop]


@dataclass
class IngestStats:
    lines: int = 0
    framing_lines: int = 0
    entities: int = 0
    statements: int = 0
    skipped_snaks: int = 0
    unsupported_snaks: int = 0
    ignored_references: int = 0
    malformed_lines: int = 0
    duplicate_statements: int = 0
    # filled by load_graph only; streaming keeps constant state
    entity_ids: List[EntityId] = field(default_factory=list)

    def absorb(self, doc: EntityDocument) -> None:
        self.entities += 1
        self.skipped_snaks += doc.skipped_snaks
        self.unsupported_snaks += doc.unsupported_snaks
        self.ignored_references += doc.ignored_references

    def as_dict(self) -> Dict[str, int]:
        return {
            'lines': self.lines,
            'framing_lines': self.framing_lines,
            'entities': self.entities,
            'statements': self.statements,
            'skipped_snaks': self.skipped_snaks,
            'unsupported_snaks': self.unsupported_snaks,
            'ignored_references': self.ignored_references,
            'malformed_lines': self.malformed_lines,
            'duplicate_statements': self.duplicate_statements,
        }

# ============================================================================
# SNAK DECODING
# ============================================================================

def _entity_value(raw: Dict) -> Value:
    entity_id = raw.get('id')
    if entity_id is None:
        # Older dumps only carry entity-type + numeric-id
        prefix = {'item': 'Q', 'property': 'P'}.get(raw.get('entity-type'))
        if prefix is None or 'numeric-id' not in raw:
            raise UnsupportedSnak(f"entity value without id: {raw!r}")
        entity_id = f"{prefix}{raw['numeric-id']}"
    if entity_id[:1] in ('Q', 'P'):
        return EntityId.parse(entity_id)
    if entity_id.startswith('L'):
        if '-F' in entity_id:
            return DataValue(BuiltinDatatype.FORM, entity_id)
        if '-S' in entity_id:
            return DataValue(BuiltinDatatype.SENSE, entity_id)
        return DataValue(BuiltinDatatype.LEXEME, entity_id)
    raise UnsupportedSnak(f"unsupported entity id {entity_id!r}")


def decode_datavalue(datavalue: Dict, snak_datatype: Optional[str] = None) -> Value:
    """
    Decode the datavalue of a value snak

    Args:
        datavalue: The snak's "datavalue" object
        snak_datatype: The snak's "datatype" field, used to type string values

    Returns:
        EntityId for items and properties, DataValue otherwise

    Raises:
        UnsupportedSnak: for datavalue types outside the model
        KeyError / ValueError: for incomplete records
    """
    kind = datavalue['type']
    raw = datavalue['value']

    if kind == 'wikibase-entityid':
        return _entity_value(raw)

    if kind == 'string':
        datatype = SNAK_DATATYPES.get(snak_datatype, BuiltinDatatype.STRING)
        if datatype not in _STRING_BACKED:
            datatype = BuiltinDatatype.STRING
        return DataValue(datatype, raw)

    if kind == 'time':
        timestamp = raw['time']
        return DataValue(BuiltinDatatype.TIME, timestamp,
                         TimeValue(timestamp, int(raw.get('precision', 11)), raw.get('calendarmodel')))

    if kind == 'quantity':
        unit = raw.get('unit', '1')
        unit_id = None if unit == '1' else EntityId.parse(unit.rsplit('/', 1)[-1])
        return quantity_value(Decimal(raw['amount']), unit_id)

    if kind == 'monolingualtext':
        return monolingual_value(raw['text'], raw['language'])

    if kind == 'globecoordinate':
        latitude, longitude = float(raw['latitude']), float(raw['longitude'])
        return DataValue(BuiltinDatatype.GLOBE_COORDINATE, f"{latitude},{longitude}",
                         GlobeCoordinateValue(latitude, longitude, raw.get('precision'), raw.get('globe')))

    raise UnsupportedSnak(f"unsupported datavalue type {kind!r}")


class _SnakDecoder:
    """Decodes the snaks of one document, counting what it drops"""

    def __init__(self, policy: SnakPolicy):
        self.policy = policy
        self.skipped = 0
        self.unsupported = 0

    def decode(self, snak: Dict) -> Optional[Value]:
        if snak.get('snaktype', 'value') != 'value':
            self.skipped += 1
            return None
        try:
            return decode_datavalue(snak['datavalue'], snak.get('datatype'))
        except UnsupportedSnak:
            if self.policy is SnakPolicy.ERROR:
                raise
            self.unsupported += 1
            return None

    def qualifiers(self, raw: Dict) -> FrozenSet[Qualifier]:
        decoded = set()
        for key, snaks in raw.items():
            for snak in snaks:
                value = self.decode(snak)
                if value is not None:
                    decoded.add(Qualifier(EntityId.parse(snak.get('property', key)), value))
        return frozenset(decoded)

# ============================================================================
# ENTITY LINES
# ============================================================================

def parse_entity_line(line: str, opts: Optional[IngestOptions] = None) -> Optional[EntityDocument]:
    """
    Parse one dump line into an EntityDocument

    Args:
        line: One line of the dump, with or without a trailing comma
        opts: Line limit and unsupported-snak policy

    Returns:
        EntityDocument, or None for framing lines ("[", "]", blank)

    Raises:
        OversizeLine: line longer than opts.max_line_bytes
        MalformedLine: invalid JSON, missing or invalid ids, bad claim records
        UnsupportedSnak: unmodeled datavalue with the ERROR policy
    """
    opts = opts or IngestOptions()
    if len(line.encode('utf-8')) > opts.max_line_bytes:
        raise OversizeLine(f"line exceeds {opts.max_line_bytes} bytes")

    text = line.strip()
    if text.endswith(','):
        text = text[:-1].rstrip()
    if text in FRAMING_LINES:
        return None

    try:
        record = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedLine(f"invalid JSON: {e.msg} at column {e.colno}") from None
    if not isinstance(record, dict) or 'id' not in record:
        raise MalformedLine("entity document without id")

    decoder = _SnakDecoder(opts.on_unsupported_snak)
    references = 0
    claims: Dict[EntityId, Tuple[ClaimRecord, ...]] = {}
    try:
        entity_id = EntityId.parse(record['id'])
        # Entities without statements serialize claims as an empty list
        raw_claims = record.get('claims') or {}
        for key, raw_statements in raw_claims.items():
            prop = EntityId.parse(key)
            decoded = []
            for raw in raw_statements:
                references += len(raw.get('references', ()))
                mainsnak = raw['mainsnak']
                value = decoder.decode(mainsnak)
                if value is None:
                    continue
                decoded.append(ClaimRecord(
                    statement_id=raw['id'],
                    property=EntityId.parse(mainsnak.get('property', key)),
                    value=value,
                    qualifiers=decoder.qualifiers(raw.get('qualifiers') or {}),
                    rank=Rank(raw.get('rank', 'normal')),
                ))
            if decoded:
                claims[prop] = tuple(decoded)
    except MalformedLine:
        raise
    except (WShExError, KeyError, TypeError, ValueError, AttributeError, InvalidOperation) as e:
        raise MalformedLine(f"bad entity record: {e}") from None

    entity_type = record.get('type') or ('property' if entity_id.is_property else 'item')
    return EntityDocument(entity_id, entity_type, claims, decoder.skipped, decoder.unsupported, references)


def doc_to_statements(doc: EntityDocument) -> List[Statement]:
    """One Statement per decoded claim, in property then dump order"""
    return [
        Statement(claim.statement_id, doc.id, claim.property, claim.value, claim.qualifiers, claim.rank)
        for claim in doc.claim_records()
    ]

# ============================================================================
# LINE STREAMS
# ============================================================================

FRAMING, DOCUMENT, FAILURE = 'framing', 'document', 'failure'


def _parse_outcome(line: str, opts: IngestOptions) -> Tuple[str, object]:
    """Parse a line without raising, so results can cross process boundaries"""
    try:
        doc = parse_entity_line(line, opts)
    except MalformedLine as e:
        return FAILURE, (type(e), e.args[0])
    return (FRAMING, None) if doc is None else (DOCUMENT, doc)


def _parse_batch(lines: List[str], opts: IngestOptions) -> List[Tuple[str, object]]:
    return [_parse_outcome(line, opts) for line in lines]


def _batches(lines: Iterable[str], size: int) -> Iterator[List[str]]:
    iterator = iter(lines)
    while True:
        batch = list(islice(iterator, size))
        if not batch:
            return
        yield batch


def _parse_stream(lines: Iterable[str], opts: IngestOptions) -> Iterator[Tuple[str, object]]:
    """Parse outcomes in input order, on worker processes when opts.jobs > 1"""
    if opts.jobs <= 1:
        for line in lines:
            yield _parse_outcome(line, opts)
        return

    with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
        # A bounded window of batches keeps memory independent of the dump size
        window = opts.jobs * 2
        batches = _batches(lines, BATCH_LINES)
        while True:
            chunk = list(islice(batches, window))
            if not chunk:
                return
            for outcomes in pool.map(_parse_batch, chunk, [opts] * len(chunk)):
                yield from outcomes


def _handle_failure(payload, line_number: int, stats: IngestStats, opts: IngestOptions) -> None:
    error_type, message = payload
    stats.malformed_lines += 1
    logger.warning(f"✗ line {line_number}: {message}")
    if opts.strict:
        raise error_type(message, line_number)


def load_graph(lines: Iterable[str], opts: Optional[IngestOptions] = None) -> Tuple[WikibaseGraph, IngestStats]:
    """
    Build a WikibaseGraph from dump lines

    Args:
        lines: Dump lines (an open text file works)
        opts: Ingestion options; mode must be FULL_GRAPH

    Returns:
        (graph, stats); malformed lines are counted and skipped

    Raises:
        MalformedLine: first malformed line when opts.strict is set
    """
    opts = opts or IngestOptions()
    if opts.mode is not IngestMode.FULL_GRAPH:
        raise ValueError("load_graph builds the full graph; use stream_validate for local mode")

    graph = WikibaseGraph()
    stats = IngestStats()

    for line_number, (kind, payload) in enumerate(_parse_stream(lines, opts), 1):
        stats.lines += 1
        if kind == FRAMING:
            stats.framing_lines += 1
            continue
        if kind == FAILURE:
            _handle_failure(payload, line_number, stats, opts)
            continue

        doc: EntityDocument = payload
        stats.absorb(doc)
        stats.entity_ids.append(doc.id)
        graph.register_entity(doc.id)
        for statement in doc_to_statements(doc):
            try:
                graph.add_statement(statement)
            except DuplicateStatementId as e:
                stats.duplicate_statements += 1
                logger.warning(f"✗ line {line_number}: {e}")
                continue
            stats.statements += 1

        if stats.entities % PROGRESS_EVERY == 0:
            logger.info(f"Progress: {stats.entities} entities, {stats.statements} statements")

    logger.info(f"Loaded {stats.entities} entities and {stats.statements} statements "
                f"({stats.malformed_lines} malformed lines, {stats.skipped_snaks} snaks skipped)")
    return graph, stats

# ============================================================================
# LOCAL VALIDATION
# ============================================================================

def _validate_document(template: Validator, doc: EntityDocument, shape: str) -> ReportEntry:
    graph = WikibaseGraph(doc_to_statements(doc))
    graph.register_entity(doc.id)
    return template.focused_on(graph, doc.id).validate_target(doc.id, shape)


_worker_state: Dict[str, object] = {}


def _init_stream_worker(schema: Schema, shape: str, options: EngineOptions, opts: IngestOptions) -> None:
    _worker_state['template'] = Validator(WikibaseGraph(), schema, options)
    _worker_state['shape'] = shape
    _worker_state['opts'] = opts


def _stream_batch(lines: List[str]) -> List[Tuple[str, object]]:
    template, shape, opts = _worker_state['template'], _worker_state['shape'], _worker_state['opts']
    results = []
    for line in lines:
        kind, payload = _parse_outcome(line, opts)
        if kind == DOCUMENT:
            payload = (payload, _validate_document(template, payload, shape))
        results.append((kind, payload))
    return results


def stream_validate(lines: Iterable[str], schema: Schema, target_shape: str,
                    opts: Optional[IngestOptions] = None, options: Optional[EngineOptions] = None,
                    stats: Optional[IngestStats] = None) -> Iterator[ReportEntry]:
    """
    Validate every entity of a dump against one shape, using only its own statements

    References and shapes that land on other entities cannot be checked
    and are accepted; such verdicts carry approx=True. Conditions and
    shapes on data values are evaluated exactly, so an entity that conforms
    over the full graph is never rejected here.

    Args:
        lines: Dump lines
        schema: Well-formed schema
        target_shape: Label every entity is checked against
        opts: Ingestion options; mode must be LOCAL_ONLY
        options: Step budget and EachOfQs reading
        stats: Filled in while the stream is consumed

    Yields:
        One ReportEntry per entity, in input order

    Raises:
        KeyError: unknown target shape
        MalformedLine: first malformed line when opts.strict is set
    """
    opts = opts or IngestOptions(mode=IngestMode.LOCAL_ONLY)
    if opts.mode is not IngestMode.LOCAL_ONLY:
        raise ValueError("stream_validate only runs in local mode")
    options = options or EngineOptions()
    stats = stats if stats is not None else IngestStats()

    template = Validator(WikibaseGraph(), schema, options)
    if target_shape not in template.defs:
        raise KeyError(target_shape)

    if opts.jobs <= 1:
        def outcomes():
            for line in lines:
                kind, payload = _parse_outcome(line, opts)
                if kind == DOCUMENT:
                    payload = (payload, _validate_document(template, payload, target_shape))
                yield kind, payload
        stream = outcomes()
    else:
        stream = _parallel_stream(lines, schema, target_shape, options, opts)

    for line_number, (kind, payload) in enumerate(stream, 1):
        stats.lines += 1
        if kind == FRAMING:
            stats.framing_lines += 1
            continue
        if kind == FAILURE:
            _handle_failure(payload, line_number, stats, opts)
            continue

        doc, entry = payload
        stats.absorb(doc)
        stats.statements += sum(len(claims) for claims in doc.claims.values())
        if stats.entities % PROGRESS_EVERY == 0:
            logger.info(f"Progress: {stats.entities} entities validated")
        yield entry


def _parallel_stream(lines, schema, shape, options, opts) -> Iterator[Tuple[str, object]]:
    with ProcessPoolExecutor(max_workers=opts.jobs, initializer=_init_stream_worker,
                             initargs=(schema, shape, options, opts)) as pool:
        window = opts.jobs * 2
        batches = _batches(lines, BATCH_LINES)
        while True:
            chunk = list(islice(batches, window))
            if not chunk:
                return
            for results in pool.map(_stream_batch, chunk):
                yield from results


def local_record(entry: ReportEntry) -> Dict:
    """JSON record of a local-mode verdict"""
    return {'entity': str(entry.node), 'shape': entry.shape, 'status': entry.status.value,
            'approx': entry.approx}

# ============================================================================
# REPORT READING
# ============================================================================

def read_report_lines(lines: Iterable[str]) -> List[Dict]:
    """
    Parse JSON-lines reports written by either validation mode

    Returns:
        Records with keys node, shape, status (ValidationStatus), trace, approx

    Raises:
        MalformedLine: a non-blank line that is not a report record
    """
    records = []
    for line_number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            records.append({
                'node': raw['node'] if 'node' in raw else raw['entity'],
                'shape': raw['shape'],
                'status': ValidationStatus(raw['status']),
                'trace': list(raw.get('trace', [])),
                'approx': bool(raw.get('approx', False)),
            })
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise MalformedLine(f"not a report record: {e}", line_number) from None
    return records
