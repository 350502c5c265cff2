"""
ShEx entity schemas -> WShEx

Entity schemas written against the Wikibase RDF serialization describe a
property twice: `wdt:P` for the truthy value and `p:P { ps:P ...; pq:Q ... }`
for the full statement with its qualifiers. Conversion folds both into a
single WShEx triple constraint:

    wdt:P v card                      ->  :P v′ card
    p:P { ps:P v ; pq:Q w c } card    ->  :P v′ {| :Q w′ c |} card
    both                              ->  value from ps:, qualifiers from pq:,
                                          cardinality from p:

Constraints that have no WShEx counterpart (references, ranks, CLOSED,
EXTRA, semantic actions) are listed as rejections, never dropped silently.
"""

import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import pyparsing as pp

from wikibase_graph import BuiltinDatatype, DataValue, EntityId, monolingual_value, quantity_value, string_value
from wshex_ast import (
    EMPTY, EXACTLY_ONE, OPEN_ANY_QUALIFIERS,
    AnyValue, Cardinality, DatatypeConstraint, EachOf, EachOfQs, EmptyQs, Openness, PropQs,
    QualifierSpec, Repeat, RepeatQs, Schema, Shape, ShapeExpr, ShapeRef, TripleConstraint, ValueSet,
)
from wshex_config import WIKIBASE_ENTITY_IRI
from wshex_errors import CardinalityRangeError, ShExSyntaxError
from wshex_parser import (
    CARD, IRIREF, LABEL, NUMBER, PNAME_LN, PNAME_NS, PREFIX, STRING, ParseDiagnostic, SourcePosition,
    decode_cardinality, decode_string_literal, fold_right, render_schema,
)

logger = logging.getLogger('WShEx.convert')

XSD = 'http://www.w3.org/2001/XMLSchema#'
RDF = 'http://www.w3.org/1999/02/22-rdf-syntax-ns#'
PROV = 'http://www.w3.org/ns/prov#'
WIKIBASE_RANK = 'http://wikiba.se/ontology#rank'

DATATYPE_IRIS: Dict[str, BuiltinDatatype] = {
    XSD + 'dateTime': BuiltinDatatype.TIME,
    XSD + 'date': BuiltinDatatype.TIME,
    XSD + 'string': BuiltinDatatype.STRING,
    XSD + 'decimal': BuiltinDatatype.QUANTITY,
    XSD + 'integer': BuiltinDatatype.QUANTITY,
    XSD + 'anyURI': BuiltinDatatype.URL,
    RDF + 'langString': BuiltinDatatype.MONOLINGUAL_TEXT,
}

_PROPERTY_IRI = re.compile(r'^(?P<base>.+/)prop/(?:(?P<kind>direct|statement|qualifier|reference)/)?(?P<pid>P[1-9][0-9]*)$')
_ENTITY_IRI = re.compile(r'^(?P<base>.+/)entity/(?P<id>[QP][1-9][0-9]*)$')

# ============================================================================
# SHEX SUBSET AST
# ============================================================================

@dataclass(frozen=True)
class ShExRef:
    label: str


@dataclass(frozen=True)
class ShExDatatype:
    iri: str


@dataclass(frozen=True)
class ShExValueSet:
    values: Tuple[Union[str, DataValue], ...]  # IRIs as strings, literals as data values


@dataclass(frozen=True)
class ShExAnyValue:
    pass


@dataclass(frozen=True)
class ShExNodeKind:
    kind: str


@dataclass(frozen=True)
class ShExShape:
    constraints: Tuple['ShExConstraint', ...] = ()
    closed: bool = False
    extra: Tuple[str, ...] = ()
    semantic_actions: bool = False


ShExValueExpr = Union[ShExRef, ShExDatatype, ShExValueSet, ShExAnyValue, ShExNodeKind, ShExShape]


@dataclass(frozen=True)
class ShExConstraint:
    predicate: str  # as written
    iri: str  # expanded
    value: ShExValueExpr
    cardinality: Cardinality = EXACTLY_ONE
    position: Optional[SourcePosition] = None
    semantic_actions: bool = False

    def describe(self) -> str:
        card = '' if self.cardinality == EXACTLY_ONE else f" {self.cardinality.render()}"
        return f"{self.predicate}{card}"


@dataclass(frozen=True)
class ShExShapeDecl:
    label: str
    shape: ShExShape
    position: Optional[SourcePosition] = None


@dataclass
class ShExSubsetSchema:
    prefixes: Dict[str, str] = field(default_factory=dict)
    shapes: List[ShExShapeDecl] = field(default_factory=list)

    @property
    def labels(self) -> List[str]:
        return [decl.label for decl in self.shapes]

    def __getitem__(self, label: str) -> ShExShapeDecl:
        for decl in self.shapes:
            if decl.label == label:
                return decl
        raise KeyError(label)

    def constraint_count(self) -> int:
        return sum(len(decl.shape.constraints) for decl in self.shapes)

# ============================================================================
# PARSER
# ============================================================================

class _ShExGrammar:
    """Grammar for the convertible ShExC subset; prefixes are expanded while parsing"""

    def __init__(self, text: str):
        self.text = text
        self.prefixes: Dict[str, str] = {}
        self.diagnostics: List[ParseDiagnostic] = []
        self.shapes: List[ShExShapeDecl] = []
        self.grammar = self._build()

    def error(self, loc: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(SourcePosition.at(self.text, loc), message))

    def _expand(self, loc: int, token: str) -> str:
        if token.startswith('<'):
            return token[1:-1]
        prefix, local = token.split(':', 1)
        if prefix not in self.prefixes:
            self.error(loc, f"undeclared prefix '{prefix}:'")
            return token
        return self.prefixes[prefix] + local

    def _prefix(self, s, loc, toks):
        self.prefixes[toks[0][:-1]] = toks[1][1:-1]

    def _predicate(self, s, loc, toks):
        token = toks[0]
        iri = RDF + 'type' if token == 'a' else self._expand(loc, token)
        return pp.ParseResults([(token, iri, loc)])

    def _string(self, s, loc, toks):
        body, language = decode_string_literal(toks[0])
        if not body:
            self.error(loc, "empty string literal in value set")
            body = ' '
        return monolingual_value(body, language) if language else string_value(body)

    def _number(self, s, loc, toks):
        try:
            return quantity_value(Decimal(toks[0]))
        except InvalidOperation:
            self.error(loc, f"invalid number {toks[0]}")
            return quantity_value(0)

    def _cardinality(self, s, loc, toks):
        try:
            return decode_cardinality(toks[0])
        except CardinalityRangeError as e:
            self.error(loc, str(e))
            return EXACTLY_ONE

    def _shape(self, s, loc, toks):
        closed, extra, constraints, actions = False, (), [], False
        for tok in toks:
            if tok == 'CLOSED':
                closed = True
            elif isinstance(tok, tuple) and tok and tok[0] == 'EXTRA':
                extra = tok[1:]
            elif isinstance(tok, ShExConstraint):
                constraints.append(tok)
            elif tok == '%':
                actions = True
        return ShExShape(tuple(constraints), closed, extra, actions)

    def _constraint(self, s, loc, toks):
        (token, iri, pred_loc), value = toks[0], toks[1]
        cardinality, actions = EXACTLY_ONE, False
        for tok in toks[2:]:
            if isinstance(tok, Cardinality):
                cardinality = tok
            elif tok == '%':
                actions = True
        return ShExConstraint(token, iri, value, cardinality, SourcePosition.at(self.text, pred_loc), actions)

    def _declaration(self, s, loc, toks):
        shape = toks[1]
        if len(toks) > 2:
            shape = ShExShape(shape.constraints, shape.closed, shape.extra, True)
        self.shapes.append(ShExShapeDecl(toks[0], shape, SourcePosition.at(self.text, loc)))

    def _build(self) -> pp.ParserElement:
        shape = pp.Forward().set_name('shape')

        label = LABEL.copy().set_parse_action(lambda t: t[0][1:-1])
        iri = (PNAME_LN | IRIREF).set_name('IRI')
        predicate = (PNAME_LN | IRIREF | pp.Keyword('a')).set_parse_action(self._predicate).set_name('predicate')
        cardinality = CARD.copy().set_parse_action(self._cardinality)
        semantic_action = pp.Regex(r'%[^%{\s]*\s*(?:\{.*?%\}|%)', flags=re.DOTALL).set_parse_action(
            lambda: '%').set_name('semantic action')

        value = (STRING.copy().set_parse_action(self._string)
                 | NUMBER.copy().set_parse_action(self._number)
                 | iri.copy().add_parse_action(lambda s, loc, t: self._expand(loc, t[0])))
        value_set = (pp.Suppress('[') + pp.ZeroOrMore(value) + pp.Suppress(']')).set_parse_action(
            lambda t: ShExValueSet(tuple(t)))
        reference = (pp.Suppress('@') + label).set_parse_action(lambda t: ShExRef(t[0]))
        node_kind = pp.one_of('IRI LITERAL NONLITERAL BNODE', as_keyword=True).set_parse_action(
            lambda t: ShExNodeKind(t[0]))
        any_value = pp.Literal('.').set_parse_action(lambda: ShExAnyValue())
        datatype = iri.copy().add_parse_action(lambda s, loc, t: ShExDatatype(self._expand(loc, t[0])))
        value_expr = (reference | value_set | any_value | node_kind | shape | datatype).set_name('value expression')

        constraint = (predicate + value_expr + pp.Opt(cardinality) + pp.ZeroOrMore(semantic_action)).set_parse_action(
            self._constraint).set_name('triple constraint')
        constraints = pp.Opt(constraint + pp.ZeroOrMore(pp.Suppress(';') + constraint) + pp.Opt(pp.Suppress(';')))
        extra = (pp.Keyword('EXTRA') + pp.OneOrMore(iri.copy().add_parse_action(
            lambda s, loc, t: self._expand(loc, t[0])))).set_parse_action(lambda t: pp.ParseResults([tuple(t)]))
        shape <<= (pp.Opt(pp.Keyword('CLOSED')) + pp.Opt(extra) + pp.Suppress('{') + constraints
                   + pp.Suppress('}')).set_parse_action(self._shape)

        prefix_decl = (pp.Suppress(PREFIX) + PNAME_NS + IRIREF).set_parse_action(self._prefix)
        declaration = (label + shape + pp.ZeroOrMore(semantic_action)).set_parse_action(self._declaration)
        schema = pp.ZeroOrMore(prefix_decl) + pp.ZeroOrMore(declaration) + pp.StringEnd()
        schema.ignore(pp.python_style_comment)
        schema.parse_with_tabs()
        return schema

    def run(self) -> None:
        try:
            self.grammar.parse_string(self.text, parse_all=True)
        except pp.ParseBaseException as pe:
            self.error(pe.loc, f"syntax error: {pe.msg}")


def parse_shexc_subset(text: str) -> ShExSubsetSchema:
    """
    Parse a ShEx entity schema in the convertible ShExC subset

    Returns:
        ShExSubsetSchema with every prefixed name expanded

    Raises:
        ShExSyntaxError: text outside the subset grammar, or WShEx input
    """
    marker = re.search(r'\{\||\[\|', text)
    if marker:
        position = SourcePosition.at(text, marker.start())
        raise ShExSyntaxError([ParseDiagnostic(
            position, f"'{marker.group(0)}' is WShEx syntax; expected a ShEx schema")])

    grammar = _ShExGrammar(text)
    grammar.run()
    if not grammar.shapes and not grammar.diagnostics:
        grammar.error(len(text.rstrip()), "expected shape declaration")
    if grammar.diagnostics:
        raise ShExSyntaxError(sorted(set(grammar.diagnostics), key=lambda d: d.position.byte_offset))

    logger.debug(f"✓ Parsed ShEx schema with {len(grammar.shapes)} shapes")
    return ShExSubsetSchema(dict(grammar.prefixes), list(grammar.shapes))

# ============================================================================
# CONVERSION
# ============================================================================

class RejectionReason(Enum):
    REFERENCES_UNSUPPORTED = 'ReferencesUnsupported'
    RANKS_UNSUPPORTED = 'RanksUnsupported'
    CLOSED_UNSUPPORTED = 'ClosedUnsupported'
    EXTRA_UNSUPPORTED = 'ExtraUnsupported'
    SEMANTIC_ACTIONS_UNSUPPORTED = 'SemanticActionsUnsupported'
    UNSUPPORTED_PREDICATE = 'UnsupportedPredicate'
    UNSUPPORTED_DATATYPE = 'UnsupportedDatatype'
    UNSUPPORTED_VALUE = 'UnsupportedValue'
    NESTED_SHAPE_MISPLACED = 'NestedShapeMisplaced'
    STATEMENT_PROPERTY_MISMATCH = 'StatementPropertyMismatch'


@dataclass(frozen=True)
class ConversionNote:
    shape: str
    message: str
    position: Optional[SourcePosition] = None

    def __str__(self) -> str:
        where = f"{self.position.line}:{self.position.column}: " if self.position else ""
        return f"{where}<{self.shape}> {self.message}"


@dataclass(frozen=True)
class Rejection:
    shape: str
    constraint: str
    reason: RejectionReason
    message: str = ''
    position: Optional[SourcePosition] = None
    counted: bool = True  # stands for a whole top-level constraint of the input

    def __str__(self) -> str:
        where = f"{self.position.line}:{self.position.column}: " if self.position else ""
        detail = f": {self.message}" if self.message else ""
        return f"{where}<{self.shape}> {self.constraint} rejected ({self.reason.value}){detail}"


@dataclass
class ConversionReport:
    converted: Schema
    notes: List[ConversionNote] = field(default_factory=list)
    rejected: List[Rejection] = field(default_factory=list)
    input_constraints: int = 0
    mapped_constraints: int = 0

    @property
    def clean(self) -> bool:
        return not self.rejected

    def accounted(self) -> bool:
        """Every input constraint was either mapped or rejected"""
        return self.input_constraints == self.mapped_constraints + sum(1 for r in self.rejected if r.counted)

    def render(self) -> str:
        return render_schema(self.converted)


class _Rejected(Exception):
    def __init__(self, reason: RejectionReason, message: str = ''):
        super().__init__(message)
        self.reason = reason
        self.message = message


def classify_predicate(iri: str) -> Tuple[str, Optional[EntityId], Optional[str]]:
    """
    Role of a predicate IRI in the Wikibase RDF serialization

    Returns:
        (role, property id, base IRI) with role one of direct, statement-node,
        statement-value, qualifier, reference, prov, rank, other
    """
    if iri.startswith(PROV):
        return 'prov', None, None
    if iri == WIKIBASE_RANK:
        return 'rank', None, None
    match = _PROPERTY_IRI.match(iri)
    if not match:
        return 'other', None, None
    role = {
        'direct': 'direct', None: 'statement-node', 'statement': 'statement-value',
        'qualifier': 'qualifier', 'reference': 'reference',
    }[match.group('kind')]
    return role, EntityId.parse(match.group('pid')), match.group('base')


def convert_value(value: ShExValueExpr) -> ShapeExpr:
    """Map a ShEx value expression to a WShEx shape expression"""
    if isinstance(value, ShExRef):
        return ShapeRef(value.label)
    if isinstance(value, ShExAnyValue):
        return AnyValue()
    if isinstance(value, ShExDatatype):
        datatype = DATATYPE_IRIS.get(value.iri)
        if datatype is None:
            raise _Rejected(RejectionReason.UNSUPPORTED_DATATYPE, f"no Wikibase datatype for <{value.iri}>")
        return DatatypeConstraint(datatype)
    if isinstance(value, ShExNodeKind):
        raise _Rejected(RejectionReason.UNSUPPORTED_DATATYPE, f"node kind {value.kind}")
    if isinstance(value, ShExValueSet):
        members = []
        for member in value.values:
            if isinstance(member, DataValue):
                members.append(member)
                continue
            match = _ENTITY_IRI.match(member)
            if not match:
                raise _Rejected(RejectionReason.UNSUPPORTED_VALUE, f"<{member}> is not an entity IRI")
            members.append(EntityId.parse(match.group('id')))
        if not members:
            raise _Rejected(RejectionReason.UNSUPPORTED_VALUE, "empty value set")
        return ValueSet(tuple(members))
    raise _Rejected(RejectionReason.NESTED_SHAPE_MISPLACED, "nested shapes are only allowed behind p: predicates")


def _repeat(tc: TripleConstraint, cardinality: Cardinality):
    return tc if cardinality == EXACTLY_ONE else Repeat(tc, cardinality)


@dataclass
class _Candidate:
    role: str  # 'direct' or 'statement-node'
    prop: EntityId
    value: ShapeExpr
    cardinality: Cardinality
    index: int
    source: ShExConstraint
    qualifiers: Tuple = ()
    has_statement_value: bool = True


class _ShapeConverter:
    """Converts one shape declaration, recording notes and rejections on the report"""

    def __init__(self, decl: ShExShapeDecl, report: ConversionReport):
        self.label = decl.label
        self.decl = decl
        self.report = report

    def note(self, message: str, position: Optional[SourcePosition] = None) -> None:
        self.report.notes.append(ConversionNote(self.label, message, position))

    def reject(self, constraint: str, reason: RejectionReason, message: str = '',
               position: Optional[SourcePosition] = None, counted: bool = True) -> None:
        self.report.rejected.append(Rejection(self.label, constraint, reason, message, position, counted))

    def _shape_modifiers(self, shape: ShExShape, where: str, position) -> None:
        if shape.closed:
            self.reject(f"CLOSED {where}", RejectionReason.CLOSED_UNSUPPORTED,
                        "RDF closedness also forbids arcs outside the entity model", position, counted=False)
        if shape.extra:
            self.reject(f"EXTRA {where}", RejectionReason.EXTRA_UNSUPPORTED, '', position, counted=False)
        if shape.semantic_actions:
            self.reject(f"semantic action on {where}", RejectionReason.SEMANTIC_ACTIONS_UNSUPPORTED, '',
                        position, counted=False)

    def _top_level(self, index: int, c: ShExConstraint) -> Optional[_Candidate]:
        role, prop, _ = classify_predicate(c.iri)
        if c.semantic_actions:
            self.reject(c.describe(), RejectionReason.SEMANTIC_ACTIONS_UNSUPPORTED,
                        'the constraint itself is converted', c.position, counted=False)
        if role in ('prov', 'reference'):
            raise _Rejected(RejectionReason.REFERENCES_UNSUPPORTED, 'statement references are not modeled')
        if role == 'rank':
            raise _Rejected(RejectionReason.RANKS_UNSUPPORTED, 'ranks are not modeled')
        if role == 'other':
            raise _Rejected(RejectionReason.UNSUPPORTED_PREDICATE, f"<{c.iri}> is not a Wikibase property predicate")
        if role in ('statement-value', 'qualifier'):
            raise _Rejected(RejectionReason.NESTED_SHAPE_MISPLACED,
                            f"{c.predicate} belongs inside a p:{prop} statement shape")
        if role == 'direct':
            return _Candidate(role, prop, convert_value(c.value), c.cardinality, index, c)
        return self._statement_block(index, c, prop)

    def _statement_block(self, index: int, c: ShExConstraint, prop: EntityId) -> _Candidate:
        if not isinstance(c.value, ShExShape):
            raise _Rejected(RejectionReason.NESTED_SHAPE_MISPLACED,
                            f"{c.predicate} needs an inline shape of ps:/pq: constraints")
        block = c.value
        self._shape_modifiers(block, c.predicate, c.position)

        value: Optional[ShapeExpr] = None
        qualifiers = []
        for inner in block.constraints:
            role, inner_prop, _ = classify_predicate(inner.iri)
            try:
                if role in ('prov', 'reference'):
                    raise _Rejected(RejectionReason.REFERENCES_UNSUPPORTED, 'statement references are not modeled')
                if role == 'rank':
                    raise _Rejected(RejectionReason.RANKS_UNSUPPORTED, 'ranks are not modeled')
                if role == 'statement-value':
                    if inner_prop != prop:
                        raise _Rejected(RejectionReason.STATEMENT_PROPERTY_MISMATCH,
                                        f"{inner.predicate} inside {c.predicate}")
                    if value is not None:
                        raise _Rejected(RejectionReason.STATEMENT_PROPERTY_MISMATCH,
                                        f"second {inner.predicate} constraint in {c.predicate}")
                    value = convert_value(inner.value)
                elif role == 'qualifier':
                    spec = PropQs(inner_prop, convert_value(inner.value))
                    if inner.cardinality.max is None or inner.cardinality.max > 1:
                        self.note(f"qualifier {inner.predicate} allows {inner.cardinality.render()} values; "
                                  f"kept as written", inner.position)
                    qualifiers.append(spec if inner.cardinality == EXACTLY_ONE else RepeatQs(spec, inner.cardinality))
                else:
                    raise _Rejected(RejectionReason.UNSUPPORTED_PREDICATE,
                                    f"{inner.predicate} inside a statement shape")
            except _Rejected as r:
                self.reject(f"{c.predicate} / {inner.describe()}", r.reason, r.message, inner.position, counted=False)

        has_value = value is not None
        if not has_value:
            self.note(f"{c.predicate} has no ps: constraint; statement values become '.'", c.position)
            value = AnyValue()
        return _Candidate('statement-node', prop, value, c.cardinality, index, c, tuple(qualifiers), has_value)

    def _pair(self, direct: _Candidate, statement: _Candidate) -> Tuple[int, object]:
        if statement.has_statement_value and direct.value != statement.value:
            self.note(f"values of {direct.source.predicate} and ps:{statement.prop} differ; "
                      f"keeping the ps: value", direct.source.position)
        if direct.cardinality != statement.cardinality:
            self.note(f"cardinality {direct.cardinality.render()} of {direct.source.predicate} differs from "
                      f"{statement.cardinality.render()} of {statement.source.predicate}; keeping the p: cardinality",
                      direct.source.position)
        return min(direct.index, statement.index), self._emit(statement)

    def _emit(self, candidate: _Candidate):
        if candidate.role == 'direct':
            if isinstance(candidate.value, ShapeRef) and candidate.cardinality != EXACTLY_ONE:
                self.note(f"{candidate.source.describe()} constrained only truthy statements; in WShEx it "
                          f"applies to every :{candidate.prop} statement (kept as written)", candidate.source.position)
            qs = OPEN_ANY_QUALIFIERS
        else:
            body = fold_right(list(candidate.qualifiers), EachOfQs) if candidate.qualifiers else EmptyQs
            qs = QualifierSpec(Openness.OPEN, body)
        return _repeat(TripleConstraint(candidate.prop, candidate.value, qs), candidate.cardinality)

    def convert(self) -> Shape:
        self._shape_modifiers(self.decl.shape, f"<{self.label}>", self.decl.position)

        candidates: List[_Candidate] = []
        for index, c in enumerate(self.decl.shape.constraints):
            self.report.input_constraints += 1
            try:
                candidate = self._top_level(index, c)
            except _Rejected as r:
                self.reject(c.describe(), r.reason, r.message, c.position)
                continue
            self.report.mapped_constraints += 1
            candidates.append(candidate)

        first: Dict[Tuple[str, EntityId], _Candidate] = {}
        for candidate in candidates:
            key = (candidate.role, candidate.prop)
            if key in first:
                self.note(f"duplicate {candidate.source.predicate} constraint converted on its own",
                          candidate.source.position)
            else:
                first[key] = candidate

        emitted: List[Tuple[int, object]] = []
        for candidate in candidates:
            if first.get((candidate.role, candidate.prop)) is not candidate:
                emitted.append((candidate.index, self._emit(candidate)))
                continue
            if candidate.role == 'direct':
                partner = first.get(('statement-node', candidate.prop))
                if partner is not None:
                    emitted.append(self._pair(candidate, partner))
                    continue
            elif ('direct', candidate.prop) in first:
                continue  # emitted together with its wdt: partner
            emitted.append((candidate.index, self._emit(candidate)))

        expressions = [te for _, te in sorted(emitted, key=lambda pair: pair[0])]
        return Shape(fold_right(expressions, EachOf) if expressions else EMPTY)


def _entity_iri(schema: ShExSubsetSchema) -> str:
    for decl in schema.shapes:
        for c in decl.shape.constraints:
            _, _, base = classify_predicate(c.iri)
            if base:
                return base + 'entity/'
    for iri in schema.prefixes.values():
        if iri.endswith('/entity/'):
            return iri
    return WIKIBASE_ENTITY_IRI


def convert(shex: ShExSubsetSchema) -> ConversionReport:
    """
    Convert a parsed ShEx entity schema into WShEx

    Returns:
        ConversionReport; unconvertible constraints are in `rejected`,
        semantic deviations worth a reader's attention in `notes`
    """
    report = ConversionReport(Schema({}, {'': _entity_iri(shex)}))
    for decl in shex.shapes:
        report.converted.defs[decl.label] = _ShapeConverter(decl, report).convert()

    logger.debug(f"Converted {len(shex.shapes)} shapes: {report.mapped_constraints} constraints mapped, "
                 f"{len(report.rejected)} rejections, {len(report.notes)} notes")
    return report


def convert_text(text: str) -> ConversionReport:
    """Parse and convert ShEx text in one step"""
    return convert(parse_shexc_subset(text))
