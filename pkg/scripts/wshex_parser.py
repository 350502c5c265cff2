"""
WShEx compact syntax: parser and pretty-printer

The grammar is ShExC-like, with `{| ... |}` for open and `[| ... |]` for
closed qualifier specifiers:

    schema      := prefixDecl* shapeDecl+
    prefixDecl  := "PREFIX" PNAME ":" IRIREF
    shapeDecl   := "<" NAME ">" shapeExpr
    shapeExpr   := shapeAtom ("AND" shapeAtom)*
    shapeAtom   := "@" "<" NAME ">" | datatypeName | "[" value+ "]" | "." | "CLOSED"? "{" tripleExpr? "}"
    tripleExpr  := eachOf ("|" eachOf)*
    eachOf      := unaryTE (";" unaryTE)* ";"?
    unaryTE     := predicate shapeExpr qualifierBlock? cardinality? | "(" tripleExpr? ")" cardinality?
    qualifierBlock := "{|" propSpec? "|}" | "[|" propSpec? "|]"
    propSpec    := qsEachOf ("|" qsEachOf)*
    qsEachOf    := qsUnary ("," qsUnary)* ","?
    qsUnary     := predicate shapeExpr cardinality? | "(" propSpec? ")" cardinality?
    cardinality := "?" | "*" | "+" | "{" INT ("," (INT | "*"))? "}"

Errors are collected rather than raised one at a time: a triple
constraint, qualifier constraint or whole declaration that does not parse
is skipped up to the next `;`, `,`, `|`, `}`, `|}` or `|]` and parsing
continues, so one run reports every problem it can find.
"""

import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Dict, List, Optional, Tuple

import pyparsing as pp

from wikibase_graph import (
    BuiltinDatatype, EntityId, monolingual_value, quantity_value, string_value,
)
from wshex_ast import (
    EMPTY, ONE_OR_MORE, OPEN_ANY_QUALIFIERS, OPTIONAL, ZERO_OR_MORE,
    AnyValue, Cardinality, DatatypeConstraint, EachOf, EachOfQs, EmptyPropertySpec,
    EmptyQs, EmptyTripleExpr, OneOf, OneOfQs, Openness, PropQs, QualifierSpec,
    Repeat, RepeatQs, Schema, Shape, ShapeAnd, ShapeExpr, ShapeRef, Star, StarQs,
    TripleConstraint, ValueSet, well_formed,
)
from wshex_config import WIKIBASE_ENTITY_IRI
from wshex_errors import (
    CardinalityRangeError, InvalidEntityId, SchemaNotWellFormed, SchemaSyntaxError, UnknownDatatype,
)

logger = logging.getLogger('WShEx.parser')

# ============================================================================
# DIAGNOSTICS
# ============================================================================

@dataclass(frozen=True)
class SourcePosition:
    line: int
    column: int
    byte_offset: int

    @classmethod
    def at(cls, text: str, loc: int) -> 'SourcePosition':
        loc = max(0, min(loc, len(text)))
        return cls(pp.lineno(loc, text), pp.col(loc, text), len(text[:loc].encode('utf-8')))


@dataclass(frozen=True)
class ParseDiagnostic:
    position: SourcePosition
    message: str
    expected: Tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return f"{self.position.line}:{self.position.column}: {self.message}"


# ============================================================================
# TOKENS
# ============================================================================

_PNAME_LN = re.compile(r'([A-Za-z][\w-]*)?:([A-Za-z0-9_][\w-]*)')
_STRING_LITERAL = re.compile(r'"((?:[^"\\\n]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*))?')
_CARDINALITY = re.compile(r'\{\s*(\d+)\s*(?:,\s*(\d+|\*)\s*)?\}')
_ENTITY_NAMESPACE = re.compile(r'\S+/entity/')
_ESCAPES = {'n': '\n', 't': '\t', 'r': '\r'}

LBRACE = pp.Regex(r'\{(?!\|)').set_name("'{'")
RBRACE = pp.Literal('}')
LBRACK = pp.Regex(r'\[(?!\|)').set_name("'['")
RBRACK = pp.Literal(']')
LPAR = pp.Literal('(')
RPAR = pp.Literal(')')
OPEN_QS = pp.Literal('{|')
OPEN_QS_END = pp.Literal('|}')
CLOSED_QS = pp.Literal('[|')
CLOSED_QS_END = pp.Literal('|]')
BAR = pp.Regex(r'\|(?![}\]])').set_name("'|'")
SEMI = pp.Literal(';')
COMMA = pp.Literal(',')
AND = pp.Keyword('AND')
CLOSED = pp.Keyword('CLOSED')
PREFIX = pp.CaselessKeyword('PREFIX')

IRIREF = pp.Regex(r'<[^<>"{}|^`\\\s]*>').set_name('IRI')
LABEL = pp.Regex(r'<[^<>"{}|^`\\\s]+>').set_name('shape label')
PNAME_NS = pp.Regex(r'(?:[A-Za-z][\w-]*)?:').set_name('prefix name')
PNAME_LN = pp.Regex(_PNAME_LN.pattern).set_name('prefixed name')
DATATYPE_NAME = pp.Regex(r'(?!(?:AND|CLOSED)(?![\w:]))[A-Za-z][A-Za-z0-9_]*(?![\w:])').set_name('datatype')
STRING = pp.Regex(_STRING_LITERAL.pattern).set_name('string literal')
NUMBER = pp.Regex(r'[+-]?(?:\d+(?:\.\d*)?|\.\d+)').set_name('number')
CARD = pp.Regex(r'[?*+]|' + _CARDINALITY.pattern).set_name('cardinality')

# Recovery: skip a broken item up to the next separator, keeping bracketed groups whole
BAD_TRIPLE = pp.Regex(r'(?=\S)(?:[^;{}()\[\]|]|\{[^{}]*\}|\([^()]*\)|\[[^\[\]]*\])+').set_name('triple constraint')
BAD_QUALIFIER = pp.Regex(r'(?=\S)(?:[^,{}()\[\]|]|\{[^{}]*\}|\([^()]*\)|\[[^\[\]]*\])+').set_name('qualifier constraint')
BAD_DECLARATION = pp.Regex(r'(?=\S)[^}]*\}?').set_name('shape declaration')


def fold_right(items, node):
    """Nest items into right-leaning binary nodes: [a, b, c] -> node(a, node(b, c))"""
    result = items[-1]
    for item in reversed(items[:-1]):
        result = node(item, result)
    return result


def decode_string_literal(token: str) -> Tuple[str, Optional[str]]:
    """Unescaped body and language tag (None when untagged) of a STRING token"""
    match = _STRING_LITERAL.fullmatch(token)
    body = re.sub(r'\\(.)', lambda m: _ESCAPES.get(m.group(1), m.group(1)), match.group(1))
    return body, match.group(2)


def decode_cardinality(token: str) -> Cardinality:
    """
    Cardinality of a CARD token

    Raises:
        CardinalityRangeError: bounds out of order
    """
    fixed = {'?': OPTIONAL, '*': ZERO_OR_MORE, '+': ONE_OR_MORE}
    if token in fixed:
        return fixed[token]
    match = _CARDINALITY.fullmatch(token)
    low, high = int(match.group(1)), match.group(2)
    return Cardinality(low, low if high is None else (None if high == '*' else int(high)))


def _split_cardinality(tokens) -> Tuple[list, Optional[Cardinality]]:
    items = list(tokens)
    if items and isinstance(items[-1], Cardinality):
        return items[:-1], items[-1]
    return items, None


# ============================================================================
# GRAMMAR
# ============================================================================

class _SchemaGrammar:
    """
    One grammar instance per parse

    Parse actions build the AST and record problems into `diagnostics`;
    the instance holds the prefix table as it is being declared.
    """

    def __init__(self, text: str):
        self.text = text
        self.prefixes: Dict[str, str] = {}
        self.declarations: List[Tuple[str, ShapeExpr, int]] = []
        self.diagnostics: List[ParseDiagnostic] = []
        self._quiet = 0
        self.schema = self._build()

    # ---- diagnostics -------------------------------------------------------

    def error(self, loc: int, message: str, expected: Tuple[str, ...] = ()) -> None:
        if self._quiet:
            return
        self.diagnostics.append(ParseDiagnostic(SourcePosition.at(self.text, loc), message, expected))

    def _diagnose(self, element: pp.ParserElement, what: str):
        """Parse action for a recovery token: re-run the strict element to find what went wrong"""

        def action(s, loc, toks):
            if self._quiet:
                return
            failure = None
            self._quiet += 1
            try:
                element.parse_string(s[loc:], parse_all=False)
            except pp.ParseBaseException as pe:
                failure = pe
            finally:
                self._quiet -= 1

            if failure is None:
                self.error(loc, f"invalid {what}")
            else:
                culprit = getattr(failure, 'parser_element', None)
                expected = (str(culprit),) if culprit is not None else ()
                self.error(loc + failure.loc, f"invalid {what}: {failure.msg}", expected)

        return action

    # ---- terminals ---------------------------------------------------------

    def _entity(self, loc: int, text: str) -> Optional[EntityId]:
        match = _PNAME_LN.fullmatch(text)
        prefix, local = match.group(1) or '', match.group(2)
        if prefix and prefix not in self.prefixes:
            self.error(loc, f"undeclared prefix '{prefix}:'")
        try:
            return EntityId.parse(local)
        except InvalidEntityId:
            self.error(loc, f"'{text}' does not name an item or property")
            return None

    def _predicate(self, s, loc, toks):
        entity = self._entity(loc, toks[0])
        if entity is not None and not entity.is_property:
            self.error(loc, f"predicate '{toks[0]}' is not a property")
            entity = None
        return entity or EntityId.prop(1)

    def _value(self, s, loc, toks):
        entity = self._entity(loc, toks[0])
        return entity or EntityId.item(1)

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

    def _datatype(self, s, loc, toks):
        try:
            return DatatypeConstraint(BuiltinDatatype.from_name(toks[0]))
        except UnknownDatatype:
            self.error(loc, f"unknown datatype '{toks[0]}'")
            return DatatypeConstraint(BuiltinDatatype.STRING)

    def _cardinality(self, s, loc, toks):
        try:
            return decode_cardinality(toks[0])
        except CardinalityRangeError as e:
            self.error(loc, str(e))
            return Cardinality(1, 1)

    # ---- structure ---------------------------------------------------------

    def _shape(self, s, loc, toks):
        items = list(toks)
        closed = bool(items) and isinstance(items[0], str) and items[0] == 'CLOSED'
        if closed:
            items = items[1:]
        return Shape(items[0] if items else EMPTY, closed)

    def _shape_and(self, s, loc, toks):
        atoms = list(toks)
        result = atoms[0]
        for atom in atoms[1:]:
            result = ShapeAnd(result, atom)
        return result

    def _triple_constraint(self, s, loc, toks):
        items, card = _split_cardinality(toks)
        predicate, value = items[0], items[1]
        qualifiers = items[2] if len(items) > 2 else OPEN_ANY_QUALIFIERS
        tc = TripleConstraint(predicate, value, qualifiers)
        return Repeat(tc, card) if card else tc

    def _group(self, s, loc, toks):
        items, card = _split_cardinality(toks)
        inner = items[0] if items else EMPTY
        return Repeat(inner, card) if card else inner

    def _prop_qs(self, s, loc, toks):
        items, card = _split_cardinality(toks)
        spec = PropQs(items[0], items[1])
        return RepeatQs(spec, card) if card else spec

    def _group_qs(self, s, loc, toks):
        items, card = _split_cardinality(toks)
        inner = items[0] if items else EmptyQs
        return RepeatQs(inner, card) if card else inner

    def _qualifier_block(self, openness: Openness):
        def action(s, loc, toks):
            return QualifierSpec(openness, toks[0] if toks else EmptyQs)
        return action

    def _prefix(self, s, loc, toks):
        name, iri = toks[0][:-1], toks[1][1:-1]
        self.prefixes[name] = iri
        # names resolve by local id whatever the namespace
        if not self._quiet and not _ENTITY_NAMESPACE.fullmatch(iri):
            position = SourcePosition.at(self.text, loc)
            logger.warning(f"✗ {position.line}:{position.column}: prefix '{name}:' maps to <{iri}>, "
                           f"which is not a Wikibase entity namespace")

    def _declaration(self, s, loc, toks):
        if not self._quiet:
            self.declarations.append((toks[0], toks[1], loc))

    def _build(self) -> pp.ParserElement:
        shape_expr = pp.Forward().set_name('shape expression')
        triple_expr = pp.Forward().set_name('triple expression')
        prop_spec = pp.Forward().set_name('qualifier constraints')

        label = LABEL.copy().set_parse_action(lambda t: t[0][1:-1])
        predicate = PNAME_LN.copy().set_parse_action(self._predicate).set_name('predicate')
        cardinality = CARD.copy().set_parse_action(self._cardinality)

        value = (STRING.copy().set_parse_action(self._string)
                 | NUMBER.copy().set_parse_action(self._number)
                 | PNAME_LN.copy().set_parse_action(self._value)).set_name('value')

        reference = (pp.Suppress('@') + label).set_parse_action(lambda t: ShapeRef(t[0])).set_name('shape reference')
        value_set = (pp.Suppress(LBRACK) + pp.OneOrMore(value) + pp.Suppress(RBRACK)).set_parse_action(
            lambda t: ValueSet(tuple(t))).set_name('value set')
        any_value = pp.Literal('.').set_parse_action(lambda t: AnyValue())
        shape = (pp.Opt(CLOSED) + pp.Suppress(LBRACE) + pp.Opt(triple_expr) + pp.Suppress(RBRACE)).set_parse_action(
            self._shape).set_name('shape')
        datatype = DATATYPE_NAME.copy().set_parse_action(self._datatype)

        shape_atom = reference | value_set | any_value | shape | datatype
        shape_expr <<= (shape_atom + pp.ZeroOrMore(pp.Suppress(AND) + shape_atom)).set_parse_action(self._shape_and)

        # Qualifier specifiers
        qs_unary = ((predicate + shape_expr + pp.Opt(cardinality)).set_parse_action(self._prop_qs)
                    | (pp.Suppress(LPAR) + pp.Opt(prop_spec) + pp.Suppress(RPAR) + pp.Opt(cardinality)).set_parse_action(
                        self._group_qs)).set_name('qualifier constraint')
        bad_qs = BAD_QUALIFIER.copy().set_parse_action(self._diagnose(qs_unary, 'qualifier constraint'))
        bad_qs.add_parse_action(lambda t: EmptyQs)
        qs_item = qs_unary | bad_qs
        qs_each_of = (qs_item + pp.ZeroOrMore(pp.Suppress(COMMA) + qs_item) + pp.Opt(pp.Suppress(COMMA))).set_parse_action(
            lambda t: fold_right(list(t), EachOfQs))
        prop_spec <<= (qs_each_of + pp.ZeroOrMore(pp.Suppress(BAR) + qs_each_of)).set_parse_action(
            lambda t: fold_right(list(t), OneOfQs))

        qualifier_block = (
            (pp.Suppress(OPEN_QS) + pp.Opt(prop_spec) + pp.Suppress(OPEN_QS_END)).set_parse_action(
                self._qualifier_block(Openness.OPEN))
            | (pp.Suppress(CLOSED_QS) + pp.Opt(prop_spec) + pp.Suppress(CLOSED_QS_END)).set_parse_action(
                self._qualifier_block(Openness.CLOSED))
        ).set_name('qualifier block')

        # Triple expressions
        unary_te = ((predicate + shape_expr + pp.Opt(qualifier_block) + pp.Opt(cardinality)).set_parse_action(
                        self._triple_constraint)
                    | (pp.Suppress(LPAR) + pp.Opt(triple_expr) + pp.Suppress(RPAR) + pp.Opt(cardinality)).set_parse_action(
                        self._group)).set_name('triple constraint')
        bad_te = BAD_TRIPLE.copy().set_parse_action(self._diagnose(unary_te, 'triple constraint'))
        bad_te.add_parse_action(lambda t: EMPTY)
        te_item = unary_te | bad_te
        each_of = (te_item + pp.ZeroOrMore(pp.Suppress(SEMI) + te_item) + pp.Opt(pp.Suppress(SEMI))).set_parse_action(
            lambda t: fold_right(list(t), EachOf))
        triple_expr <<= (each_of + pp.ZeroOrMore(pp.Suppress(BAR) + each_of)).set_parse_action(
            lambda t: fold_right(list(t), OneOf))

        # Declarations
        prefix_decl = (pp.Suppress(PREFIX) + PNAME_NS + IRIREF).set_parse_action(self._prefix)
        shape_decl = (label + shape_expr).set_parse_action(self._declaration).set_name('shape declaration')
        bad_decl = BAD_DECLARATION.copy().set_parse_action(self._diagnose(shape_decl, 'shape declaration'))
        schema = pp.ZeroOrMore(prefix_decl) + pp.ZeroOrMore(shape_decl | bad_decl) + pp.StringEnd()
        schema.ignore(pp.python_style_comment)

        for element in (schema, unary_te, qs_unary, shape_decl):
            element.parse_with_tabs()
        return schema

    def run(self) -> None:
        try:
            self.schema.parse_string(self.text, parse_all=True)
        except pp.ParseBaseException as pe:
            self.error(pe.loc, f"syntax error: {pe.msg}")


# ============================================================================
# PUBLIC API
# ============================================================================

def parse_schema(text: str, default_iri: str = WIKIBASE_ENTITY_IRI) -> Schema:
    """
    Parse WShEx compact syntax into a schema

    Args:
        text: Schema text
        default_iri: IRI for the `:` prefix when the text does not declare it

    Returns:
        Schema (surface form, cardinalities not yet desugared)

    Raises:
        SchemaSyntaxError: with every diagnostic found, ordered by position
        SchemaNotWellFormed: for unresolved references
    """
    grammar = _SchemaGrammar(text)
    grammar.run()

    defs: Dict[str, ShapeExpr] = {}
    for label, se, loc in grammar.declarations:
        if label in defs:
            grammar.error(loc, f"duplicate shape label <{label}>")
            continue
        defs[label] = se

    if not grammar.declarations and not grammar.diagnostics:
        grammar.error(len(text.rstrip()), "expected shape declaration", ('shape declaration',))

    if grammar.diagnostics:
        unique = sorted(set(grammar.diagnostics), key=lambda d: (d.position.byte_offset, d.message))
        logger.debug(f"✗ Schema has {len(unique)} syntax errors")
        raise SchemaSyntaxError(unique)

    schema = Schema(defs, {'': default_iri, **grammar.prefixes})
    problems = well_formed(schema)
    if problems:
        raise SchemaNotWellFormed(problems)

    logger.debug(f"✓ Parsed schema with {len(defs)} shapes")
    return schema


# ============================================================================
# RENDERING
# ============================================================================

def _quote(text: str) -> str:
    escaped = text.replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n').replace('\t', '\\t').replace('\r', '\\r')
    return f'"{escaped}"'


def render_value(value) -> str:
    if isinstance(value, EntityId):
        return f":{value}"
    if value.datatype is BuiltinDatatype.STRING:
        return _quote(value.lexical)
    if value.datatype is BuiltinDatatype.MONOLINGUAL_TEXT:
        return f"{_quote(value.structured.text)}@{value.structured.language}"
    if value.datatype is BuiltinDatatype.QUANTITY:
        return value.lexical
    raise ValueError(f"{value.datatype.value} values cannot be written in a value set")


def render_shape(se: ShapeExpr, top: bool = False) -> str:
    if isinstance(se, ShapeAnd):
        if isinstance(se.right, ShapeAnd):
            raise ValueError("right-nested AND cannot be written in compact syntax")
        return f"{render_shape(se.left, top)} AND {render_shape(se.right, top)}"
    if isinstance(se, ShapeRef):
        return f"@<{se.label}>"
    if isinstance(se, ValueSet):
        return "[ " + " ".join(render_value(v) for v in se.values) + " ]"
    if isinstance(se, DatatypeConstraint):
        return se.datatype.value
    if isinstance(se, AnyValue):
        return "."

    keyword = "CLOSED " if se.closed else ""
    if isinstance(se.expression, EmptyTripleExpr):
        return keyword + ("{\n}" if top else "{ }")
    if top:
        return keyword + "{\n  " + _render_te(se.expression, 'oneof', ' ;\n  ') + "\n}"
    return keyword + "{ " + _render_te(se.expression, 'oneof') + " }"


def _render_qualifiers(qs: QualifierSpec) -> str:
    if isinstance(qs.body, EmptyPropertySpec):
        return "" if qs.is_open else " [| |]"
    body = _render_ps(qs.body, 'oneof')
    return f" {{| {body} |}}" if qs.is_open else f" [| {body} |]"


def _operand(te) -> str:
    if isinstance(te, TripleConstraint):
        return _render_te(te, 'unary')
    if isinstance(te, EmptyTripleExpr):
        return "()"
    return f"( {_render_te(te, 'oneof')} )"


def _render_te(te, context: str, sep: str = ' ; ') -> str:
    if isinstance(te, EmptyTripleExpr):
        return "()"
    if isinstance(te, TripleConstraint):
        return f":{te.predicate} {render_shape(te.value)}{_render_qualifiers(te.qualifiers)}"
    if isinstance(te, Repeat):
        return f"{_operand(te.expr)} {te.cardinality.render()}"
    if isinstance(te, Star):
        return f"{_operand(te.expr)} *"
    if isinstance(te, OneOf) and isinstance(te.right, EmptyTripleExpr):
        return f"{_operand(te.left)} ?"
    if isinstance(te, OneOf):
        if context != 'oneof':
            return f"( {_render_te(te, 'oneof')} )"
        return f"{_render_te(te.left, 'eachof')} | {_render_te(te.right, 'oneof')}"
    # EachOf
    if context == 'unary':
        return f"( {_render_te(te, 'eachof')} )"
    return f"{_render_te(te.left, 'unary')}{sep}{_render_te(te.right, 'eachof', sep)}"


def _ps_operand(ps) -> str:
    if isinstance(ps, PropQs):
        return _render_ps(ps, 'unary')
    if isinstance(ps, EmptyPropertySpec):
        return "()"
    return f"( {_render_ps(ps, 'oneof')} )"


def _render_ps(ps, context: str) -> str:
    if isinstance(ps, EmptyPropertySpec):
        return "()"
    if isinstance(ps, PropQs):
        return f":{ps.property} {render_shape(ps.value)}"
    if isinstance(ps, RepeatQs):
        return f"{_ps_operand(ps.spec)} {ps.cardinality.render()}"
    if isinstance(ps, StarQs):
        return f"{_ps_operand(ps.spec)} *"
    if isinstance(ps, OneOfQs) and isinstance(ps.right, EmptyPropertySpec):
        return f"{_ps_operand(ps.left)} ?"
    if isinstance(ps, OneOfQs):
        if context != 'oneof':
            return f"( {_render_ps(ps, 'oneof')} )"
        return f"{_render_ps(ps.left, 'eachof')} | {_render_ps(ps.right, 'oneof')}"
    if context == 'unary':
        return f"( {_render_ps(ps, 'eachof')} )"
    return f"{_render_ps(ps.left, 'unary')}, {_render_ps(ps.right, 'eachof')}"


def render_schema(schema: Schema) -> str:
    """
    Pretty-print a schema in compact syntax

    Entities are written with the `:` prefix. Declared prefixes are
    written first, the default prefix leading.

    Raises:
        ValueError: for ASTs the parser never produces (right-nested AND,
            non-literal data values inside value sets)
    """
    lines = []
    for name in sorted(schema.prefixes, key=lambda p: (p != '', p)):
        lines.append(f"PREFIX {name}: <{schema.prefixes[name]}>")
    if lines:
        lines.append("")
    for label, se in schema.defs.items():
        lines.append(f"<{label}> {render_shape(se, top=True)}")
    return "\n".join(lines) + "\n"


def summarize_schema(schema: Schema) -> List[str]:
    """One line per shape: triple constraint count and qualifier specifiers"""
    summary = []
    for label, se in schema.defs.items():
        constraints = [node for _, node in _walk_te_constraints(se)]
        qualified = [f"{tc.predicate}{'[|..|]' if not tc.qualifiers.is_open else '{|..|}'}"
                     for tc in constraints if not isinstance(tc.qualifiers.body, EmptyPropertySpec)]
        kind = type(se).__name__
        line = f"<{label}> {kind}: {len(constraints)} triple constraints"
        if qualified:
            line += f", qualifier specs on {', '.join(qualified)}"
        summary.append(line)
    return summary


def _walk_te_constraints(se: ShapeExpr):
    """Top-level triple constraints of a shape expression (not inside nested shapes)"""
    stack = []
    if isinstance(se, Shape):
        stack.append(se.expression)
    elif isinstance(se, ShapeAnd):
        for side in (se.left, se.right):
            yield from _walk_te_constraints(side)
    while stack:
        te = stack.pop()
        if isinstance(te, TripleConstraint):
            yield None, te
        elif isinstance(te, (EachOf, OneOf)):
            stack.extend([te.right, te.left])
        elif isinstance(te, (Star, Repeat)):
            stack.append(te.expr)
