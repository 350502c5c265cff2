"""
WShEx abstract syntax

Shape expressions, triple expressions and qualifier specifiers, plus the
surface-only cardinality nodes produced by the compact-syntax parser.
`desugar` rewrites cardinalities into the core grammar (EachOf, OneOf,
Star, Empty) that the validator works on.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple, Union

from wikibase_graph import BuiltinDatatype, EntityId, Value
from wshex_errors import CardinalityRangeError, InvalidEntityId

# ============================================================================
# NODE CONSTRAINTS AND SHAPE EXPRESSIONS
# ============================================================================

@dataclass(frozen=True)
class ValueSet:
    values: Tuple[Value, ...]


@dataclass(frozen=True)
class DatatypeConstraint:
    datatype: BuiltinDatatype


@dataclass(frozen=True)
class AnyValue:
    """Wildcard `.`"""


NodeConstraint = Union[ValueSet, DatatypeConstraint, AnyValue]


@dataclass(frozen=True)
class ShapeAnd:
    left: 'ShapeExpr'
    right: 'ShapeExpr'


@dataclass(frozen=True)
class ShapeRef:
    label: str


@dataclass(frozen=True)
class Shape:
    expression: 'TripleExpr'
    closed: bool = False


ShapeExpr = Union[ValueSet, DatatypeConstraint, AnyValue, ShapeAnd, ShapeRef, Shape]

# ============================================================================
# CARDINALITIES (surface syntax only)
# ============================================================================

@dataclass(frozen=True)
class Cardinality:
    min: int
    max: Optional[int]  # None is unbounded

    def __post_init__(self):
        if self.min < 0:
            raise CardinalityRangeError(f"negative cardinality {self.min}")
        if self.max is not None and self.min > self.max:
            raise CardinalityRangeError(f"cardinality {{{self.min},{self.max}}} has min > max")

    def render(self) -> str:
        if self == OPTIONAL:
            return '?'
        if self == ZERO_OR_MORE:
            return '*'
        if self == ONE_OR_MORE:
            return '+'
        if self.max is None:
            return f"{{{self.min},*}}"
        if self.min == self.max:
            return f"{{{self.min}}}"
        return f"{{{self.min},{self.max}}}"


EXACTLY_ONE = Cardinality(1, 1)
OPTIONAL = Cardinality(0, 1)
ZERO_OR_MORE = Cardinality(0, None)
ONE_OR_MORE = Cardinality(1, None)

# ============================================================================
# QUALIFIER SPECIFIERS
# ============================================================================

class Openness(Enum):
    OPEN = 'open'
    CLOSED = 'closed'


@dataclass(frozen=True)
class EachOfQs:
    left: 'PropertySpec'
    right: 'PropertySpec'


@dataclass(frozen=True)
class OneOfQs:
    left: 'PropertySpec'
    right: 'PropertySpec'


@dataclass(frozen=True)
class StarQs:
    spec: 'PropertySpec'


@dataclass(frozen=True)
class PropQs:
    property: EntityId
    value: ShapeExpr

    def __post_init__(self):
        if not self.property.is_property:
            raise InvalidEntityId(f"qualifier constraint needs a property id, got {self.property}")


@dataclass(frozen=True)
class EmptyPropertySpec:
    pass


EmptyQs = EmptyPropertySpec()


@dataclass(frozen=True)
class RepeatQs:
    spec: 'PropertySpec'
    cardinality: Cardinality


PropertySpec = Union[EachOfQs, OneOfQs, StarQs, PropQs, EmptyPropertySpec, RepeatQs]


@dataclass(frozen=True)
class QualifierSpec:
    openness: Openness
    body: PropertySpec = EmptyQs

    @property
    def is_open(self) -> bool:
        return self.openness is Openness.OPEN


OPEN_ANY_QUALIFIERS = QualifierSpec(Openness.OPEN, EmptyQs)

# ============================================================================
# TRIPLE EXPRESSIONS
# ============================================================================

@dataclass(frozen=True)
class EachOf:
    left: 'TripleExpr'
    right: 'TripleExpr'


@dataclass(frozen=True)
class OneOf:
    left: 'TripleExpr'
    right: 'TripleExpr'


@dataclass(frozen=True)
class Star:
    expr: 'TripleExpr'


@dataclass(frozen=True)
class TripleConstraint:
    predicate: EntityId
    value: ShapeExpr
    qualifiers: QualifierSpec = OPEN_ANY_QUALIFIERS

    def __post_init__(self):
        if not self.predicate.is_property:
            raise InvalidEntityId(f"triple constraint needs a property id, got {self.predicate}")


@dataclass(frozen=True)
class EmptyTripleExpr:
    pass


EMPTY = EmptyTripleExpr()


@dataclass(frozen=True)
class Repeat:
    expr: 'TripleExpr'
    cardinality: Cardinality


TripleExpr = Union[EachOf, OneOf, Star, TripleConstraint, EmptyTripleExpr, Repeat]

# ============================================================================
# SCHEMA
# ============================================================================

@dataclass
class Schema:
    """Shape labels mapped to their definitions, plus the prefix table"""

    defs: Dict[str, ShapeExpr]
    prefixes: Dict[str, str] = field(default_factory=dict)

    @property
    def labels(self) -> List[str]:
        return list(self.defs)

    def __getitem__(self, label: str) -> ShapeExpr:
        return self.defs[label]

    def __contains__(self, label: str) -> bool:
        return label in self.defs


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    label: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"<{self.label}> {self.path}: {self.message}"


# ============================================================================
# AUXILIARY FUNCTIONS
# ============================================================================

def preds_te(te: TripleExpr) -> FrozenSet[EntityId]:
    """Predicates of every triple constraint inside te"""
    if isinstance(te, TripleConstraint):
        return frozenset({te.predicate})
    if isinstance(te, (EachOf, OneOf)):
        return preds_te(te.left) | preds_te(te.right)
    if isinstance(te, (Star, Repeat)):
        return preds_te(te.expr)
    return frozenset()


def preds_ps(ps: PropertySpec) -> FrozenSet[EntityId]:
    """Properties of every PropQs inside ps"""
    if isinstance(ps, PropQs):
        return frozenset({ps.property})
    if isinstance(ps, (EachOfQs, OneOfQs)):
        return preds_ps(ps.left) | preds_ps(ps.right)
    if isinstance(ps, (StarQs, RepeatQs)):
        return preds_ps(ps.spec)
    return frozenset()


def min_size(te: TripleExpr) -> int:
    """Fewest statements a core triple expression can match"""
    if isinstance(te, TripleConstraint):
        return 1
    if isinstance(te, EachOf):
        return min_size(te.left) + min_size(te.right)
    if isinstance(te, OneOf):
        return min(min_size(te.left), min_size(te.right))
    return 0


def max_size(te: TripleExpr) -> Optional[int]:
    """Most statements a core triple expression can match, None when unbounded"""
    if isinstance(te, TripleConstraint):
        return 1
    if isinstance(te, (EachOf, OneOf)):
        left, right = max_size(te.left), max_size(te.right)
        if left is None or right is None:
            return None
        return left + right if isinstance(te, EachOf) else max(left, right)
    if isinstance(te, Star):
        return 0 if max_size(te.expr) == 0 else None
    return 0


def min_size_ps(ps: PropertySpec) -> int:
    if isinstance(ps, PropQs):
        return 1
    if isinstance(ps, EachOfQs):
        return min_size_ps(ps.left) + min_size_ps(ps.right)
    if isinstance(ps, OneOfQs):
        return min(min_size_ps(ps.left), min_size_ps(ps.right))
    return 0


def max_size_ps(ps: PropertySpec) -> Optional[int]:
    if isinstance(ps, PropQs):
        return 1
    if isinstance(ps, (EachOfQs, OneOfQs)):
        left, right = max_size_ps(ps.left), max_size_ps(ps.right)
        if left is None or right is None:
            return None
        return left + right if isinstance(ps, EachOfQs) else max(left, right)
    if isinstance(ps, StarQs):
        return 0 if max_size_ps(ps.spec) == 0 else None
    return 0


# ============================================================================
# DESUGARING
# ============================================================================

def _expand(expr, cardinality: Cardinality, each_of, one_of, star, empty):
    """m copies of expr, then n-m optional copies (or a star when unbounded), folded right"""
    pieces = [expr] * cardinality.min
    if cardinality.max is None:
        pieces.append(star(expr))
    else:
        pieces.extend([one_of(expr, empty)] * (cardinality.max - cardinality.min))

    if not pieces:
        return empty
    result = pieces[-1]
    for piece in reversed(pieces[:-1]):
        result = each_of(piece, result)
    return result


def desugar_shape(se: ShapeExpr) -> ShapeExpr:
    if isinstance(se, ShapeAnd):
        return ShapeAnd(desugar_shape(se.left), desugar_shape(se.right))
    if isinstance(se, Shape):
        return Shape(desugar(se.expression), se.closed)
    return se


def desugar_ps(ps: PropertySpec) -> PropertySpec:
    """Rewrite qualifier cardinalities into EachOfQs / OneOfQs / StarQs / EmptyQs"""
    if isinstance(ps, RepeatQs):
        return _expand(desugar_ps(ps.spec), ps.cardinality, EachOfQs, OneOfQs, StarQs, EmptyQs)
    if isinstance(ps, EachOfQs):
        return EachOfQs(desugar_ps(ps.left), desugar_ps(ps.right))
    if isinstance(ps, OneOfQs):
        return OneOfQs(desugar_ps(ps.left), desugar_ps(ps.right))
    if isinstance(ps, StarQs):
        return StarQs(desugar_ps(ps.spec))
    if isinstance(ps, PropQs):
        return PropQs(ps.property, desugar_shape(ps.value))
    return ps


def desugar(te: TripleExpr) -> TripleExpr:
    """
    Rewrite surface cardinalities into the core grammar

    `x?` becomes OneOf(x, Empty), `x+` becomes EachOf(x, Star(x)), `x{m,n}`
    becomes m copies followed by n-m optional copies and `x{m,*}` m copies
    followed by Star(x). Core expressions come back structurally equal.
    """
    if isinstance(te, Repeat):
        return _expand(desugar(te.expr), te.cardinality, EachOf, OneOf, Star, EMPTY)
    if isinstance(te, EachOf):
        return EachOf(desugar(te.left), desugar(te.right))
    if isinstance(te, OneOf):
        return OneOf(desugar(te.left), desugar(te.right))
    if isinstance(te, Star):
        return Star(desugar(te.expr))
    if isinstance(te, TripleConstraint):
        qualifiers = QualifierSpec(te.qualifiers.openness, desugar_ps(te.qualifiers.body))
        return TripleConstraint(te.predicate, desugar_shape(te.value), qualifiers)
    return te


def desugar_schema(schema: Schema) -> Schema:
    return Schema({label: desugar_shape(se) for label, se in schema.defs.items()}, dict(schema.prefixes))


# ============================================================================
# WELL-FORMEDNESS
# ============================================================================

def _walk_shape(se: ShapeExpr, path: str) -> Iterator[Tuple[str, ShapeExpr]]:
    yield path, se
    if isinstance(se, ShapeAnd):
        yield from _walk_shape(se.left, f"{path}/AND[0]")
        yield from _walk_shape(se.right, f"{path}/AND[1]")
    elif isinstance(se, Shape):
        yield from _walk_te(se.expression, f"{path}/Shape")


def _walk_te(te: TripleExpr, path: str) -> Iterator[Tuple[str, ShapeExpr]]:
    if isinstance(te, (EachOf, OneOf)):
        name = type(te).__name__
        yield from _walk_te(te.left, f"{path}/{name}[0]")
        yield from _walk_te(te.right, f"{path}/{name}[1]")
    elif isinstance(te, (Star, Repeat)):
        yield from _walk_te(te.expr, f"{path}/{type(te).__name__}")
    elif isinstance(te, TripleConstraint):
        here = f"{path}/TC({te.predicate})"
        yield from _walk_shape(te.value, here)
        yield from _walk_ps(te.qualifiers.body, here)


def _walk_ps(ps: PropertySpec, path: str) -> Iterator[Tuple[str, ShapeExpr]]:
    if isinstance(ps, (EachOfQs, OneOfQs)):
        name = type(ps).__name__
        yield from _walk_ps(ps.left, f"{path}/{name}[0]")
        yield from _walk_ps(ps.right, f"{path}/{name}[1]")
    elif isinstance(ps, (StarQs, RepeatQs)):
        yield from _walk_ps(ps.spec, f"{path}/{type(ps).__name__}")
    elif isinstance(ps, PropQs):
        yield from _walk_shape(ps.value, f"{path}/PropQs({ps.property})")


def shape_references(se: ShapeExpr) -> List[str]:
    """Labels referenced anywhere inside a shape expression"""
    return [node.label for _, node in _walk_shape(se, '') if isinstance(node, ShapeRef)]


def well_formed(schema: Schema) -> List[Diagnostic]:
    """
    Check that every reference resolves and every value set is non-empty

    Returns:
        Diagnostics, empty when the schema is well formed
    """
    diagnostics = []
    for label, se in schema.defs.items():
        for path, node in _walk_shape(se, '$'):
            if isinstance(node, ShapeRef) and node.label not in schema.defs:
                diagnostics.append(Diagnostic('UnresolvedRef', label, path,
                                              f"reference to undefined shape <{node.label}>"))
            elif isinstance(node, ValueSet) and not node.values:
                diagnostics.append(Diagnostic('EmptyValueSet', label, path, "value set is empty"))
    return diagnostics
