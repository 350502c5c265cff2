"""
Wikibase graph data model

A Wikibase graph holds items, properties, data values and qualified
statements. Statement values may be entities (graph nodes) or data values.
Statements keep an explicit statement id so that two statements with the
same property, value and qualifiers never collapse into one.
"""

import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple, Union

from wshex_errors import DuplicateStatementId, InvalidEntityId, UnknownDatatype

logger = logging.getLogger('WShEx.graph')

GREGORIAN_CALENDAR = 'http://www.wikidata.org/entity/Q1985727'
YEAR_PRECISION = 9

# ============================================================================
# ENTITIES AND DATATYPES
# ============================================================================

class EntityKind(Enum):
    ITEM = 'Q'
    PROPERTY = 'P'


_ENTITY_ID_RE = re.compile(r'^([QP])([1-9][0-9]*)$')


@dataclass(frozen=True, order=True)
class EntityId:
    """Item (Q<n>) or property (P<n>) identifier"""

    kind: EntityKind
    numeric_id: int

    def __post_init__(self):
        if self.numeric_id < 1:
            raise InvalidEntityId(f"entity numbers start at 1, got {self.numeric_id}")

    @classmethod
    def parse(cls, text: str) -> 'EntityId':
        """
        Parse the rendered form of an entity id

        Args:
            text: Id such as 'Q80' or 'P31'

        Returns:
            EntityId

        Raises:
            InvalidEntityId: if text is not Q<n> or P<n> with n >= 1
        """
        match = _ENTITY_ID_RE.match(text.strip()) if isinstance(text, str) else None
        if not match:
            raise InvalidEntityId(f"not an item or property id: {text!r}")
        return cls(EntityKind(match.group(1)), int(match.group(2)))

    @classmethod
    def item(cls, numeric_id: int) -> 'EntityId':
        return cls(EntityKind.ITEM, numeric_id)

    @classmethod
    def prop(cls, numeric_id: int) -> 'EntityId':
        return cls(EntityKind.PROPERTY, numeric_id)

    @property
    def is_property(self) -> bool:
        return self.kind is EntityKind.PROPERTY

    def __str__(self) -> str:
        return f"{self.kind.value}{self.numeric_id}"


class BuiltinDatatype(Enum):
    """Wikibase built-in datatypes, named as in the compact syntax"""

    STRING = 'String'
    TIME = 'Time'
    QUANTITY = 'Quantity'
    MONOLINGUAL_TEXT = 'MonolingualText'
    URL = 'URL'
    EXTERNAL_IDENTIFIER = 'ExternalIdentifier'
    GLOBE_COORDINATE = 'GlobeCoordinate'
    COMMONS_MEDIA = 'CommonsMedia'
    MATHEMATICAL_EXPRESSION = 'MathematicalExpression'
    GEOGRAPHIC_SHAPE = 'GeographicShape'
    MUSICAL_NOTATION = 'MusicalNotation'
    TABULAR_DATA = 'TabularData'
    ITEM = 'Item'
    PROPERTY = 'Property'
    LEXEME = 'Lexeme'
    FORM = 'Form'
    SENSE = 'Sense'

    @classmethod
    def from_name(cls, name: str) -> 'BuiltinDatatype':
        """
        Resolve a compact-syntax datatype name

        Raises:
            UnknownDatatype: for names outside the enumeration
        """
        try:
            return cls(name)
        except ValueError:
            raise UnknownDatatype(f"unknown datatype {name!r}") from None


# Snak "datatype" field of the JSON dumps -> built-in datatype
SNAK_DATATYPES: Dict[str, BuiltinDatatype] = {
    'string': BuiltinDatatype.STRING,
    'time': BuiltinDatatype.TIME,
    'quantity': BuiltinDatatype.QUANTITY,
    'monolingualtext': BuiltinDatatype.MONOLINGUAL_TEXT,
    'url': BuiltinDatatype.URL,
    'external-id': BuiltinDatatype.EXTERNAL_IDENTIFIER,
    'globe-coordinate': BuiltinDatatype.GLOBE_COORDINATE,
    'commonsMedia': BuiltinDatatype.COMMONS_MEDIA,
    'math': BuiltinDatatype.MATHEMATICAL_EXPRESSION,
    'geo-shape': BuiltinDatatype.GEOGRAPHIC_SHAPE,
    'musical-notation': BuiltinDatatype.MUSICAL_NOTATION,
    'tabular-data': BuiltinDatatype.TABULAR_DATA,
    'wikibase-item': BuiltinDatatype.ITEM,
    'wikibase-property': BuiltinDatatype.PROPERTY,
    'wikibase-lexeme': BuiltinDatatype.LEXEME,
    'wikibase-form': BuiltinDatatype.FORM,
    'wikibase-sense': BuiltinDatatype.SENSE,
}

# ============================================================================
# DATA VALUES
# ============================================================================

@dataclass(frozen=True)
class TimeValue:
    timestamp: str
    precision: int
    calendar_model: Optional[str] = None


@dataclass(frozen=True)
class QuantityValue:
    amount: Decimal
    unit: Optional[EntityId] = None


@dataclass(frozen=True)
class MonolingualTextValue:
    text: str
    language: str


@dataclass(frozen=True)
class GlobeCoordinateValue:
    latitude: float
    longitude: float
    precision: Optional[float] = None
    globe: Optional[str] = None


_STRUCTURED_TYPES = {
    BuiltinDatatype.TIME: TimeValue,
    BuiltinDatatype.QUANTITY: QuantityValue,
    BuiltinDatatype.MONOLINGUAL_TEXT: MonolingualTextValue,
    BuiltinDatatype.GLOBE_COORDINATE: GlobeCoordinateValue,
}


@dataclass(frozen=True)
class DataValue:
    """A non-entity value: lexical form plus an optional structured record"""

    datatype: BuiltinDatatype
    lexical: str
    structured: Optional[Union[TimeValue, QuantityValue, MonolingualTextValue, GlobeCoordinateValue]] = None

    def __post_init__(self):
        if not self.lexical:
            raise ValueError("data values need a non-empty lexical form")
        if self.structured is not None:
            expected = _STRUCTURED_TYPES.get(self.datatype)
            if expected is None or not isinstance(self.structured, expected):
                raise ValueError(
                    f"{type(self.structured).__name__} does not describe a {self.datatype.value} value")

    def same_value(self, other: 'DataValue') -> bool:
        """
        Value equality used by value sets: amounts compare numerically, texts by text and language

        A quantity without a unit matches the same amount in any unit, so a
        value-set literal such as 1.5 accepts 1.5 metres and 1.5 kilograms.
        Two quantities that both carry a unit must agree on it.
        """
        if not isinstance(other, DataValue) or other.datatype is not self.datatype:
            return False
        mine, theirs = self.structured, other.structured
        if isinstance(mine, QuantityValue) and isinstance(theirs, QuantityValue):
            return mine.amount == theirs.amount and (mine.unit is None or theirs.unit is None or mine.unit == theirs.unit)
        if isinstance(mine, MonolingualTextValue) and isinstance(theirs, MonolingualTextValue):
            return mine.text == theirs.text and mine.language == theirs.language
        if isinstance(mine, TimeValue) and isinstance(theirs, TimeValue):
            return mine.timestamp == theirs.timestamp
        return self.lexical == other.lexical

    def __str__(self) -> str:
        return self.lexical


Value = Union[EntityId, DataValue]


def value_sort_key(value: Value) -> Tuple:
    """Total order over values, used wherever a deterministic iteration order is needed"""
    if isinstance(value, EntityId):
        return (0, value.kind.value, value.numeric_id, '')
    return (1, value.datatype.value, 0, value.lexical)


def time_value(year: int, precision: int = YEAR_PRECISION) -> DataValue:
    """Build a Gregorian time value for the first day of a year, as Wikibase dumps encode it"""
    timestamp = f"+{year:04d}-01-01T00:00:00Z"
    return DataValue(BuiltinDatatype.TIME, timestamp, TimeValue(timestamp, precision, GREGORIAN_CALENDAR))


def string_value(text: str) -> DataValue:
    return DataValue(BuiltinDatatype.STRING, text)


def quantity_value(amount, unit: Optional[EntityId] = None) -> DataValue:
    amount = Decimal(str(amount))
    return DataValue(BuiltinDatatype.QUANTITY, str(amount), QuantityValue(amount, unit))


def monolingual_value(text: str, language: str) -> DataValue:
    return DataValue(BuiltinDatatype.MONOLINGUAL_TEXT, text, MonolingualTextValue(text, language))


# ============================================================================
# STATEMENTS
# ============================================================================

class Rank(Enum):
    PREFERRED = 'preferred'
    NORMAL = 'normal'
    DEPRECATED = 'deprecated'


@dataclass(frozen=True)
class Qualifier:
    property: EntityId
    value: Value

    def __post_init__(self):
        if not self.property.is_property:
            raise InvalidEntityId(f"qualifier property must be a property id, got {self.property}")

    def sort_key(self) -> Tuple:
        return (self.property.numeric_id,) + value_sort_key(self.value)

    def __str__(self) -> str:
        return f"{self.property}:{self.value}"


@dataclass(frozen=True)
class Statement:
    """One qualified statement: subject, property, value and a set of qualifiers"""

    statement_id: str
    subject: EntityId
    property: EntityId
    value: Value
    qualifiers: FrozenSet[Qualifier] = frozenset()
    rank: Rank = Rank.NORMAL

    def __post_init__(self):
        if not self.property.is_property:
            raise InvalidEntityId(f"statement property must be a property id, got {self.property}")
        if not isinstance(self.qualifiers, frozenset):
            object.__setattr__(self, 'qualifiers', frozenset(self.qualifiers))

    def __str__(self) -> str:
        quals = ', '.join(str(q) for q in sorted(self.qualifiers, key=Qualifier.sort_key))
        return f"({self.subject}, {self.property}, {self.value}, {{{quals}}})"


# ============================================================================
# GRAPH
# ============================================================================

class WikibaseGraph:
    """Items, properties, data values and statements indexed by subject"""

    def __init__(self, statements: Iterable[Statement] = ()):
        self.items: Set[EntityId] = set()
        self.properties: Set[EntityId] = set()
        self.data_values: Set[DataValue] = set()
        self._by_subject: Dict[EntityId, List[Statement]] = {}
        self._neighbourhoods: Dict[EntityId, FrozenSet[Statement]] = {}
        self._statement_ids: Set[str] = set()
        for statement in statements:
            self.add_statement(statement)

    def register_entity(self, entity: EntityId) -> None:
        """Add an entity to items or properties"""
        if entity.is_property:
            self.properties.add(entity)
        else:
            self.items.add(entity)

    def _register_value(self, value: Value) -> None:
        if isinstance(value, EntityId):
            self.register_entity(value)
        else:
            self.data_values.add(value)

    def add_statement(self, statement: Statement) -> 'WikibaseGraph':
        """
        Add a statement, registering every entity it mentions

        Args:
            statement: Statement to add

        Returns:
            The graph itself, so calls can be chained

        Raises:
            DuplicateStatementId: if the statement id is already used
        """
        if statement.statement_id in self._statement_ids:
            raise DuplicateStatementId(statement.statement_id)

        self._statement_ids.add(statement.statement_id)
        self._by_subject.setdefault(statement.subject, []).append(statement)
        self._neighbourhoods.pop(statement.subject, None)

        self.register_entity(statement.subject)
        self.register_entity(statement.property)
        self._register_value(statement.value)
        for qualifier in statement.qualifiers:
            self.register_entity(qualifier.property)
            self._register_value(qualifier.value)

        return self

    def neighs(self, node: Value) -> FrozenSet[Statement]:
        """
        Statements whose subject is node

        Unknown nodes and data values have no statements.
        """
        if not isinstance(node, EntityId):
            return frozenset()
        cached = self._neighbourhoods.get(node)
        if cached is None:
            cached = frozenset(self._by_subject.get(node, ()))
            self._neighbourhoods[node] = cached
        return cached

    @property
    def statements(self) -> Iterator[Statement]:
        for statements in self._by_subject.values():
            yield from statements

    def subjects(self) -> List[EntityId]:
        """Entities with at least one statement, in insertion order"""
        return list(self._by_subject)

    @property
    def entities(self) -> Set[EntityId]:
        return self.items | self.properties

    def __len__(self) -> int:
        return len(self._statement_ids)

    def __contains__(self, statement: Statement) -> bool:
        return statement in self.neighs(statement.subject)


# ============================================================================
# EXAMPLE GRAPH
# ============================================================================

# Tim Berners-Lee, some employers and awards
TIM_BL = EntityId.item(80)
VINT_CERF = EntityId.item(92743)
LONDON = EntityId.item(84)
CERN = EntityId.item(42944)
UK = EntityId.item(145)
SPAIN = EntityId.item(29)
PRINCESS_OF_ASTURIAS = EntityId.item(329157)
HUMAN = EntityId.item(5)
NEW_HAVEN = EntityId.item(49145)

INSTANCE_OF = EntityId.prop(31)
BIRTH_DATE = EntityId.prop(569)
BIRTH_PLACE = EntityId.prop(19)
COUNTRY = EntityId.prop(27)
EMPLOYER = EntityId.prop(108)
AWARDED = EntityId.prop(166)
START = EntityId.prop(580)
END = EntityId.prop(582)
POINT_TIME = EntityId.prop(585)
TOGETHER_WITH = EntityId.prop(1706)


def fixture_statements() -> List[Statement]:
    """The eleven statements of the Tim Berners-Lee example graph"""
    return [
        Statement('Q80$8c2b1f0e', TIM_BL, INSTANCE_OF, HUMAN),
        Statement('Q80$3b9d6a51', TIM_BL, BIRTH_DATE, time_value(1955)),
        Statement('Q80$e07c4d92', TIM_BL, BIRTH_PLACE, LONDON),
        Statement('Q80$1a6f38c7', TIM_BL, EMPLOYER, CERN,
                  frozenset({Qualifier(START, time_value(1980)), Qualifier(END, time_value(1980))})),
        Statement('Q80$4fe7940f', TIM_BL, EMPLOYER, CERN,
                  frozenset({Qualifier(START, time_value(1984)), Qualifier(END, time_value(1994))})),
        Statement('Q80$9d41e2b3', TIM_BL, AWARDED, PRINCESS_OF_ASTURIAS,
                  frozenset({Qualifier(POINT_TIME, time_value(2002)), Qualifier(TOGETHER_WITH, VINT_CERF)})),
        Statement('Q84$5f2a09cd', LONDON, COUNTRY, UK),
        Statement('Q92743$2c7e5b18', VINT_CERF, INSTANCE_OF, HUMAN),
        Statement('Q92743$b83f6a04', VINT_CERF, BIRTH_PLACE, NEW_HAVEN),
        Statement('Q42944$7e19c3a6', CERN, AWARDED, PRINCESS_OF_ASTURIAS,
                  frozenset({Qualifier(POINT_TIME, time_value(2013))})),
        Statement('Q329157$04d8b7e2', PRINCESS_OF_ASTURIAS, COUNTRY, SPAIN),
    ]


def load_fixture_graph() -> WikibaseGraph:
    """
    Build the Tim Berners-Lee example graph

    Returns:
        Graph with the example's statements; years are Time values with year precision
    """
    graph = WikibaseGraph(fixture_statements())
    logger.debug(f"Fixture graph: {len(graph)} statements, {len(graph.items)} items, "
                 f"{len(graph.properties)} properties")
    return graph
