"""
Exception types raised by the WShEx toolkit
"""

from typing import List, Optional


class WShExError(Exception):
    """Base class for every error raised by the toolkit"""


class InvalidEntityId(WShExError, ValueError):
    """Text that does not spell an item (Q<n>) or property (P<n>) id"""


class UnknownDatatype(WShExError, ValueError):
    """A datatype name outside the built-in Wikibase datatypes"""


class DuplicateStatementId(WShExError):
    """A statement id already present in the graph"""

    def __init__(self, statement_id: str):
        super().__init__(f"duplicate statement id {statement_id}")
        self.statement_id = statement_id


class CardinalityRangeError(WShExError, ValueError):
    """Cardinality {m,n} with m > n"""


class SchemaSyntaxError(WShExError):
    """A WShEx compact-syntax text that does not parse"""

    def __init__(self, diagnostics: list):
        first = diagnostics[0] if diagnostics else None
        summary = str(first) if first else "syntax error"
        if len(diagnostics) > 1:
            summary += f" (and {len(diagnostics) - 1} more)"
        super().__init__(summary)
        self.diagnostics = diagnostics


class ShExSyntaxError(SchemaSyntaxError):
    """A ShEx text outside the convertible subset grammar"""


class SchemaNotWellFormed(WShExError):
    """A schema with unresolved references or empty value sets"""

    def __init__(self, diagnostics: list):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class EngineLimit(WShExError):
    """Partition search exceeded the configured step budget"""

    def __init__(self, node, label: Optional[str], steps: int):
        where = f"{node}@{label}" if label else str(node)
        super().__init__(f"step budget of {steps} exhausted while checking {where}")
        self.node = node
        self.label = label
        self.steps = steps


class MalformedLine(WShExError):
    """A dump line that is not a usable entity document"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(prefix + message)
        self.line_number = line_number


class OversizeLine(MalformedLine):
    """A dump line longer than the configured byte limit"""


class UnsupportedSnak(MalformedLine):
    """A value snak whose datavalue type is not modeled"""


class FetchError(WShExError):
    """Entity documents could not be retrieved"""

    def __init__(self, message: str, missing: Optional[List[str]] = None):
        super().__init__(message)
        self.missing = missing or []
