"""
WShEx conformance engine

Shape expressions are checked against nodes, triple expressions against
sets of statements and qualifier specifiers against sets of qualifiers.
Shape references are resolved to the greatest fixed point: every pair
reached is assumed to conform until some evaluation disproves it.

Bag matching is a backtracking search over partitions, pruned by the
predicates each side can accept and by size bounds, memoized per
refinement round and capped by a step budget.
"""

import copy
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from wikibase_graph import (
    BuiltinDatatype, DataValue, EntityId, Qualifier, Statement, Value, WikibaseGraph, value_sort_key,
)
from wshex_ast import (
    AnyValue, DatatypeConstraint, EachOf, EachOfQs, EmptyPropertySpec, EmptyTripleExpr,
    OneOf, OneOfQs, PropQs, QualifierSpec, Schema, Shape, ShapeAnd, ShapeExpr, ShapeRef,
    Star, StarQs, TripleConstraint, ValueSet, desugar_schema, max_size, max_size_ps,
    min_size, min_size_ps, preds_ps, preds_te, well_formed,
)
from wshex_config import STEP_BUDGET
from wshex_errors import EngineLimit, SchemaNotWellFormed

logger = logging.getLogger('WShEx.validator')

Pair = Tuple[Value, str]

# ============================================================================
# TYPES
# ============================================================================

class ValidationStatus(Enum):
    CONFORMING = 'conforms'
    NON_CONFORMING = 'fails'
    IN_PROGRESS = 'in-progress'
    ENGINE_LIMIT = 'engine-limit'

    @property
    def label(self) -> str:
        return {'conforms': 'CONFORMS', 'fails': 'FAILS'}.get(self.value, self.value.upper())


@dataclass(frozen=True)
class ShapeAssignment:
    """A set of (node, shape label) pairs"""

    pairs: FrozenSet[Pair] = frozenset()

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs, key=_pair_key))

    def __len__(self) -> int:
        return len(self.pairs)

    def with_pair(self, node: Value, label: str) -> 'ShapeAssignment':
        return ShapeAssignment(self.pairs | {(node, label)})


@dataclass(frozen=True)
class EngineOptions:
    step_budget: int = STEP_BUDGET
    literal_each_of_qs: bool = False  # EachOfQs checks both sides against the same qualifier set


def _pair_key(pair: Pair) -> Tuple:
    return value_sort_key(pair[0]), pair[1]


def _statement_key(statement: Statement) -> str:
    return statement.statement_id


# ============================================================================
# NODE CONSTRAINTS
# ============================================================================

def satisfies_cond(cond, value: Value) -> bool:
    """
    Evaluate a node constraint on a value

    Value sets compare entities by id and data values with
    `DataValue.same_value`; Item / Property datatypes accept entities of
    that kind; every other datatype accepts data values of that datatype.
    """
    if isinstance(cond, AnyValue):
        return True
    if isinstance(cond, ValueSet):
        for member in cond.values:
            if isinstance(member, EntityId):
                if member == value:
                    return True
            elif isinstance(value, DataValue) and member.same_value(value):
                return True
        return False
    if isinstance(cond, DatatypeConstraint):
        if cond.datatype is BuiltinDatatype.ITEM:
            return isinstance(value, EntityId) and not value.is_property
        if cond.datatype is BuiltinDatatype.PROPERTY:
            return isinstance(value, EntityId) and value.is_property
        return isinstance(value, DataValue) and value.datatype is cond.datatype
    raise TypeError(f"not a node constraint: {cond!r}")


def _describe_cond(cond) -> str:
    if isinstance(cond, DatatypeConstraint):
        return cond.datatype.value
    if isinstance(cond, ValueSet):
        return "[" + " ".join(str(v) for v in cond.values) + "]"
    return "."


# ============================================================================
# ONE EVALUATION
# ============================================================================

class _Evaluation:
    """
    Evaluates pairs under one fixed way of resolving shape references

    `resolve(node, label)` answers every reference; the memo tables are
    only valid while that answer does not change.
    """

    def __init__(self, validator: 'Validator', resolve: Callable[[Value, str], bool]):
        self.graph = validator.graph
        self.defs = validator.defs
        self.literal_each_of_qs = validator.options.literal_each_of_qs
        self.budget = validator.options.step_budget
        self.local_focus = validator.local_focus
        self.resolve = resolve

        self.steps = 0
        self.current: Optional[Pair] = None
        self.approximated = False
        self.deepest: Tuple[str, ...] = ()
        self._path: List[str] = []
        self._te_memo: Dict[Tuple[FrozenSet[Statement], int], bool] = {}
        self._ps_memo: Dict[Tuple[FrozenSet[Qualifier], int], bool] = {}
        self._preds: Dict[int, FrozenSet[EntityId]] = {}

    # ---- bookkeeping -------------------------------------------------------

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            node, label = self.current
            raise EngineLimit(node, label, self.budget)

    @contextmanager
    def _rule(self, name: str):
        self._path.append(name)
        try:
            yield
        finally:
            self._path.pop()

    def _fail(self, name: str) -> bool:
        trail = tuple(self._path) + (name,)
        if len(trail) > len(self.deepest):
            self.deepest = trail
        return False

    def _preds_te(self, te) -> FrozenSet[EntityId]:
        key = id(te)
        if key not in self._preds:
            self._preds[key] = preds_te(te)
        return self._preds[key]

    def _preds_ps(self, ps) -> FrozenSet[EntityId]:
        key = id(ps)
        if key not in self._preds:
            self._preds[key] = preds_ps(ps)
        return self._preds[key]

    # ---- shape expressions -------------------------------------------------

    def holds(self, node: Value, label: str) -> bool:
        """Does node conform to the definition of label, references answered by resolve"""
        self.steps = 0
        self.current = (node, label)
        self._path = []
        return self.conforms(node, self.defs[label])

    def conforms(self, node: Value, se: ShapeExpr) -> bool:
        self._tick()

        if isinstance(se, (ValueSet, DatatypeConstraint, AnyValue)):
            return satisfies_cond(se, node) or self._fail(f"Cond({_describe_cond(se)})")

        if isinstance(se, ShapeAnd):
            with self._rule('AND'):
                return self.conforms(node, se.left) and self.conforms(node, se.right)

        if self.local_focus is not None and isinstance(node, EntityId) and node != self.local_focus:
            # Statements of other entities are not available
            self.approximated = True
            return True

        if isinstance(se, ShapeRef):
            return self.resolve(node, se.label) or self._fail(f"Ref({se.label})")

        statements = self.graph.neighs(node)
        if se.closed:
            with self._rule('ClosedShape'):
                return self.matches_te(statements, se.expression)
        preds = self._preds_te(se.expression)
        with self._rule('OpenShape'):
            return self.matches_te(frozenset(t for t in statements if t.property in preds), se.expression)

    # ---- triple expressions ------------------------------------------------

    def matches_te(self, ts: FrozenSet[Statement], te) -> bool:
        key = (ts, id(te))
        cached = self._te_memo.get(key)
        if cached is None:
            cached = self._match_te(ts, te)
            self._te_memo[key] = cached
        return cached

    def _match_te(self, ts: FrozenSet[Statement], te) -> bool:
        if isinstance(te, EmptyTripleExpr):
            return not ts or self._fail('Empty')

        if isinstance(te, TripleConstraint):
            name = f"TripleConstraint({te.predicate})"
            if len(ts) != 1:
                return self._fail(name)
            (statement,) = ts
            if statement.property != te.predicate:
                return self._fail(name)
            with self._rule(name):
                return (self.conforms(statement.value, te.value)
                        and self.matches_qs(statement.qualifiers, te.qualifiers))

        if isinstance(te, OneOf):
            with self._rule('OneOf'):
                return self.matches_te(ts, te.left) or self.matches_te(ts, te.right)

        if isinstance(te, EachOf):
            with self._rule('EachOf'):
                return self._split(ts, te.left, te.right, self._preds_te, min_size, max_size,
                                   self.matches_te, _statement_key)

        if isinstance(te, Star):
            if not ts:
                return True
            with self._rule('Star'):
                return self._star(ts, te, te.expr, self._preds_te, min_size, max_size,
                                  self.matches_te, _statement_key)

        raise TypeError(f"not a core triple expression: {te!r}")

    # ---- partition search (shared by statements and qualifiers) ------------

    def _split(self, items, left, right, preds, lower, upper, match, sort_key) -> bool:
        """Is there a disjoint cover (A, B) of items with A matching left and B matching right"""
        left_preds, right_preds = preds(left), preds(right)
        forced_left, forced_right, free = [], [], []
        for item in sorted(items, key=sort_key):
            in_left, in_right = item.property in left_preds, item.property in right_preds
            if in_left and in_right:
                free.append(item)
            elif in_left:
                forced_left.append(item)
            elif in_right:
                forced_right.append(item)
            else:
                return self._fail(f"uncovered {item.property}")

        n = len(free)
        left_min, left_max = lower(left), upper(left)
        right_min, right_max = lower(right), upper(right)
        k_low = max(0, left_min - len(forced_left))
        k_high = min(n, len(forced_right) + n - right_min)
        if left_max is not None:
            k_high = min(k_high, left_max - len(forced_left))
        if right_max is not None:
            k_low = max(k_low, len(forced_right) + n - right_max)
        if k_low > k_high:
            return self._fail('size')

        for k in range(k_low, k_high + 1):
            for chosen in combinations(free, k):
                self._tick()
                part = frozenset(forced_left).union(chosen)
                if match(part, left) and match(items - part, right):
                    return True
        return False

    def _star(self, items, whole, inner, preds, lower, upper, match, sort_key) -> bool:
        """Split off a non-empty piece holding the smallest item, then match the rest against the star"""
        inner_preds = preds(inner)
        for item in items:
            if item.property not in inner_preds:
                return self._fail(f"uncovered {item.property}")

        ordered = sorted(items, key=sort_key)
        pivot, rest = ordered[0], ordered[1:]
        inner_max = upper(inner)
        k_low = max(0, lower(inner) - 1)
        k_high = len(rest) if inner_max is None else min(len(rest), inner_max - 1)

        for k in range(k_low, k_high + 1):
            for chosen in combinations(rest, k):
                self._tick()
                piece = frozenset(chosen).union((pivot,))
                if match(piece, inner) and match(items - piece, whole):
                    return True
        return False

    # ---- qualifiers --------------------------------------------------------

    def matches_qs(self, qualifiers: FrozenSet[Qualifier], qs: QualifierSpec) -> bool:
        if qs.is_open:
            preds = self._preds_ps(qs.body)
            with self._rule('OpenQs'):
                return self.matches_ps(frozenset(q for q in qualifiers if q.property in preds), qs.body)
        with self._rule('CloseQs'):
            return self.matches_ps(qualifiers, qs.body)

    def matches_ps(self, qualifiers: FrozenSet[Qualifier], ps) -> bool:
        key = (qualifiers, id(ps))
        cached = self._ps_memo.get(key)
        if cached is None:
            cached = self._match_ps(qualifiers, ps)
            self._ps_memo[key] = cached
        return cached

    def _match_ps(self, qualifiers: FrozenSet[Qualifier], ps) -> bool:
        if isinstance(ps, EmptyPropertySpec):
            return not qualifiers or self._fail('EmptyQs')

        if isinstance(ps, PropQs):
            name = f"PropertyQs({ps.property})"
            if len(qualifiers) != 1:
                return self._fail(name)
            (qualifier,) = qualifiers
            if qualifier.property != ps.property:
                return self._fail(name)
            with self._rule(name):
                return self.conforms(qualifier.value, ps.value)

        if isinstance(ps, OneOfQs):
            with self._rule('OneOfQs'):
                return self.matches_ps(qualifiers, ps.left) or self.matches_ps(qualifiers, ps.right)

        if isinstance(ps, EachOfQs):
            with self._rule('EachOfQs'):
                if self.literal_each_of_qs:
                    self._tick()
                    return self.matches_ps(qualifiers, ps.left) and self.matches_ps(qualifiers, ps.right)
                return self._split(qualifiers, ps.left, ps.right, self._preds_ps, min_size_ps, max_size_ps,
                                   self.matches_ps, Qualifier.sort_key)

        if isinstance(ps, StarQs):
            if not qualifiers:
                return True
            with self._rule('StarQs'):
                return self._star(qualifiers, ps, ps.spec, self._preds_ps, min_size_ps, max_size_ps,
                                  self.matches_ps, Qualifier.sort_key)

        raise TypeError(f"not a core qualifier specifier: {ps!r}")


# ============================================================================
# VALIDATOR
# ============================================================================

class Validator:
    """
    Validates (node, shape label) pairs against one graph and schema

    Verdicts are kept for the lifetime of the validator and shared between
    threads; each one is the greatest-fixed-point answer, so it does not
    depend on the order in which pairs are checked.
    """

    def __init__(self, graph: WikibaseGraph, schema: Schema, options: Optional[EngineOptions] = None,
                 local_focus: Optional[EntityId] = None):
        problems = well_formed(schema)
        if problems:
            raise SchemaNotWellFormed(problems)

        self.graph = graph
        self.schema = schema
        self.defs = desugar_schema(schema).defs
        self.options = options or EngineOptions()
        self.local_focus = local_focus
        self.approximated = False

        self._final: Dict[Pair, ValidationStatus] = {}
        self._lock = threading.Lock()

    def focused_on(self, graph: WikibaseGraph, focus: EntityId) -> 'Validator':
        """A fresh validator over one entity's statements, sharing the desugared schema"""
        clone = copy.copy(self)
        clone.graph = graph
        clone.local_focus = focus
        clone.approximated = False
        clone._final = {}
        clone._lock = threading.Lock()
        return clone

    def check(self, node: Value, label: str) -> ValidationStatus:
        """
        Decide whether node conforms to label

        Pairs reached through references start out assumed conforming; a
        round evaluates every assumed pair, pairs that fail are settled as
        non-conforming, and rounds repeat until one finds no failure and
        no new pair. The surviving pairs all conform.

        Raises:
            KeyError: unknown label
            EngineLimit: a single pair evaluation ran out of steps
        """
        if label not in self.defs:
            raise KeyError(label)

        target = (node, label)
        with self._lock:
            known = self._final.get(target)
        if known is not None:
            return known

        tentative = {target}
        rounds = 0
        while True:
            rounds += 1
            with self._lock:
                settled = dict(self._final)
            discovered = set()

            def resolve(n: Value, l: str) -> bool:
                pair = (n, l)
                verdict = settled.get(pair)
                if verdict is not None:
                    return verdict is ValidationStatus.CONFORMING
                if pair not in tentative:
                    discovered.add(pair)
                return True

            evaluation = _Evaluation(self, resolve)
            failed = [pair for pair in sorted(tentative, key=_pair_key) if not evaluation.holds(*pair)]
            if evaluation.approximated:
                self.approximated = True

            with self._lock:
                for pair in failed:
                    self._final[pair] = ValidationStatus.NON_CONFORMING
            if target in failed:
                logger.debug(f"{node}@{label} fails after {rounds} rounds")
                return ValidationStatus.NON_CONFORMING

            tentative.difference_update(failed)
            new_pairs = discovered - tentative
            if failed or new_pairs:
                tentative.update(new_pairs)
                continue

            with self._lock:
                for pair in tentative:
                    self._final[pair] = ValidationStatus.CONFORMING
            logger.debug(f"{node}@{label} conforms after {rounds} rounds ({len(tentative)} pairs settled)")
            return ValidationStatus.CONFORMING

    def explain(self, node: Value, label: str) -> Tuple[str, ...]:
        """Rule path of the deepest failure, references answered by their settled verdicts"""
        evaluation = _Evaluation(self, lambda n, l: self.check(n, l) is ValidationStatus.CONFORMING)
        if evaluation.holds(node, label):
            return ()
        return evaluation.deepest

    def assignment(self) -> ShapeAssignment:
        """The conforming pairs settled so far"""
        with self._lock:
            return ShapeAssignment(frozenset(p for p, s in self._final.items() if s is ValidationStatus.CONFORMING))

    def holds_under(self, tau: ShapeAssignment, node: Value, label: str) -> bool:
        """Evaluate one pair with every reference looked up in a fixed assignment"""
        return _Evaluation(self, lambda n, l: (n, l) in tau).holds(node, label)

    def validate_target(self, node: Value, label: str) -> 'ReportEntry':
        try:
            status = self.check(node, label)
            trace = self.explain(node, label) if status is ValidationStatus.NON_CONFORMING else ()
        except EngineLimit as e:
            logger.warning(f"✗ {e}")
            return ReportEntry(node, label, ValidationStatus.ENGINE_LIMIT, (str(e),), self.approximated)
        approx = self.approximated and status is ValidationStatus.CONFORMING
        return ReportEntry(node, label, status, trace, approx)


# ============================================================================
# REPORTS
# ============================================================================

@dataclass(frozen=True)
class ReportEntry:
    node: Value
    shape: str
    status: ValidationStatus
    trace: Tuple[str, ...] = ()
    approx: bool = False

    def to_text(self) -> str:
        line = f"{self.node}@{self.shape}: {self.status.label}"
        if self.status is not ValidationStatus.CONFORMING and self.trace:
            line += f" ({' > '.join(self.trace)})"
        if self.approx:
            line += " (local-approx)"
        return line

    def to_json(self) -> Dict:
        record = {'node': str(self.node), 'shape': self.shape, 'status': self.status.value,
                  'trace': list(self.trace)}
        if self.approx:
            record['approx'] = True
        return record


class ValidationReport:
    """One entry per requested (node, shape) target, in request order"""

    def __init__(self, entries: Iterable[ReportEntry] = ()):
        self.entries: Dict[Pair, ReportEntry] = {}
        for entry in entries:
            self.entries[(entry.node, entry.shape)] = entry

    def __getitem__(self, target: Pair) -> ReportEntry:
        return self.entries[target]

    def __iter__(self) -> Iterator[ReportEntry]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def status(self, node: Value, label: str) -> ValidationStatus:
        return self.entries[(node, label)].status

    def count(self, status: ValidationStatus) -> int:
        return sum(1 for entry in self if entry.status is status)

    def to_text_lines(self) -> List[str]:
        return [entry.to_text() for entry in self]

    def to_json_lines(self) -> List[str]:
        return [json.dumps(entry.to_json(), ensure_ascii=False) for entry in self]

    def to_frame(self) -> pd.DataFrame:
        """Entries as a DataFrame with columns node, shape, status, trace, approx"""
        records = [{'node': str(e.node), 'shape': e.shape, 'status': e.status.value,
                    'trace': ' > '.join(e.trace), 'approx': e.approx} for e in self]
        return pd.DataFrame(records, columns=['node', 'shape', 'status', 'trace', 'approx'])


def summarize_report(report: ValidationReport) -> Dict:
    """
    Counts per status and per shape, plus the share of conforming targets

    Returns:
        Dict with keys targets, by_status, by_shape, conformance_rate (percent)
    """
    df = report.to_frame()
    if df.empty:
        return {'targets': 0, 'by_status': {}, 'by_shape': {}, 'conformance_rate': 0.0}

    by_status = {status: int(count) for status, count in df['status'].value_counts().items()}
    by_shape = {
        shape: {status: int(count) for status, count in row.items() if count}
        for shape, row in pd.crosstab(df['shape'], df['status']).to_dict(orient='index').items()
    }
    rate = float((df['status'] == ValidationStatus.CONFORMING.value).mean() * 100)
    return {'targets': len(df), 'by_status': by_status, 'by_shape': by_shape,
            'conformance_rate': round(rate, 1)}


def validate(graph: WikibaseGraph, schema: Schema, targets: Sequence[Pair],
             options: Optional[EngineOptions] = None, jobs: int = 1) -> ValidationReport:
    """
    Validate every target and collect the verdicts

    Args:
        graph: Graph to validate
        schema: Well-formed schema
        targets: (node, shape label) pairs
        options: Step budget and EachOfQs reading
        jobs: Worker threads; targets share one set of settled verdicts

    Returns:
        ValidationReport with one entry per target; a target that runs out
        of steps is reported as ENGINE_LIMIT without stopping the others

    Raises:
        SchemaNotWellFormed: unresolved references or empty value sets
        KeyError: a target names an undefined shape
    """
    validator = Validator(graph, schema, options)
    for _, label in targets:
        if label not in validator.defs:
            raise KeyError(label)

    if jobs > 1 and len(targets) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda target: validator.validate_target(*target), targets))
    else:
        entries = [validator.validate_target(node, label) for node, label in targets]

    report = ValidationReport(entries)
    logger.debug(f"Validated {len(report)} targets: {report.count(ValidationStatus.CONFORMING)} conform")
    return report
