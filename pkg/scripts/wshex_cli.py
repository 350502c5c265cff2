"""
WShEx command line

Subcommands:
    parse     check a WShEx schema and summarize it
    validate  validate entities of a JSON dump against one shape
    convert   convert a ShEx entity schema to WShEx
    fetch     download entity documents into a dump file

Usage:
    python scripts/wshex_cli.py parse data/example_schema.wshex --render
    python scripts/wshex_cli.py validate --schema data/example_schema.wshex \\
        --data data/example_dump.json --shape Person --all
    python scripts/wshex_cli.py convert data/researcher.shex -o out.wshex
    python scripts/wshex_cli.py fetch Q80 Q84 -o data/sample_dump.json

Exit codes: 0 clean, 1 non-conforming targets / rejected constraints /
missing entities, 2 usage or parse errors, 3 I/O errors, 4 step budget
exhausted. Reports go to standard output, diagnostics and logs to
standard error.
"""

import argparse
import json
import logging
import os
import sys
import time
from enum import IntEnum
from pathlib import Path
from typing import List, Optional

from dump_ingest import IngestMode, IngestOptions, IngestStats, load_graph, local_record, stream_validate
from entity_fetcher import fetch_to_dump, load_entity_ids
from shex_convert import convert_text
from wikibase_graph import EntityId
from wshex_ast import Schema
from wshex_config import ENTITY_IDS_FILE, LOG_TO_FILE, setup_logging, step_budget_from_env
from wshex_errors import (
    InvalidEntityId, MalformedLine, SchemaNotWellFormed, SchemaSyntaxError, ShExSyntaxError,
)
from wshex_parser import parse_schema, render_schema, summarize_schema
from wshex_validator import EngineOptions, ValidationReport, ValidationStatus, summarize_report, validate

logger = logging.getLogger('WShEx.cli')


class ExitCode(IntEnum):
    OK = 0
    NON_CONFORMING = 1
    USAGE = 2
    IO_ERROR = 3
    ENGINE_LIMIT = 4


class _CommandError(Exception):
    """Ends a command with an exit code after its diagnostics were written"""

    def __init__(self, code: ExitCode):
        super().__init__(code.name)
        self.code = code

# ============================================================================
# DIAGNOSTICS
# ============================================================================

def _error(message: str, path: Optional[Path] = None) -> None:
    prefix = f"{path}: " if path else ""
    print(f"{prefix}error: {message}", file=sys.stderr)


def _report_position(path: Path, position, kind: str, message: str) -> None:
    where = f"{path}:{position.line}:{position.column}" if position else str(path)
    print(f"{where}: {kind}: {message}", file=sys.stderr)


def _read_text(path: Path) -> str:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        logger.error(f"✗ Cannot read {path}: {e}")
        _error(f"cannot read file: {e.strerror or e}", path)
        raise _CommandError(ExitCode.IO_ERROR)


def _load_schema(path: Path) -> Schema:
    text = _read_text(path)
    try:
        return parse_schema(text)
    except SchemaSyntaxError as e:
        for diagnostic in e.diagnostics:
            _report_position(path, diagnostic.position, 'error', diagnostic.message)
        logger.error(f"✗ {path}: {len(e.diagnostics)} syntax errors")
        raise _CommandError(ExitCode.USAGE)
    except SchemaNotWellFormed as e:
        for diagnostic in e.diagnostics:
            _error(str(diagnostic), path)
        logger.error(f"✗ {path}: schema is not well formed")
        raise _CommandError(ExitCode.USAGE)

# ============================================================================
# COMMANDS
# ============================================================================

def cmd_parse(args: argparse.Namespace) -> ExitCode:
    """Summarize a schema, optionally echoing it pretty-printed"""
    schema = _load_schema(args.schema)
    for line in summarize_schema(schema):
        print(line)
    if args.render:
        print(render_schema(schema), end='')
    logger.info(f"✓ {args.schema}: {len(schema.defs)} shapes")
    return ExitCode.OK


def _targets(args: argparse.Namespace) -> List[EntityId]:
    try:
        return [EntityId.parse(target) for target in args.target or []]
    except InvalidEntityId as e:
        _error(str(e))
        raise _CommandError(ExitCode.USAGE)


def _log_summary(report: ValidationReport, stats: IngestStats, elapsed: float) -> None:
    summary = summarize_report(report)
    logger.info("=" * 60)
    logger.info("VALIDATION REPORT")
    logger.info("=" * 60)
    logger.info(f"Dump lines: {stats.lines} ({stats.entities} entities, {stats.statements} statements)")
    logger.info(f"Malformed lines: {stats.malformed_lines}, skipped snaks: {stats.skipped_snaks}")
    logger.info(f"Targets validated: {summary['targets']}")
    for status, count in summary['by_status'].items():
        logger.info(f"  {status}: {count}")
    logger.info(f"Conformance rate: {summary['conformance_rate']:.1f}%")
    logger.info(f"Total execution time: {elapsed:.2f} seconds")
    logger.info("=" * 60)


def cmd_validate(args: argparse.Namespace) -> ExitCode:
    """Validate dump entities against one shape, in full-graph or local mode"""
    try:
        budget = step_budget_from_env()
    except ValueError as e:
        _error(f"WSHEX_STEP_BUDGET: {e}")
        return ExitCode.USAGE

    schema = _load_schema(args.schema)
    if args.shape not in schema:
        _error(f"shape <{args.shape}> is not defined", args.schema)
        return ExitCode.USAGE
    targets = _targets(args)

    options = EngineOptions(step_budget=budget, literal_each_of_qs=args.pedantic)
    mode = IngestMode(args.mode)
    opts = IngestOptions(mode=mode, strict=args.strict, jobs=args.jobs)
    stats = IngestStats()
    start_time = time.time()

    try:
        with open(args.data, 'r', encoding='utf-8') as data:
            if mode is IngestMode.FULL_GRAPH:
                graph, stats = load_graph(data, opts)
                nodes = stats.entity_ids if args.all else targets
                report = validate(graph, schema, [(node, args.shape) for node in nodes], options, args.jobs)
                lines = report.to_json_lines() if args.format == 'json' else report.to_text_lines()
                for line in lines:
                    print(line)
            else:
                wanted = set(targets)
                entries = []
                for entry in stream_validate(data, schema, args.shape, opts, options, stats):
                    if not args.all and entry.node not in wanted:
                        continue
                    entries.append(entry)
                    print(json.dumps(local_record(entry)) if args.format == 'json' else entry.to_text())
                report = ValidationReport(entries)
                for missing in sorted(wanted - {entry.node for entry in entries}, key=str):
                    logger.warning(f"✗ Target {missing} not found in {args.data}")
    except OSError as e:
        logger.error(f"✗ Cannot read {args.data}: {e}")
        _error(f"cannot read file: {e.strerror or e}", args.data)
        return ExitCode.IO_ERROR
    except MalformedLine as e:
        _report_position(args.data, None, 'error', str(e))
        return ExitCode.USAGE

    _log_summary(report, stats, time.time() - start_time)
    if report.count(ValidationStatus.ENGINE_LIMIT):
        return ExitCode.ENGINE_LIMIT
    if report.count(ValidationStatus.NON_CONFORMING):
        return ExitCode.NON_CONFORMING
    return ExitCode.OK


def cmd_convert(args: argparse.Namespace) -> ExitCode:
    """Convert a ShEx entity schema; notes and rejections go to standard error"""
    text = _read_text(args.input)
    try:
        report = convert_text(text)
    except ShExSyntaxError as e:
        for diagnostic in e.diagnostics:
            _report_position(args.input, diagnostic.position, 'error', diagnostic.message)
        return ExitCode.USAGE

    for note in report.notes:
        _report_position(args.input, note.position, 'note', f"<{note.shape}> {note.message}")
    for rejection in report.rejected:
        detail = f": {rejection.message}" if rejection.message else ""
        _report_position(args.input, rejection.position, 'rejected',
                         f"<{rejection.shape}> {rejection.constraint} ({rejection.reason.value}){detail}")

    output = report.render()
    if args.output:
        try:
            args.output.parent.mkdir(parents=True, exist_ok=True)
            args.output.write_text(output, encoding='utf-8')
        except OSError as e:
            _error(f"cannot write file: {e.strerror or e}", args.output)
            return ExitCode.IO_ERROR
        logger.info(f"✓ Wrote {args.output}")
    else:
        print(output, end='')

    logger.info(f"Converted {len(report.converted.defs)} shapes: {report.mapped_constraints}/"
                f"{report.input_constraints} constraints mapped, {len(report.notes)} notes, "
                f"{len(report.rejected)} rejections")
    return ExitCode.OK if report.clean else ExitCode.NON_CONFORMING


def cmd_fetch(args: argparse.Namespace) -> ExitCode:
    """Download entity documents into a framed dump"""
    ids = list(args.ids)
    ids_file = args.ids_file or (None if ids else ENTITY_IDS_FILE)
    try:
        ids = [str(EntityId.parse(entity_id)) for entity_id in ids]
        if ids_file:
            ids += load_entity_ids(ids_file)
    except InvalidEntityId as e:
        _error(str(e), ids_file)
        return ExitCode.USAGE
    except OSError as e:
        _error(f"cannot read file: {e.strerror or e}", ids_file)
        return ExitCode.IO_ERROR
    if not ids:
        _error("no entity ids given")
        return ExitCode.USAGE

    try:
        result = fetch_to_dump(ids, args.output)
    except OSError as e:
        _error(f"cannot write file: {e.strerror or e}", args.output)
        return ExitCode.IO_ERROR

    if result['missing']:
        logger.warning(f"✗ Missing entities: {', '.join(result['missing'])}")
        return ExitCode.NON_CONFORMING
    return ExitCode.OK

# ============================================================================
# ARGUMENTS
# ============================================================================

def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='wshex', description='WShEx schema toolkit for Wikibase data')
    parser.add_argument('--no-log-file', action='store_true', help='do not write a log file under logs/')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('parse', help='check a WShEx schema and summarize it')
    p.add_argument('schema', type=Path)
    p.add_argument('--render', action='store_true', help='echo the pretty-printed schema')
    p.set_defaults(func=cmd_parse)

    v = commands.add_parser('validate', help='validate dump entities against a shape')
    v.add_argument('--schema', type=Path, required=True)
    v.add_argument('--data', type=Path, required=True, help='JSON entity dump, one entity per line')
    v.add_argument('--shape', required=True, help='shape label, without angle brackets')
    which = v.add_mutually_exclusive_group(required=True)
    which.add_argument('--target', nargs='+', metavar='ID', help='entity ids to validate')
    which.add_argument('--all', action='store_true', help='validate every entity in the dump')
    v.add_argument('--mode', choices=[m.value for m in IngestMode], default=IngestMode.FULL_GRAPH.value)
    v.add_argument('--format', choices=['text', 'json'], default='text')
    v.add_argument('--pedantic', action='store_true',
                   help='check both sides of an EachOfQs against the same qualifier set')
    v.add_argument('--strict', action='store_true', help='stop at the first malformed dump line')
    v.add_argument('--jobs', type=_positive_int, default=os.cpu_count() or 1)
    v.set_defaults(func=cmd_validate)

    c = commands.add_parser('convert', help='convert a ShEx entity schema to WShEx')
    c.add_argument('input', type=Path)
    c.add_argument('-o', '--output', type=Path)
    c.set_defaults(func=cmd_convert)

    f = commands.add_parser('fetch', help='download entity documents into a dump file')
    f.add_argument('ids', nargs='*', metavar='ID')
    f.add_argument('--ids-file', type=Path, help=f'one id per line (default {ENTITY_IDS_FILE.name} when no ids)')
    f.add_argument('-o', '--output', type=Path, required=True)
    f.set_defaults(func=cmd_fetch)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else ExitCode.USAGE

    setup_logging(log_to_file=LOG_TO_FILE and not args.no_log_file)
    try:
        return int(args.func(args))
    except _CommandError as e:
        return int(e.code)


if __name__ == "__main__":
    sys.exit(main())
