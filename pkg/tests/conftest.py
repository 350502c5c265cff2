"""
Shared fixtures for the WShEx test suite
"""

import logging
import os
import sys
from pathlib import Path

import pytest

os.environ.setdefault('WSHEX_LOG_TO_FILE', 'false')

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / 'scripts'))

from wikibase_graph import load_fixture_graph  # noqa: E402
from wshex_parser import parse_schema  # noqa: E402

DATA = ROOT / 'data'


@pytest.fixture(autouse=True)
def _reset_logging():
    """Handlers bind the stream that was current at setup; drop them between tests"""
    yield
    logger = logging.getLogger('WShEx')
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def fixture_graph():
    return load_fixture_graph()


@pytest.fixture(scope='session')
def example_schema_text() -> str:
    return (DATA / 'example_schema.wshex').read_text(encoding='utf-8')


@pytest.fixture(scope='session')
def optional_schema_text() -> str:
    return (DATA / 'example_schema_optional.wshex').read_text(encoding='utf-8')


@pytest.fixture
def example_schema(example_schema_text):
    return parse_schema(example_schema_text)


@pytest.fixture
def optional_schema(optional_schema_text):
    return parse_schema(optional_schema_text)


@pytest.fixture
def dump_lines():
    return (DATA / 'example_dump.json').read_text(encoding='utf-8').splitlines()
