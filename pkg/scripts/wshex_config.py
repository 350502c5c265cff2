"""
Shared configuration and logging setup for the WShEx toolkit

Every script reads its settings from here. Values come from the
environment (optionally a .env file at the project root) with defaults.
"""

import logging
import os
from datetime import datetime
from pathlib import Path

from dotenv import load_dotenv

# ============================================================================
# CONFIGURATION
# ============================================================================

# Local paths
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / 'data'
LOGS_DIR = PROJECT_ROOT / 'logs'
CONFIG_DIR = PROJECT_ROOT / 'config'
ENTITY_IDS_FILE = CONFIG_DIR / 'entity_ids.txt'

# Load environment variables
load_dotenv(PROJECT_ROOT / '.env')

DEFAULT_STEP_BUDGET = 10_000_000  # partition steps per (node, shape) evaluation
STEP_BUDGET = int(os.getenv('WSHEX_STEP_BUDGET', DEFAULT_STEP_BUDGET))
MAX_LINE_BYTES = int(os.getenv('WSHEX_MAX_LINE_BYTES', 256 * 1024 * 1024))

WIKIBASE_ENTITY_IRI = os.getenv('WSHEX_ENTITY_IRI', 'http://www.wikidata.org/entity/')

# Entity fetching
ENTITY_DATA_URL = os.getenv('WSHEX_ENTITY_DATA_URL', 'https://www.wikidata.org/wiki/Special:EntityData')
RATE_LIMIT_DELAY = float(os.getenv('WSHEX_RATE_LIMIT_DELAY', 0.55))
MAX_RETRIES = int(os.getenv('WSHEX_MAX_RETRIES', 3))
RETRY_DELAY = float(os.getenv('WSHEX_RETRY_DELAY', 5))  # seconds
REQUEST_TIMEOUT = float(os.getenv('WSHEX_REQUEST_TIMEOUT', 10))

LOG_LEVEL = os.getenv('WSHEX_LOG_LEVEL', 'INFO').upper()
LOG_TO_FILE = os.getenv('WSHEX_LOG_TO_FILE', 'true').lower() in ('1', 'true', 'yes')

LOGGER_NAME = 'WShEx'


def step_budget_from_env() -> int:
    """
    Read the partition step budget at call time

    The CLI calls this on every run so that WSHEX_STEP_BUDGET set after
    import still applies.

    Returns:
        Positive step budget

    Raises:
        ValueError: if the variable is not a positive integer
    """
    raw = os.getenv('WSHEX_STEP_BUDGET')
    if raw is None:
        return STEP_BUDGET
    budget = int(raw)
    if budget <= 0:
        raise ValueError(f"WSHEX_STEP_BUDGET must be positive, got {raw}")
    return budget


# ============================================================================
# LOGGING SETUP
# ============================================================================

def setup_logging(log_to_file: bool = LOG_TO_FILE) -> logging.Logger:
    """Configure the WShEx logger to write to console and (optionally) a log file"""

    logger = logging.getLogger(LOGGER_NAME)
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)

    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Console handler (standard error; standard output carries reports)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_to_file:
        LOGS_DIR.mkdir(exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        log_file = LOGS_DIR / f"wshex_{timestamp}.log"

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

        logger.debug(f"Logging initialized. Log file: {log_file}")

    return logger
