"""
Entity document fetcher

Downloads JSON entity documents from a Wikibase Special:EntityData
endpoint and writes them as a framed one-entity-per-line dump that
dump_ingest reads.

Usage:
    python scripts/wshex_cli.py fetch Q80 Q84 -o data/sample_dump.json
"""

import json
import logging
import time
from functools import wraps
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import requests

from wikibase_graph import EntityId
from wshex_config import ENTITY_DATA_URL, MAX_RETRIES, RATE_LIMIT_DELAY, REQUEST_TIMEOUT, RETRY_DELAY

logger = logging.getLogger('WShEx.fetch')

# ============================================================================
# UTILITY FUNCTIONS
# ============================================================================

def retry_on_failure(max_retries=MAX_RETRIES, delay=RETRY_DELAY):
    """Decorator for retrying failed requests; gives None after the last attempt"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            for attempt in range(max_retries):
                try:
                    return func(*args, **kwargs)
                except requests.exceptions.RequestException as e:
                    if attempt < max_retries - 1:
                        logger.warning(f"Attempt {attempt + 1} failed: {e}. Retrying in {delay}s...")
                        time.sleep(delay)
                    else:
                        logger.error(f"All {max_retries} attempts failed: {e}")
            return None
        return wrapper
    return decorator

# ============================================================================
# ENTITY DATA CLIENT
# ============================================================================

class EntityDataClient:
    """Client for the Special:EntityData endpoint"""

    def __init__(self, base_url=ENTITY_DATA_URL, rate_limit_delay=RATE_LIMIT_DELAY, timeout=REQUEST_TIMEOUT,
                 session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip('/')
        self.rate_limit_delay = rate_limit_delay
        self.timeout = timeout
        self.session = session or requests.Session()
        self.requests_made = 0
        self.last_request_time = None

    def _wait_for_rate_limit(self) -> None:
        if self.last_request_time:
            elapsed = time.time() - self.last_request_time
            if elapsed < self.rate_limit_delay:
                time.sleep(self.rate_limit_delay - elapsed)

    @retry_on_failure()
    def fetch_entity(self, entity_id: str) -> Optional[Dict]:
        """
        Fetch one entity document

        Args:
            entity_id: Item or property id, e.g. "Q80"

        Returns:
            The entity object (the value under "entities"), or None when
            the entity does not exist

        Raises:
            requests.exceptions.RequestException: retried, then None
        """
        self._wait_for_rate_limit()
        url = f"{self.base_url}/{entity_id}.json"
        logger.debug(f"Fetching: {url}")

        response = self.session.get(url, timeout=self.timeout)
        self.requests_made += 1
        self.last_request_time = time.time()

        if response.status_code == 404:
            logger.warning(f"Entity {entity_id} not found (404)")
            return None
        response.raise_for_status()

        entities = response.json().get('entities', {})
        # Redirected ids come back under their target id
        document = entities.get(entity_id) or next(iter(entities.values()), None)
        if document is None:
            logger.warning(f"Entity {entity_id}: response carries no entity document")
        return document

# ============================================================================
# DUMP WRITING
# ============================================================================

def to_dump_line(entity: Dict) -> str:
    """Compact single-line JSON, as one line of a Wikibase dump"""
    return json.dumps(entity, ensure_ascii=False, separators=(',', ':'))


def load_entity_ids(path: Path) -> List[str]:
    """
    Read entity ids, one per line; blank lines and # comments are skipped

    Raises:
        InvalidEntityId: for a line that is not an item or property id
    """
    ids = []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            text = line.split('#', 1)[0].strip()
            if text:
                ids.append(str(EntityId.parse(text)))
    logger.info(f"Loaded {len(ids)} entity ids from {path}")
    return ids


def fetch_to_dump(entity_ids: Iterable[str], output_path: Path,
                  client: Optional[EntityDataClient] = None) -> Dict[str, object]:
    """
    Fetch entities and write them as a framed dump

    Returns:
        Dict with requested, fetched and missing (list of ids)

    Raises:
        OSError: output cannot be written
    """
    client = client or EntityDataClient()
    ids = list(entity_ids)
    fetched: List[str] = []
    missing: List[str] = []

    lines = []
    for idx, entity_id in enumerate(ids, 1):
        logger.info(f"Fetching entity {idx}/{len(ids)} ({entity_id})")
        entity = client.fetch_entity(entity_id)
        if not entity:
            missing.append(entity_id)
            logger.warning(f"✗ Skipped {entity_id} - fetch failed")
            continue
        lines.append(to_dump_line(entity))
        fetched.append(entity_id)

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write('[\n')
        for i, line in enumerate(lines):
            f.write(line + (',\n' if i < len(lines) - 1 else '\n'))
        f.write(']\n')

    logger.info(f"✓ Wrote {len(fetched)} entities to {output_path} ({len(missing)} missing)")
    return {'requested': len(ids), 'fetched': len(fetched), 'missing': missing}
