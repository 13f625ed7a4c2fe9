"""
Deterministic report serialization

JSON keeps the insertion order of the report builders and prints every float
with 17 significant digits, so identical runs give byte-identical files.
"""
import csv
import json
import logging
import math
import sys
from datetime import datetime
from typing import Optional

import numpy as np
import pytz

from config import Config

logger = logging.getLogger(__name__)

LEADERBOARD_COLUMNS = ('tt', 'n', 'p', 'entropy', 'sum_sq_influences', 'ratio', 'conjecture_slack')


def format_float(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        return 'null'
    return format(value, '.17g')


def _encode(obj, indent: int, level: int) -> str:
    if obj is None:
        return 'null'
    if isinstance(obj, (bool, np.bool_)):
        return 'true' if obj else 'false'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if hasattr(obj, 'to_dict'):
        obj = obj.to_dict()

    pad = '\n' + ' ' * (indent * (level + 1))
    close = '\n' + ' ' * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f'{json.dumps(str(key))}: {_encode(value, indent, level + 1)}' for key, value in obj.items()]
        return '{' + pad + (',' + pad).join(items) + close + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [_encode(value, indent, level + 1) for value in obj]
        return '[' + pad + (',' + pad).join(items) + close + ']'
    raise TypeError(f'Cannot serialize {type(obj).__name__}')


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + '\n'


def write_json(obj, path: str) -> None:
    """Write a report; '-' means stdout"""
    text = dumps(obj)
    if path == '-':
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, 'w') as handle:
        handle.write(text)
    logger.info(f"Report written to {path}")


def leaderboard_rows(report: dict):
    """CSV rows for a search report dict or a sweep report dict"""
    reports = report.get('reports', [report])
    for part in reports:
        for record in part.get('leaderboard', []):
            yield [record[column] for column in LEADERBOARD_COLUMNS]


def write_leaderboard_csv(report, path: str) -> None:
    """One row per leaderboard record"""
    data = report.to_dict() if hasattr(report, 'to_dict') else report
    handle = sys.stdout if path == '-' else open(path, 'w', newline='')
    try:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(LEADERBOARD_COLUMNS)
        for row in leaderboard_rows(data):
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    finally:
        if handle is not sys.stdout:
            handle.close()
            logger.info(f"Leaderboard written to {path}")


def utc_timestamp(tz: Optional[str] = None) -> str:
    """ISO-8601 timestamp in the configured timezone"""
    zone = pytz.timezone(tz or Config.TIMEZONE)
    return datetime.now(pytz.utc).astimezone(zone).isoformat()
