from __future__ import annotations

import json
import logging
from typing import Any, Iterable, Optional

from .validators import ValidationError

logger = logging.getLogger(__name__)


def canonical_dumps(data: Any, indent: Optional[int] = None) -> str:
    """
    Serialize data to JSON with sorted keys so output is byte-comparable

    Args:
        data: JSON-compatible value
        indent (int, optional): Pretty-print indentation

    Returns:
        str: JSON text
    """
    if indent is None:
        return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    return json.dumps(data, sort_keys=True, indent=indent, ensure_ascii=False)


def write_json(path: str, data: Any) -> None:
    """Write one canonical JSON document (trailing newline included)"""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(canonical_dumps(data, indent=2))
        f.write('\n')


def read_json(path: str) -> Any:
    """Read one JSON document"""
    with open(path, 'r', encoding='utf-8') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")


def dumps_jsonl(rows: Iterable[dict]) -> str:
    """Render an iterable of JSON objects as JSON Lines text"""
    return ''.join(canonical_dumps(row) + '\n' for row in rows)


def write_jsonl(path: str, rows: Iterable[dict]) -> None:
    """Write JSON Lines, one canonical object per line"""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps_jsonl(rows))


def loads_jsonl(text: str, source: str = '<string>') -> list:
    """
    Parse JSON Lines text

    Args:
        text (str): JSON Lines content; blank lines are skipped
        source (str): Name used in error messages

    Returns:
        list: Decoded objects
    """
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{source}:{line_no}: invalid JSON ({e.msg})")
    return rows


def read_jsonl(path: str) -> list:
    """Read a JSON Lines file"""
    with open(path, 'r', encoding='utf-8') as f:
        return loads_jsonl(f.read(), source=str(path))
