"""Small shared helpers: deterministic JSON and content hashing."""

from __future__ import annotations

import hashlib
import json


def dumps(obj: object) -> str:
    """Deterministic JSON: sorted keys, compact separators, no NaN."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def content_hash(*parts: str) -> str:
    """Stable sha256 hex digest over string parts."""
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()
