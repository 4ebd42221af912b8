"""Canonical JSON serialization.

The CLI and the HTTP service must emit byte-identical documents for the
same payload, so both go through this one formatter.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize ``obj`` deterministically: sorted keys, 2-space indent,
    UTF-8 untouched, single trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
