"""Canonical JSON formatting shared by the CLI and the HTTP service."""

from __future__ import annotations

import json


def round_floats(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def canonical_dumps(payload) -> str:
    return json.dumps(round_floats(payload), sort_keys=True, separators=(",", ":"))
