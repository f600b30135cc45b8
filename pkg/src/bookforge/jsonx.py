"""Robust JSON extraction from provider output.

Providers wrap JSON in code fences and conversational prose; this strips
the noise, then parses strictly once a candidate object is isolated.
"""

from __future__ import annotations

import json
import re
from typing import Any

from .errors import MalformedJson, NoJsonFound

_FENCE_RE = re.compile(r"```(?:json)?\s*\n?(.*?)```", re.DOTALL | re.IGNORECASE)
_decoder = json.JSONDecoder(strict=True)


def extract_json(raw: str) -> Any:
    """Return the first syntactically valid JSON object or array in ``raw``.

    Code fences are stripped first; leading/trailing prose is skipped by
    scanning for candidate '{' / '[' starts. Raises NoJsonFound when no
    candidate start exists, MalformedJson (with the byte offset of the
    first candidate) when none of them parses.
    """
    fenced = _FENCE_RE.search(raw)
    text = fenced.group(1) if fenced else raw

    starts = [m.start() for m in re.finditer(r"[\[{]", text)]
    if not starts and fenced:
        text = raw
        starts = [m.start() for m in re.finditer(r"[\[{]", text)]
    if not starts:
        raise NoJsonFound("no JSON object found in provider output")

    first_error: Exception | None = None
    for pos in starts:
        try:
            value, _ = _decoder.raw_decode(text, pos)
            return value
        except json.JSONDecodeError as err:
            if first_error is None:
                first_error = err
    byte_offset = len(text[: starts[0]].encode("utf-8"))
    raise MalformedJson(str(first_error), byte_offset)


__all__ = ["extract_json"]
