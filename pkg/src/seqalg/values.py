"""The closed value universe shared by states, traces and the CLI.

Values are naturals, booleans, symbols (``str``), tuples (pairs and
registers) and the ``EMPTY`` answer cell. Richer objects join the universe
by providing ``render()`` and ``to_json()``.
"""

from __future__ import annotations

import json
from typing import Any


class _Empty:
    """The empty answer cell, written as a box."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"

    def __reduce__(self):
        return (_Empty, ())

    def __bool__(self):
        return False


EMPTY = _Empty()

BOX = "□"
OVERLINE = "̄"


def is_empty(cell: Any) -> bool:
    return cell is EMPTY


def render_value(v: Any) -> str:
    if v is EMPTY:
        return BOX
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ",".join(render_value(x) for x in v) + ")"
    if isinstance(v, list):
        return "[" + ",".join(render_value(x) for x in v) + "]"
    if hasattr(v, "render"):
        return v.render()
    return repr(v)


def render_seq(items) -> str:
    return "[" + ",".join(render_value(x) for x in items) + "]"


def to_json(v: Any) -> Any:
    if v is EMPTY:
        return None
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, (tuple, list)):
        return [to_json(x) for x in v]
    if hasattr(v, "to_json"):
        return v.to_json()
    raise TypeError(f"value outside the universe: {v!r}")


def dumps(doc: Any) -> str:
    """Byte-stable JSON rendering used for every document we emit."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class ValueSyntaxError(ValueError):
    pass


def parse_value(text: str) -> Any:
    """Parse a value literal: ``12``, ``true``, ``cs``, ``(28,72)``, ``[1,2]``.

    Both bracket forms produce tuples; sequences and pairs share a
    representation inside states.
    """
    pos = 0
    s = text.strip()

    def skip():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def item():
        nonlocal pos
        skip()
        if pos >= len(s):
            raise ValueSyntaxError(f"unexpected end of input at {pos}")
        c = s[pos]
        if c in "([":
            close = ")" if c == "(" else "]"
            pos += 1
            out = []
            skip()
            if pos < len(s) and s[pos] == close:
                pos += 1
                return ()
            while True:
                out.append(item())
                skip()
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    continue
                if pos < len(s) and s[pos] == close:
                    pos += 1
                    return tuple(out)
                raise ValueSyntaxError(f"expected ',' or '{close}' at {pos}")
        start = pos
        while pos < len(s) and (s[pos].isalnum() or s[pos] in "_'-"):
            pos += 1
        word = s[start:pos]
        if not word:
            raise ValueSyntaxError(f"unexpected {c!r} at {pos}")
        if word.isdigit():
            return int(word)
        if word in ("true", "false"):
            return word == "true"
        return word

    v = item()
    skip()
    if pos != len(s):
        raise ValueSyntaxError(f"trailing input at {pos}")
    return v
