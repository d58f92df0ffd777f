"""Text syntax for patterns.

Elements are separated by single spaces, the co-occurring sub-elements of an
element by ``!``, and the labels of a sub-element by ``|``::

    :start :target :number :number :token|category|cd!:number

A backslash escapes a literal space, ``!``, ``|`` or backslash inside a label.
"""

from __future__ import annotations

from collections.abc import Sequence

from annotalign.annotations import ElementKey

_SPECIAL = {" ": " ", "!": "!", "|": "|", "\\": "\\"}

Pattern = tuple[tuple[ElementKey, ...], ...]


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


def _escape(label: str) -> str:
    return "".join("\\" + c if c in _SPECIAL else c for c in label)


def serialize_key(key: ElementKey) -> str:
    parts = [key.type]
    if key.feature:
        parts.append(key.feature)
    if key.value:
        parts.append(key.value)
    return ":" + "|".join(_escape(p) for p in parts)


def serialize_element(element: Sequence[ElementKey]) -> str:
    return "!".join(serialize_key(k) for k in element)


def serialize_pattern(pattern: Sequence[Sequence[ElementKey]]) -> str:
    return " ".join(serialize_element(e) for e in pattern)


def _split(text: str, sep: str, offset: int) -> list[tuple[str, int]]:
    """Split on unescaped ``sep``; keeps escapes in the pieces."""
    pieces = []
    buf = []
    start = offset
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\":
            if i + 1 >= len(text):
                raise PatternSyntaxError("dangling escape", text, offset + i)
            buf.append(text[i : i + 2])
            i += 2
            continue
        if c == sep:
            pieces.append(("".join(buf), start))
            buf = []
            start = offset + i + 1
        else:
            buf.append(c)
        i += 1
    pieces.append(("".join(buf), start))
    return pieces


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\":
            out.append(text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def parse_key(text: str, offset: int = 0) -> ElementKey:
    if not text.startswith(":"):
        raise PatternSyntaxError("sub-element must start with ':'", text, offset)
    labels = _split(text[1:], "|", offset + 1)
    if len(labels) > 3:
        raise PatternSyntaxError("too many labels in sub-element", text, labels[3][1])
    for label, pos in labels:
        if not label:
            raise PatternSyntaxError("empty label", text, pos)
    values = [_unescape(label) for label, _ in labels]
    return ElementKey(*values)


def parse_element(text: str, offset: int = 0) -> tuple[ElementKey, ...]:
    if not text:
        raise PatternSyntaxError("empty element", text, offset)
    keys = []
    for sub, pos in _split(text, "!", offset):
        if not sub:
            raise PatternSyntaxError("empty sub-element", text, pos)
        keys.append(parse_key(sub, pos))
    return tuple(keys)


def parse_pattern(text: str) -> Pattern:
    """Parse a space-separated element sequence; the empty string is ``()``."""
    if text == "":
        return ()
    return tuple(parse_element(piece, pos) for piece, pos in _split(text, " ", 0))
