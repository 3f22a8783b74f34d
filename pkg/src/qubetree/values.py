"""Coordinate values, dimension names and their text token encoding.

Coordinate values are plain Python objects: ``int``, ``str``,
``datetime.date`` and ``datetime.datetime`` (second precision, naive).
Their total order sorts by tag first (int < str < date < timestamp), then
naturally within a tag.
"""
from __future__ import annotations

import re
from datetime import date, datetime, timezone
from typing import Union
from urllib.parse import unquote

from .errors import QubeSyntaxError

Value = Union[int, str, date, datetime]

INT, STR, DATE, TIMESTAMP = "int", "str", "date", "timestamp"
TAGS = (INT, STR, DATE, TIMESTAMP)

_RANK = {int: 0, str: 1, date: 2, datetime: 3}
_TAG_OF = {int: INT, str: STR, date: DATE, datetime: TIMESTAMP}
_SUFFIX = {INT: "~i", STR: "~s", DATE: "~d", TIMESTAMP: "~t"}
_SUFFIX_TAG = {v[1]: k for k, v in _SUFFIX.items()}

INT_MIN, INT_MAX = -(2**63), 2**63 - 1

# Characters that never appear raw inside a value token.
RESERVED = ",=/%\n\r@~*"
_ESCAPE_TABLE = {ord(c): "%{:02X}".format(ord(c)) for c in RESERVED}
_BAD_PCT = re.compile(r"%(?![0-9A-Fa-f]{2})")

_DIM_FORBIDDEN = re.compile(r"[,=/\n\r]")
_INT_RE = re.compile(r"-?(?:0|[1-9][0-9]*)\Z")
_DIGITS_RE = re.compile(r"-?[0-9]+\Z")
_DATE_RE = re.compile(r"[0-9]{8}\Z")
_TS_RE = re.compile(r"[0-9]{8}T[0-9]{6}\Z")


def tag_of(v: Value) -> str:
    try:
        return _TAG_OF[type(v)]
    except KeyError:
        raise TypeError(f"unsupported coordinate value type: {type(v).__name__}") from None


def value_key(v: Value) -> tuple:
    """Sort key realising the tag-then-natural total order."""
    return (_RANK[type(v)], v)


def coerce_value(v) -> Value:
    """Normalise an arbitrary input into a coordinate value."""
    t = type(v)
    if t is int or t is str or t is date:
        if t is int and not INT_MIN <= v <= INT_MAX:
            raise ValueError(f"integer coordinate out of 64-bit range: {v}")
        return v
    if t is datetime:
        if v.tzinfo is not None:
            v = v.astimezone(timezone.utc).replace(tzinfo=None)
        return v.replace(microsecond=0)
    if isinstance(v, bool):
        raise TypeError("booleans are not coordinate values")
    if isinstance(v, int):  # numpy integers and friends
        return coerce_value(int(v))
    if isinstance(v, datetime):
        return coerce_value(datetime(v.year, v.month, v.day, v.hour, v.minute, v.second, tzinfo=v.tzinfo))
    if isinstance(v, date):
        return date(v.year, v.month, v.day)
    if isinstance(v, str):
        return str(v)
    raise TypeError(f"unsupported coordinate value type: {t.__name__}; represent floats as strings")


def sort_values(values) -> tuple:
    """Coerced values of a collection, deduplicated and in tag order."""
    return tuple(sorted({coerce_value(v) for v in values}, key=value_key))


def check_dim(name) -> str:
    from .errors import EmptyDimensionName

    if not isinstance(name, str):
        raise TypeError(f"dimension name must be str, got {type(name).__name__}")
    if not name:
        raise EmptyDimensionName("empty dimension name")
    if _DIM_FORBIDDEN.search(name):
        raise ValueError(f"dimension name {name!r} contains a reserved character")
    return name


def escape(s: str) -> str:
    return s.translate(_ESCAPE_TABLE)


def unescape(s: str) -> str:
    if "%" not in s:
        return s
    if _BAD_PCT.search(s):
        raise ValueError(f"bad percent escape in {s!r}")
    try:
        return unquote(s, errors="strict")
    except UnicodeDecodeError:
        raise ValueError(f"percent escapes in {s!r} are not UTF-8") from None


def _parse_date(s: str) -> date | None:
    try:
        return date(int(s[:4]), int(s[4:6]), int(s[6:8]))
    except ValueError:
        return None


def _parse_ts(s: str) -> datetime | None:
    try:
        return datetime(int(s[:4]), int(s[4:6]), int(s[6:8]), int(s[9:11]), int(s[11:13]), int(s[13:15]))
    except ValueError:
        return None


def sniff(s: str) -> Value:
    """Type a decoded token: timestamp, date, int, else str.

    Digit strings with a leading zero stay strings so that they render
    back unchanged.
    """
    if len(s) == 15 and _TS_RE.match(s):
        ts = _parse_ts(s)
        if ts is not None:
            return ts
    if len(s) == 8 and _DATE_RE.match(s):
        d = _parse_date(s)
        if d is not None:
            return d
    if _INT_RE.match(s):
        n = int(s)
        if INT_MIN <= n <= INT_MAX:
            return n
    return s


def convert(s: str, tag: str) -> Value:
    """Convert a decoded token to a forced tag; raises ValueError."""
    if tag == STR:
        return s
    if tag == INT:
        if not _DIGITS_RE.match(s):
            raise ValueError(f"not an integer: {s!r}")
        return coerce_value(int(s))
    if tag == DATE:
        d = _parse_date(s) if _DATE_RE.match(s) else None
        if d is None:
            raise ValueError(f"not a YYYYMMDD date: {s!r}")
        return d
    if tag == TIMESTAMP:
        ts = _parse_ts(s) if _TS_RE.match(s) else None
        if ts is None:
            raise ValueError(f"not a YYYYMMDDTHHMMSS timestamp: {s!r}")
        return ts
    raise ValueError(f"unknown tag {tag!r}")


def raw_text(v: Value) -> str:
    """Unescaped natural text form of a value."""
    t = type(v)
    if t is str:
        return v
    if t is int:
        return str(v)
    if t is datetime:
        return f"{v.year:04d}{v.month:02d}{v.day:02d}T{v.hour:02d}{v.minute:02d}{v.second:02d}"
    return f"{v.year:04d}{v.month:02d}{v.day:02d}"


def render_value(v: Value) -> str:
    """Token form of a value; a tag suffix is added only when sniffing would disagree."""
    s = raw_text(v)
    tok = escape(s)
    if type(sniff(s)) is not type(v) or (type(v) is str and s == ""):
        tok += _SUFFIX[tag_of(v)]
    return tok


def parse_value(token: str, tag: str | None = None, *, line: int = 0, column: int = 0) -> Value:
    """Decode a value token. ``tag`` forces a type unless the token carries a suffix."""
    if len(token) >= 2 and token[-2] == "~":
        forced = _SUFFIX_TAG.get(token[-1])
        if forced is None:
            raise QubeSyntaxError(f"unknown tag suffix in {token!r}", line, column)
        token, tag = token[:-2], forced
    if "~" in token:
        raise QubeSyntaxError(f"unescaped '~' in {token!r}", line, column)
    if not token and tag != STR:
        raise QubeSyntaxError("empty value", line, column)
    try:
        s = unescape(token)
        return convert(s, tag) if tag is not None else sniff(s)
    except ValueError as e:
        raise QubeSyntaxError(str(e), line, column) from None
