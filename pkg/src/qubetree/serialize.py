"""Text rendering and the JSON-compatible interchange format.

Text format, one node per line, two spaces of indent per level::

    root
      class=od
        date=20200101/20200102
          param=t/z @key=0a1b

Interchange format::

    {"version": "qube/1",
     "root": {"dim": "root", "values": [{"tag": "str", "value": "root"}],
              "children": [...], "payload": "<hex>"}}
"""
from __future__ import annotations

import json
from datetime import date, datetime
from typing import Any

from .core import ROOT, Qube, QubeNode
from .errors import IndentError, QubeSyntaxError, SchemaError
from .values import DATE, INT, STR, TAGS, TIMESTAMP, check_dim, parse_value, render_value, tag_of

VERSION = "qube/1"
_PAYLOAD = " @key="


def _payload_suffix(node: QubeNode) -> str:
    return "" if node.payload is None else _PAYLOAD + node.payload.hex()


def to_text(q: Qube) -> str:
    lines = [ROOT + _payload_suffix(q.root)]

    def emit(node: QubeNode, depth: int) -> None:
        vals = "/".join(render_value(v) for v in node.values)
        lines.append(f"{'  ' * depth}{node.dim}={vals}{_payload_suffix(node)}")
        for c in node.children:
            emit(c, depth + 1)

    for c in q.root.children:
        emit(c, 1)
    return "\n".join(lines) + "\n"


def _split_payload(body: str, lineno: int) -> tuple[str, bytes | None]:
    head, sep, hexkey = body.rpartition(_PAYLOAD)
    if not sep:
        return body, None
    try:
        return head, bytes.fromhex(hexkey)
    except ValueError:
        raise QubeSyntaxError(f"bad payload key {hexkey!r}", lineno) from None


def from_text(doc: str) -> Qube:
    """Parse a document produced by :func:`to_text`."""
    lines = [(i + 1, ln.rstrip("\r")) for i, ln in enumerate(doc.split("\n"))]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise QubeSyntaxError("empty document", 1)
    first_no, first = lines[0]
    if first.startswith((" ", "\t")):
        raise IndentError("root line must not be indented", first_no)
    body, root_payload = _split_payload(first, first_no)
    if body != ROOT:
        raise QubeSyntaxError(f"expected 'root', got {body!r}", first_no)

    # stack of (depth, dim, values, payload, children list)
    stack: list[tuple] = [(0, ROOT, (ROOT,), root_payload, [])]

    def close() -> None:
        _, dim, values, payload, kids = stack.pop()
        stack[-1][4].append(QubeNode(dim, values, kids, payload))

    for lineno, line in lines[1:]:
        stripped = line.lstrip(" ")
        if stripped.startswith("\t") or "\t" in line[: len(line) - len(stripped)]:
            raise IndentError("tab in indentation", lineno)
        indent = len(line) - len(stripped)
        if indent % 2:
            raise IndentError("indentation is not a multiple of two spaces", lineno)
        depth = indent // 2
        if depth < 1:
            raise IndentError("only the root may sit at column 0", lineno)
        if depth > stack[-1][0] + 1:
            raise IndentError("indentation jumps more than one level", lineno)
        while stack[-1][0] >= depth:
            close()
        body, payload = _split_payload(stripped, lineno)
        dim, eq, vals = body.partition("=")
        if not eq:
            raise QubeSyntaxError(f"expected dim=values, got {body!r}", lineno)
        try:
            check_dim(dim)
        except ValueError as e:
            raise QubeSyntaxError(str(e), lineno) from None
        col = indent + len(dim) + 2
        values = []
        for tok in vals.split("/"):
            values.append(parse_value(tok, line=lineno, column=col))
            col += len(tok) + 1
        stack.append((depth, dim, values, payload, []))
    while len(stack) > 1:
        close()
    _, _, _, payload, kids = stack[0]
    try:
        return Qube(QubeNode(ROOT, (ROOT,), kids, payload))
    except ValueError as e:
        raise QubeSyntaxError(str(e)) from None


# ---------------------------------------------------------------------------
# interchange
# ---------------------------------------------------------------------------


def _encode_value(v) -> dict:
    tag = tag_of(v)
    if tag == DATE:
        return {"tag": tag, "value": v.isoformat()}
    if tag == TIMESTAMP:
        return {"tag": tag, "value": v.isoformat(timespec="seconds")}
    return {"tag": tag, "value": v}


def _encode_node(node: QubeNode) -> dict:
    out: dict[str, Any] = {"dim": node.dim, "values": [_encode_value(v) for v in node.values]}
    if node.payload is not None:
        out["payload"] = node.payload.hex()
    out["children"] = [_encode_node(c) for c in node.children]
    return out


def to_interchange(q: Qube) -> dict:
    return {"version": VERSION, "root": _encode_node(q.root)}


def _decode_value(obj, path: str):
    if not isinstance(obj, dict) or set(obj) != {"tag", "value"}:
        raise SchemaError("expected {tag, value}", path)
    tag, raw = obj["tag"], obj["value"]
    if tag not in TAGS:
        raise SchemaError(f"unknown tag {tag!r}", path + ".tag")
    try:
        if tag == INT:
            if type(raw) is not int:
                raise ValueError("int value must be a JSON integer")
            return raw
        if not isinstance(raw, str):
            raise ValueError(f"{tag} value must be a string")
        if tag == STR:
            return raw
        if tag == DATE:
            return date.fromisoformat(raw)
        ts = datetime.fromisoformat(raw)
        if ts.tzinfo is not None or ts.microsecond:
            raise ValueError("timestamps are naive, second precision")
        return ts
    except ValueError as e:
        raise SchemaError(str(e), path + ".value") from None


def _decode_node(obj, path: str, above: frozenset) -> QubeNode:
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    unknown = set(obj) - {"dim", "values", "payload", "children"}
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)}", path)
    dim = obj.get("dim")
    is_root = path == "$.root"
    if is_root:
        if dim != ROOT:
            raise SchemaError("root dim must be 'root'", path + ".dim")
    else:
        try:
            check_dim(dim)
        except (TypeError, ValueError) as e:
            raise SchemaError(str(e), path + ".dim") from None
        if dim == ROOT or dim in above:
            raise SchemaError(f"dimension {dim!r} repeats along the path", path + ".dim")
    raw_values = obj.get("values")
    if not isinstance(raw_values, list) or not raw_values:
        raise SchemaError("values must be a non-empty list", path + ".values")
    values = [_decode_value(v, f"{path}.values[{i}]") for i, v in enumerate(raw_values)]
    payload = obj.get("payload")
    if payload is not None:
        try:
            payload = bytes.fromhex(payload)
        except (TypeError, ValueError):
            raise SchemaError("payload must be a hex string", path + ".payload") from None
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise SchemaError("children must be a list", path + ".children")
    below = above if is_root else above | {dim}
    children = [_decode_node(c, f"{path}.children[{i}]", below) for i, c in enumerate(raw_children)]
    return QubeNode(dim, values, children, payload)


def from_interchange(doc) -> Qube:
    if not isinstance(doc, dict):
        raise SchemaError("expected an object")
    if doc.get("version") != VERSION:
        raise SchemaError(f"unsupported version {doc.get('version')!r}", "$.version")
    if "root" not in doc:
        raise SchemaError("missing root", "$")
    return Qube(_decode_node(doc["root"], "$.root", frozenset()))


def dumps(q: Qube) -> str:
    return json.dumps(to_interchange(q), separators=(",", ":"), ensure_ascii=False)


def loads(s: str) -> Qube:
    try:
        doc = json.loads(s)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None
    return from_interchange(doc)


def load_any(s: str) -> Qube:
    """Accept either format: JSON interchange if it starts with '{', else text."""
    return loads(s) if s.lstrip().startswith("{") else from_text(s)
