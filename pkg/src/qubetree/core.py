"""Qube data model with naive construction, compression and counting.

A qube is a rooted tree. Every non-root node carries a dimension name and a
sorted, duplicate-free tuple of coordinate values; a root-to-leaf path,
expanded over the value sets along it, spells out a set of coordinate
tuples. That tuple set is the qube's meaning.
"""
from __future__ import annotations

import hashlib
import struct
from collections import defaultdict
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import DuplicateDimension, IncompatiblePath, QubeError
from .values import Value, check_dim, coerce_value, raw_text, sort_values, tag_of, value_key

ROOT = "root"
DIGEST_SIZE = 16

Tuple_ = tuple  # a leaf tuple: tuple of (dim, value) pairs

_TAG_BYTE = {"int": b"i", "str": b"s", "date": b"d", "timestamp": b"t"}


def _child_key(n: QubeNode) -> tuple:
    return (n.dim, value_key(n.values[0]))


class QubeNode:
    """Immutable tree node. Treat every attribute as read-only."""

    __slots__ = ("dim", "values", "children", "payload", "_hash", "_digest")

    def __init__(
        self,
        dim: str,
        values: Iterable[Value],
        children: Iterable[QubeNode] = (),
        payload: bytes | None = None,
    ):
        values = sort_values(values)
        if not values:
            raise ValueError(f"node {dim!r} has an empty value set")
        if payload is not None and not isinstance(payload, (bytes, bytearray)):
            raise TypeError("payload must be bytes or None")
        children = tuple(children)
        for c in children:
            if not isinstance(c, QubeNode):
                raise TypeError(f"child must be a QubeNode, got {type(c).__name__}")
        self.dim = dim if dim == ROOT else check_dim(dim)
        self.values = values
        self.children = tuple(sorted(children, key=_child_key))
        self.payload = bytes(payload) if payload is not None else None
        self._hash = None
        self._digest = None

    @classmethod
    def _new(cls, dim: str, values: tuple, children: tuple, payload: bytes | None) -> QubeNode:
        # Trusted constructor: values sorted, children sorted, dim valid.
        n = object.__new__(cls)
        n.dim = dim
        n.values = values
        n.children = children
        n.payload = payload
        n._hash = None
        n._digest = None
        return n

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = self._hash = hash((self.dim, self.values, self.payload, self.children))
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, QubeNode):
            return NotImplemented
        return (
            hash(self) == hash(other)
            and self.dim == other.dim
            and self.values == other.values
            and self.payload == other.payload
            and self.children == other.children
        )

    def __repr__(self) -> str:
        vals = "/".join(raw_text(v) for v in self.values[:4])
        if len(self.values) > 4:
            vals += f"/...({len(self.values)})"
        return f"QubeNode({self.dim}={vals}, children={len(self.children)})"


class QubeStats(NamedTuple):
    leaf_count: int
    node_count: int
    distinct_structural_nodes: int
    max_depth: int


class Qube:
    """A rooted qube. Immutable; all operations return new qubes."""

    __slots__ = ("root", "_stats", "_canonical")

    def __init__(self, root: QubeNode):
        if not isinstance(root, QubeNode) or root.dim != ROOT:
            raise ValueError("qube root must be a QubeNode with dimension 'root'")
        _check_paths(root)
        self.root = root
        self._stats = None
        self._canonical = False

    @classmethod
    def _wrap(cls, root: QubeNode, canonical: bool = False) -> Qube:
        q = object.__new__(cls)
        q.root = root
        q._stats = None
        q._canonical = canonical
        return q

    @classmethod
    def empty(cls) -> Qube:
        return cls._wrap(_root(()), canonical=True)

    @property
    def stats(self) -> QubeStats:
        if self._stats is None:
            self._stats = stats(self)
        return self._stats

    def __len__(self) -> int:
        return count_leaves(self)

    def __iter__(self) -> Iterator[tuple]:
        return leaves(self)

    def __bool__(self) -> bool:
        return bool(self.root.children)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Qube):
            return NotImplemented
        return self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __or__(self, other: Qube) -> Qube:
        from .setops import union

        return union(self, other)

    def __and__(self, other: Qube) -> Qube:
        from .setops import intersect

        return intersect(self, other)

    def __sub__(self, other: Qube) -> Qube:
        from .setops import difference

        return difference(self, other)

    def compress(self) -> Qube:
        return compress(self)

    def __repr__(self) -> str:
        return f"Qube(leaves={count_leaves(self)}, nodes={self.stats.node_count})"

    def __str__(self) -> str:
        from .serialize import to_text

        return to_text(self)


def _root(children: tuple, payload: bytes | None = None) -> QubeNode:
    return QubeNode._new(ROOT, (ROOT,), children, payload)


def _check_paths(root: QubeNode) -> None:
    stack = [(c, frozenset()) for c in root.children]
    while stack:
        node, above = stack.pop()
        if node.dim == ROOT:
            raise ValueError("'root' is reserved for the qube root")
        if node.dim in above:
            raise DuplicateDimension(f"dimension {node.dim!r} repeats along a path")
        below = above | {node.dim}
        stack.extend((c, below) for c in node.children)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def from_tuples(
    tuples: Iterable[Sequence[tuple[str, Value]]],
    payloads: Sequence[bytes | None] | None = None,
) -> Qube:
    """Build an uncompressed qube by inserting each tuple as its own path.

    Every inserted value gets its own single-value node. Identical tuples
    collapse. ``payloads``, if given, runs parallel to ``tuples`` and
    attaches a storage key to each tuple's leaf.
    """
    # trie entry: [children dict keyed by (dim, value), ends_here, payload]
    top: dict = {}
    root_entry = [top, False, None]
    known_dims: set[str] = set()
    payload_iter = iter(payloads) if payloads is not None else None
    for t in tuples:
        payload = next(payload_iter) if payload_iter is not None else None
        if payload is not None:
            payload = bytes(payload)
        entry = root_entry
        seen = set()
        for dim, v in t:
            if dim not in known_dims:
                check_dim(dim)
                if dim == ROOT:
                    raise ValueError("'root' is reserved for the qube root")
                known_dims.add(dim)
            if dim in seen:
                raise DuplicateDimension(f"dimension {dim!r} repeats within tuple {tuple(t)!r}")
            seen.add(dim)
            if entry[1]:
                raise IncompatiblePath(f"tuple {tuple(t)!r} extends a path that is already a leaf")
            key = (dim, coerce_value(v))
            children = entry[0]
            nxt = children.get(key)
            if nxt is None:
                nxt = children[key] = [{}, False, None]
            entry = nxt
        if entry is root_entry:
            raise QubeError("empty tuple: a leaf needs at least one coordinate")
        if entry[0]:
            raise IncompatiblePath(f"tuple {tuple(t)!r} is a strict prefix of another tuple")
        if entry[1] and entry[2] != payload:
            raise IncompatiblePath(f"conflicting payloads for tuple {tuple(t)!r}")
        entry[1] = True
        entry[2] = payload

    def freeze(children: dict) -> tuple:
        keys = sorted(children, key=lambda k: (k[0], value_key(k[1])))
        out = []
        for k in keys:
            sub, _, payload = children[k]
            out.append(QubeNode._new(k[0], (k[1],), freeze(sub) if sub else (), payload))
        return tuple(out)

    return Qube._wrap(_root(freeze(top)))


# ---------------------------------------------------------------------------
# compression
# ---------------------------------------------------------------------------


class _Interner:
    """Per-operation hash-consing table: equal subtrees become one object."""

    __slots__ = ("table",)

    def __init__(self):
        self.table: dict[QubeNode, QubeNode] = {}

    def __call__(self, node: QubeNode) -> QubeNode:
        return self.table.setdefault(node, node)


def _assemble(pieces: Iterable[tuple], intern: _Interner) -> tuple:
    """Turn (dim, values, payload, children) pieces into one canonical sibling list.

    Pieces of one dimension must carry disjoint value sets and canonical
    children. Pieces that agree on dim, payload and children are merged by
    joining their values.
    """
    groups: dict[tuple, list] = {}
    for dim, values, payload, children in pieces:
        key = (dim, payload, children)
        got = groups.get(key)
        if got is None:
            groups[key] = [values]
        else:
            got.append(values)
    nodes = []
    for (dim, payload, children), vlists in groups.items():
        if len(vlists) == 1:
            values = vlists[0]
        else:
            values = tuple(sorted((v for vs in vlists for v in vs), key=value_key))
        nodes.append(intern(QubeNode._new(dim, values, children, payload)))
    if len(nodes) > 1:
        nodes.sort(key=_child_key)
    return tuple(nodes)


def _resolve_overlaps(pieces: list, intern: _Interner, memo: dict) -> list:
    """Union away same-dimension pieces whose value sets overlap.

    Trees built by from_tuples or by set operations never need this; it
    exists for hand-built or parsed trees.
    """
    by_dim: dict[str, list] = defaultdict(list)
    for p in pieces:
        by_dim[p[0]].append(p)
    out = []
    for dim, group in by_dim.items():
        if len(group) == 1 or sum(len(p[1]) for p in group) == len({v for p in group for v in p[1]}):
            out.extend(group)
            continue
        from .setops import UNION, _combine

        lists = [(QubeNode._new(*_node_args(p)),) for p in group]
        while len(lists) > 1:
            nxt = [_combine(lists[i], lists[i + 1], UNION, intern, memo) for i in range(0, len(lists) - 1, 2)]
            if len(lists) % 2:
                nxt.append(lists[-1])
            lists = nxt
        out.extend((n.dim, n.values, n.payload, n.children) for n in lists[0])
    return out


def _node_args(piece: tuple) -> tuple:
    dim, values, payload, children = piece
    return dim, values, children, payload


def _canonical_children(children: tuple, intern: _Interner, memo: dict) -> tuple:
    key = id(children)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    pieces = []
    dims = set()
    overlap_possible = False
    for c in children:
        sub = _canonical_children(c.children, intern, memo) if c.children else ()
        pieces.append((c.dim, c.values, c.payload, sub))
        if c.dim in dims:
            overlap_possible = True
        dims.add(c.dim)
    if overlap_possible:
        pieces = _resolve_overlaps(pieces, intern, memo)
    result = _assemble(pieces, intern)
    # keep `children` alive so its id cannot be recycled during this call
    memo[key] = (children, result)
    return result


def compress(q: Qube) -> Qube:
    """Canonical compressed form of ``q``.

    Works bottom-up: each sibling list is canonicalised after its children,
    merging siblings that share dimension, payload and an identical child
    list by joining their value sets. The tuple set is preserved exactly.
    """
    intern = _Interner()
    children = _canonical_children(q.root.children, intern, {})
    return Qube._wrap(_root(children, q.root.payload), canonical=True)


def ensure_compressed(q: Qube) -> Qube:
    return q if q._canonical else compress(q)


# ---------------------------------------------------------------------------
# identity
# ---------------------------------------------------------------------------


def _len_prefixed(b: bytes) -> bytes:
    return struct.pack("<Q", len(b)) + b


def structural_hash(node: QubeNode) -> bytes:
    """128-bit digest of a subtree's canonical serialization.

    Equal subtrees always hash equal. The digest is a filter only: callers
    confirm equality structurally before acting on a match.
    """
    if node._digest is not None:
        return node._digest
    h = hashlib.blake2b(digest_size=DIGEST_SIZE)
    h.update(_len_prefixed(node.dim.encode()))
    h.update(struct.pack("<Q", len(node.values)))
    for v in node.values:
        h.update(_TAG_BYTE[tag_of(v)])
        h.update(_len_prefixed(raw_text(v).encode()))
    if node.payload is None:
        h.update(b"\x00")
    else:
        h.update(b"\x01" + _len_prefixed(node.payload))
    h.update(struct.pack("<Q", len(node.children)))
    for c in node.children:
        h.update(structural_hash(c))
    node._digest = h.digest()
    return node._digest


def semantic_equals(a: Qube, b: Qube) -> bool:
    return ensure_compressed(a).root == ensure_compressed(b).root


# ---------------------------------------------------------------------------
# traversal and counting
# ---------------------------------------------------------------------------


def _walk(node: QubeNode, prefix: tuple) -> Iterator[tuple]:
    dim = node.dim
    if node.children:
        for v in node.values:
            p = prefix + ((dim, v),)
            for c in node.children:
                yield from _walk(c, p)
    else:
        for v in node.values:
            yield prefix + ((dim, v),)


def leaves(q: Qube) -> Iterator[tuple]:
    """Yield every leaf tuple, depth-first in canonical order."""
    for c in q.root.children:
        yield from _walk(c, ())


def _walk_items(node: QubeNode, prefix: tuple) -> Iterator[tuple]:
    for v in node.values:
        p = prefix + ((node.dim, v),)
        if node.children:
            for c in node.children:
                yield from _walk_items(c, p)
        else:
            yield p, node.payload


def items(q: Qube) -> Iterator[tuple[tuple, bytes | None]]:
    """Like :func:`leaves` but pairs each tuple with its leaf payload."""
    for c in q.root.children:
        yield from _walk_items(c, ())


def count_leaves(q: Qube) -> int:
    memo: dict[int, int] = {}

    def count(node: QubeNode) -> int:
        got = memo.get(id(node))
        if got is None:
            if node.children:
                got = len(node.values) * sum(count(c) for c in node.children)
            else:
                got = len(node.values)
            memo[id(node)] = got
        return got

    return sum(count(c) for c in q.root.children)


def node_count(q: Qube) -> int:
    """Number of tree nodes, root included; shared subtrees count once per occurrence."""
    memo: dict[int, int] = {}

    def count(node: QubeNode) -> int:
        got = memo.get(id(node))
        if got is None:
            got = memo[id(node)] = 1 + sum(count(c) for c in node.children)
        return got

    return count(q.root)


def stats(q: Qube) -> QubeStats:
    """Leaf count, node count (root included), distinct structural nodes, depth."""
    sizes: dict[int, tuple[int, int]] = {}

    def size(node: QubeNode) -> tuple[int, int]:
        got = sizes.get(id(node))
        if got is None:
            n, d = 1, 0
            for c in node.children:
                cn, cd = size(c)
                n += cn
                d = max(d, cd)
            got = sizes[id(node)] = (n, d + 1)
        return got

    node_count, depth = size(q.root)
    # distinct structures: bucket by digest, confirm by full comparison
    buckets: dict[bytes, list[QubeNode]] = {}
    distinct = 0
    seen_ids: set[int] = set()
    stack = [q.root]
    while stack:
        node = stack.pop()
        if id(node) in seen_ids:
            continue
        seen_ids.add(id(node))
        stack.extend(node.children)
        reps = buckets.setdefault(structural_hash(node), [])
        if not any(r == node for r in reps):
            reps.append(node)
            distinct += 1
    return QubeStats(count_leaves(q), node_count, distinct, depth - 1)
