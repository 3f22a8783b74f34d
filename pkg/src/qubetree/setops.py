"""Set algebra over qubes.

All three walk both trees together. At each level the children of one
dimension are partitioned by value into a-only, b-only and shared parts;
only shared parts recurse. Work is proportional to the node and value
counts of the compressed inputs, never to the expanded tuple count.
"""
from __future__ import annotations

from .core import Qube, QubeNode, _assemble, _Interner, _root, ensure_compressed
from .errors import IncompatiblePath

UNION, INTERSECT, DIFFERENCE = "union", "intersect", "difference"


def _by_dim(nodes: tuple) -> dict[str, list[QubeNode]]:
    out: dict[str, list[QubeNode]] = {}
    for n in nodes:
        out.setdefault(n.dim, []).append(n)
    return out


def _partition(As: list[QubeNode], Bs: list[QubeNode]) -> dict[tuple, list]:
    """Bucket values by (index of owning a-node, index of owning b-node).

    Same-dimension siblings of a canonical qube have disjoint values, so
    each value has at most one owner per side. Buckets fill in each input's
    canonical order and therefore stay sorted.
    """
    owner_b = {}
    for j, n in enumerate(Bs):
        for v in n.values:
            owner_b[v] = j
    buckets: dict[tuple, list] = {}
    in_a = set()
    for i, n in enumerate(As):
        for v in n.values:
            key = (i, owner_b.get(v))
            got = buckets.get(key)
            if got is None:
                buckets[key] = [v]
            else:
                got.append(v)
        in_a.update(n.values)
    for j, n in enumerate(Bs):
        for v in n.values:
            if v not in in_a:
                key = (None, j)
                got = buckets.get(key)
                if got is None:
                    buckets[key] = [v]
                else:
                    got.append(v)
    return buckets


def _values(vals: list, node: QubeNode) -> tuple:
    return node.values if len(vals) == len(node.values) else tuple(vals)


def _combine(A: tuple, B: tuple, op: str, intern: _Interner, memo: dict) -> tuple:
    """Combine two canonical sibling lists; returns a canonical sibling list."""
    if not B:
        return () if op == INTERSECT else A
    if not A:
        return B if op == UNION else ()
    if A is B or A == B:
        return () if op == DIFFERENCE else A
    key = (id(A), id(B), op)
    hit = memo.get(key)
    if hit is not None:
        return hit[2]

    a_dims, b_dims = _by_dim(A), _by_dim(B)
    pieces = []
    for dim in sorted(a_dims.keys() | b_dims.keys()):
        As, Bs = a_dims.get(dim, ()), b_dims.get(dim, ())
        if not Bs:
            if op != INTERSECT:
                pieces.extend((n.dim, n.values, n.payload, n.children) for n in As)
            continue
        if not As:
            if op == UNION:
                pieces.extend((n.dim, n.values, n.payload, n.children) for n in Bs)
            continue
        for (i, j), vals in _partition(As, Bs).items():
            if j is None:
                if op != INTERSECT:
                    na = As[i]
                    pieces.append((dim, _values(vals, na), na.payload, na.children))
                continue
            if i is None:
                if op == UNION:
                    nb = Bs[j]
                    pieces.append((dim, _values(vals, nb), nb.payload, nb.children))
                continue
            na, nb = As[i], Bs[j]
            piece = _shared(dim, vals, na, nb, op, intern, memo)
            if piece is not None:
                pieces.append(piece)

    result = _assemble(pieces, intern)
    memo[key] = (A, B, result)
    return result


def _shared(dim, vals, na: QubeNode, nb: QubeNode, op, intern, memo):
    """Handle values present on both sides; returns a piece or None."""
    a_leaf, b_leaf = not na.children, not nb.children
    vals = _values(vals, na)
    if op == UNION:
        if na.payload != nb.payload:
            raise IncompatiblePath(f"conflicting payloads under {dim}={vals[0]!r}")
        if a_leaf != b_leaf:
            raise IncompatiblePath(f"path ending at {dim}={vals[0]!r} in one qube continues in the other")
        sub = () if a_leaf else _combine(na.children, nb.children, UNION, intern, memo)
        return (dim, vals, na.payload, sub)
    if op == INTERSECT:
        if a_leaf and b_leaf:
            return (dim, vals, na.payload, ())
        if a_leaf or b_leaf:
            return None
        sub = _combine(na.children, nb.children, INTERSECT, intern, memo)
        return (dim, vals, na.payload, sub) if sub else None
    # difference
    if a_leaf and b_leaf:
        return None
    if a_leaf or b_leaf:
        return (dim, vals, na.payload, na.children)
    sub = _combine(na.children, nb.children, DIFFERENCE, intern, memo)
    return (dim, vals, na.payload, sub) if sub else None


def _apply(a: Qube, b: Qube, op: str) -> Qube:
    a, b = ensure_compressed(a), ensure_compressed(b)
    children = _combine(a.root.children, b.root.children, op, _Interner(), {})
    return Qube._wrap(_root(children, a.root.payload), canonical=True)


def union(a: Qube, b: Qube) -> Qube:
    """Qube whose tuple set is the union of both inputs' tuple sets.

    Raises IncompatiblePath when a shared tuple carries different payloads
    or when one input's leaf is an interior node of the other.
    """
    return _apply(a, b, UNION)


def intersect(a: Qube, b: Qube) -> Qube:
    """Tuples present in both inputs. Payloads are taken from ``a``."""
    return _apply(a, b, INTERSECT)


def difference(a: Qube, b: Qube) -> Qube:
    """Tuples of ``a`` absent from ``b``; payloads do not affect membership."""
    return _apply(a, b, DIFFERENCE)
