"""Constraint model, branch-pruning selection and axis discovery."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import Qube, QubeNode, _assemble, _Interner, _root, ensure_compressed
from .errors import MixedTagRange, QubeSyntaxError
from .values import Value, check_dim, coerce_value, parse_value, tag_of, value_key


class MissingPolicy(enum.Enum):
    KEEP = "keep"
    DROP = "drop"


@dataclass(frozen=True)
class Predicate:
    kind: str  # "set" | "range" | "any"
    values: frozenset = frozenset()
    lo: Value | None = None
    hi: Value | None = None

    def __post_init__(self):
        if self.kind == "range":
            if tag_of(self.lo) != tag_of(self.hi):
                raise MixedTagRange(f"range bounds {self.lo!r}..{self.hi!r} have different tags")
            if value_key(self.lo) > value_key(self.hi):
                raise ValueError(f"empty range {self.lo!r}..{self.hi!r}")
        elif self.kind not in ("set", "any"):
            raise ValueError(f"unknown predicate kind {self.kind!r}")

    @classmethod
    def one_of(cls, values: Iterable) -> Predicate:
        return cls("set", frozenset(coerce_value(v) for v in values))

    @classmethod
    def between(cls, lo, hi) -> Predicate:
        return cls("range", lo=coerce_value(lo), hi=coerce_value(hi))

    @classmethod
    def any(cls) -> Predicate:
        return cls("any")

    def matches(self, v: Value) -> bool:
        if self.kind == "any":
            return True
        if self.kind == "set":
            return v in self.values
        if type(v) is not type(self.lo):
            raise MixedTagRange(f"range over {tag_of(self.lo)} applied to {tag_of(v)} value {v!r}")
        return self.lo <= v <= self.hi

    def filter(self, values: tuple) -> tuple:
        if self.kind == "any":
            return values
        if self.kind == "set":
            if all(v in self.values for v in values):
                return values
            return tuple(v for v in values if v in self.values)
        kept = tuple(v for v in values if self.matches(v))
        return values if len(kept) == len(values) else kept


@dataclass(frozen=True)
class Constraint:
    by_dim: Mapping[str, Predicate] = field(default_factory=dict)
    missing: MissingPolicy = MissingPolicy.KEEP

    def __and__(self, other: Constraint) -> Constraint:
        overlap = self.by_dim.keys() & other.by_dim.keys()
        if overlap:
            raise ValueError(f"constraints overlap on {sorted(overlap)}")
        return Constraint({**self.by_dim, **other.by_dim}, self.missing)

    def satisfied_by(self, t: tuple) -> bool:
        """Reference check of one leaf tuple; used by tests and the CLI."""
        dims = set()
        for dim, v in t:
            dims.add(dim)
            pred = self.by_dim.get(dim)
            if pred is not None and not pred.matches(v):
                return False
        return self.missing is MissingPolicy.KEEP or dims >= self.by_dim.keys()


def parse_constraint(expr: str, missing: MissingPolicy = MissingPolicy.KEEP) -> Constraint:
    """Parse ``dim=v1/v2,dim=lo..hi,dim=*``."""
    by_dim: dict[str, Predicate] = {}
    col = 1
    for clause in expr.split(","):
        stripped = clause.strip()
        here = col + len(clause) - len(clause.lstrip())
        col += len(clause) + 1
        if not stripped:
            continue
        dim, eq, rhs = stripped.partition("=")
        if not eq:
            raise QubeSyntaxError(f"expected dim=values in {stripped!r}", 1, here)
        dim = dim.strip()
        rhs = rhs.strip()
        try:
            check_dim(dim)
        except ValueError as e:
            raise QubeSyntaxError(str(e), 1, here) from None
        if dim in by_dim:
            raise QubeSyntaxError(f"dimension {dim!r} constrained twice", 1, here)
        if rhs == "*":
            by_dim[dim] = Predicate.any()
        elif ".." in rhs and "/" not in rhs:
            lo_tok, _, hi_tok = rhs.partition("..")
            lo = parse_value(lo_tok.strip(), line=1, column=here)
            hi = parse_value(hi_tok.strip(), line=1, column=here)
            try:
                by_dim[dim] = Predicate.between(lo, hi)
            except (MixedTagRange, ValueError) as e:
                raise QubeSyntaxError(str(e), 1, here) from None
        else:
            by_dim[dim] = Predicate.one_of(parse_value(tok.strip(), line=1, column=here) for tok in rhs.split("/"))
    return Constraint(by_dim, missing)


def select(q: Qube, c: Constraint, *, stats: dict | None = None) -> Qube:
    """Keep exactly the tuples of ``q`` that satisfy ``c``.

    Each node's values are filtered by its dimension's predicate; emptied
    nodes take their subtrees with them and are never descended into.
    Under DROP, paths that never meet some constrained dimension vanish.
    If ``stats`` is given, ``stats["visited"]`` counts inspected nodes.
    """
    q = ensure_compressed(q)
    preds = c.by_dim
    required = frozenset(preds) if c.missing is MissingPolicy.DROP else frozenset()
    intern = _Interner()
    memo: dict = {}
    visited = 0

    def visit(children: tuple, pending: frozenset) -> tuple:
        nonlocal visited
        key = (id(children), pending)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        pieces = []
        for n in children:
            visited += 1
            pred = preds.get(n.dim)
            vals = n.values if pred is None else pred.filter(n.values)
            if not vals:
                continue
            rest = pending - {n.dim} if n.dim in pending else pending
            if n.children:
                sub = visit(n.children, rest)
                if not sub:
                    continue
            elif rest:
                continue
            else:
                sub = ()
            pieces.append((n.dim, vals, n.payload, sub))
        result = _assemble(pieces, intern)
        memo[key] = (children, result)
        return result

    children = visit(q.root.children, required)
    if stats is not None:
        stats["visited"] = stats.get("visited", 0) + visited
    return Qube._wrap(_root(children, q.root.payload), canonical=True)


def axes(q: Qube) -> dict[str, tuple]:
    """Every dimension in ``q`` mapped to the sorted union of its values."""
    found: dict[str, set] = {}
    seen: set[int] = set()
    stack: list[QubeNode] = list(q.root.children)
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        found.setdefault(n.dim, set()).update(n.values)
        stack.extend(n.children)
    return {d: tuple(sorted(vs, key=value_key)) for d, vs in sorted(found.items())}
