"""Flat metadata records and large-qube builds.

A record file holds one record per line::

    # comment
    class=od,date=20200101/20200102,param=t/z

Each record stands for the Cartesian product of its value lists. Record
dimension order becomes tree order.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .core import Qube, QubeNode, _child_key, _root, compress, from_tuples, node_count
from .errors import DuplicateDimension, IncompatiblePath, QubeSyntaxError
from .setops import union
from .values import TAGS, Value, check_dim, coerce_value, parse_value, render_value, sort_values


@dataclass(frozen=True)
class MetadataRecord:
    pairs: tuple[tuple[str, tuple[Value, ...]], ...]

    def __post_init__(self):
        seen = set()
        for dim, vals in self.pairs:
            check_dim(dim)
            if dim in seen:
                raise DuplicateDimension(f"dimension {dim!r} repeats in record")
            seen.add(dim)
            if not vals:
                raise ValueError(f"dimension {dim!r} has no values")

    @classmethod
    def of(cls, /, **dims) -> MetadataRecord:
        """Convenience: ``MetadataRecord.of(a=[1, 2], b="x")``."""
        pairs = []
        for dim, vals in dims.items():
            if isinstance(vals, (str, bytes)) or not isinstance(vals, Iterable):
                vals = [vals]
            pairs.append((dim, tuple(coerce_value(v) for v in vals)))
        return cls(tuple(pairs))

    @property
    def size(self) -> int:
        n = 1
        for _, vals in self.pairs:
            n *= len(set(vals))
        return n

    def tuples(self) -> Iterator[tuple]:
        dims = [d for d, _ in self.pairs]
        for combo in itertools.product(*(vals for _, vals in self.pairs)):
            yield tuple(zip(dims, combo))

    def to_qube(self) -> Qube:
        """The record's dense sub-qube, already in compressed form."""
        node = None
        for dim, vals in reversed(self.pairs):
            node = QubeNode._new(dim, sort_values(vals), (node,) if node else (), None)
        return Qube._wrap(_root((node,) if node else ()), canonical=True)


class MergeStrategy(enum.Enum):
    SEQUENTIAL = "seq"
    PAIRWISE_TREE = "pairwise"


@dataclass(frozen=True)
class BuildConfig:
    batch_size: int = 64
    compress_each_batch: bool = True
    strategy: MergeStrategy = MergeStrategy.SEQUENTIAL
    # Reorders batches before merging. No similarity heuristic ships yet.
    batch_order: Callable[[list[Qube]], list[Qube]] | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def parse_records(text: str, types: Mapping[str, str] | None = None) -> list[MetadataRecord]:
    """Parse a record document.

    ``types`` optionally pins a dimension's value type ("int", "str",
    "date", "timestamp") instead of sniffing it.
    """
    types = dict(types or {})
    for dim, tag in types.items():
        if tag not in TAGS:
            raise ValueError(f"unknown type {tag!r} for dimension {dim!r}")
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        offset = len(line) - len(line.lstrip())
        pairs = []
        seen = set()
        col = offset + 1
        for clause in body.split(","):
            here = col + len(clause) - len(clause.lstrip())
            col += len(clause) + 1
            dim, eq, rhs = clause.strip().partition("=")
            if not eq:
                raise QubeSyntaxError(f"expected dim=values in {clause.strip()!r}", lineno, here)
            dim = dim.strip()
            try:
                check_dim(dim)
            except ValueError as e:
                raise QubeSyntaxError(str(e), lineno, here) from None
            if dim in seen:
                raise DuplicateDimension(f"dimension {dim!r} repeats", lineno)
            seen.add(dim)
            vcol = here + len(dim) + 1
            vals = []
            for tok in rhs.split("/"):
                vals.append(parse_value(tok.strip(), types.get(dim), line=lineno, column=vcol))
                vcol += len(tok) + 1
            pairs.append((dim, tuple(vals)))
        records.append(MetadataRecord(tuple(pairs)))
    return records


def render_records(records: Iterable[MetadataRecord]) -> str:
    lines = [
        ",".join(f"{dim}={'/'.join(render_value(v) for v in vals)}" for dim, vals in r.pairs)
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------


def _merge_naive(a: QubeNode, b: QubeNode) -> QubeNode:
    """Trie merge of two uncompressed trees keyed on (dim, values, payload)."""
    by_key = {(c.dim, c.values, c.payload): c for c in a.children}
    for c in b.children:
        key = (c.dim, c.values, c.payload)
        mine = by_key.get(key)
        if mine is None:
            by_key[key] = c
        elif mine.is_leaf != c.is_leaf:
            raise IncompatiblePath(f"path ending at {c.dim}={c.values[0]!r} continues in another batch")
        elif not c.is_leaf:
            by_key[key] = _merge_naive(mine, c)
    kids = tuple(sorted(by_key.values(), key=_child_key))
    return QubeNode._new(a.dim, a.values, kids, a.payload)


def _reduce(items: list, merge: Callable, strategy: MergeStrategy, on_step: Callable) -> object:
    if strategy is MergeStrategy.SEQUENTIAL:
        acc = items[0]
        for it in items[1:]:
            acc = merge(acc, it)
            on_step(acc)
        return acc
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            merged = merge(items[i], items[i + 1])
            on_step(merged)
            nxt.append(merged)
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def build(
    records: Sequence[MetadataRecord],
    cfg: BuildConfig = BuildConfig(),
    *,
    stats: dict | None = None,
) -> Qube:
    """Build a compressed qube holding every tuple of ``records``.

    Records are cut into batches of ``cfg.batch_size``. Each batch is built
    naively and, with ``compress_each_batch``, compressed before merging;
    otherwise batches are trie-merged uncompressed and compressed once at
    the end. If given, ``stats["peak_nodes"]`` receives the largest node
    count of any intermediate qube.
    """
    peak = 0

    def track(q: Qube) -> None:
        nonlocal peak
        peak = max(peak, node_count(q))

    batches = []
    for start in range(0, len(records), cfg.batch_size):
        chunk = records[start:start + cfg.batch_size]
        q = from_tuples(t for r in chunk for t in r.tuples())
        track(q)
        if cfg.compress_each_batch:
            q = compress(q)
            track(q)
        batches.append(q)
    if not batches:
        result = Qube.empty()
    else:
        if cfg.batch_order is not None:
            batches = list(cfg.batch_order(batches))
        if cfg.compress_each_batch:
            result = _reduce(batches, union, cfg.strategy, track)
        else:
            merged = _reduce(
                batches,
                lambda a, b: Qube._wrap(_merge_naive(a.root, b.root)),
                cfg.strategy,
                track,
            )
            result = compress(merged)
    if stats is not None:
        stats["peak_nodes"] = peak
    return result
