"""Compressed tree data hypercubes ("qubes") and byte-range extraction planning."""
from .core import (
    Qube,
    QubeNode,
    QubeStats,
    compress,
    count_leaves,
    from_tuples,
    items,
    leaves,
    node_count,
    semantic_equals,
    stats,
    structural_hash,
)
from .errors import (
    CapExceeded,
    CorruptField,
    DuplicateDimension,
    EmptyDimensionName,
    IncompatiblePath,
    IndentError,
    MixedTagRange,
    OutOfBounds,
    QubeError,
    QubeSyntaxError,
    SchemaError,
    ShortRead,
    UnknownField,
)
from .select import Constraint, MissingPolicy, Predicate, axes, parse_constraint, select
from .setops import difference, intersect, union

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "Constraint",
    "CorruptField",
    "DuplicateDimension",
    "EmptyDimensionName",
    "IncompatiblePath",
    "IndentError",
    "MissingPolicy",
    "MixedTagRange",
    "OutOfBounds",
    "Predicate",
    "Qube",
    "QubeError",
    "QubeNode",
    "QubeStats",
    "QubeSyntaxError",
    "SchemaError",
    "ShortRead",
    "UnknownField",
    "axes",
    "compress",
    "count_leaves",
    "difference",
    "from_tuples",
    "intersect",
    "items",
    "leaves",
    "node_count",
    "parse_constraint",
    "select",
    "semantic_equals",
    "stats",
    "structural_hash",
    "union",
]
