"""Desk-scale scaling benchmarks for the core tree operations.

Shapes:

* flat: one dimension with ``n`` leaves, so ``n + 1`` nodes counting the root.
* branch: a chain of ``total_depth`` dimensions that splits ``width`` ways
  at ``depth`` (1 = just below the root).
* wide: balanced tree, ``b`` children per node over ``depth`` levels.

Timings are medians of ``reps`` runs after one discarded warm-up, taken
with the garbage collector paused.
"""
from __future__ import annotations

import csv
import gc
import itertools
import math
import os
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import Qube, compress, from_tuples
from .errors import CapExceeded
from .ingest import MetadataRecord
from .setops import union

DEFAULT_CAP = 10**6
CSV_HEADER = ("label", "size", "median_ns", "slope", "intercept", "r2")


# ---------------------------------------------------------------------------
# shapes
# ---------------------------------------------------------------------------


def _record(dims: Sequence[str], values: Sequence) -> MetadataRecord:
    return MetadataRecord(tuple((d, (v,)) for d, v in zip(dims, values)))


def gen_flat(n_leaves: int, cap: int = DEFAULT_CAP) -> list[MetadataRecord]:
    if n_leaves < 1:
        raise ValueError("n_leaves must be positive")
    if n_leaves > cap:
        raise CapExceeded(f"{n_leaves} leaves exceeds cap {cap}")
    return [_record(("param",), (i,)) for i in range(n_leaves)]


def gen_branch_at_depth(depth: int, total_depth: int, width: int, cap: int = DEFAULT_CAP) -> list[MetadataRecord]:
    if not 1 <= depth <= total_depth or width < 1:
        raise ValueError("need 1 <= depth <= total_depth and width >= 1")
    if width > cap:
        raise CapExceeded(f"{width} leaves exceeds cap {cap}")
    dims = [f"d{i}" for i in range(1, total_depth + 1)]
    return [
        _record(dims, [b if level == depth else 0 for level in range(1, total_depth + 1)])
        for b in range(width)
    ]


def gen_wide(depth: int, branching: int, cap: int = DEFAULT_CAP) -> list[MetadataRecord]:
    if depth < 1 or branching < 1:
        raise ValueError("depth and branching must be positive")
    if branching**depth > cap:
        raise CapExceeded(f"{branching}^{depth} leaves exceeds cap {cap}")
    dims = [f"l{i}" for i in range(1, depth + 1)]
    return [_record(dims, combo) for combo in itertools.product(range(branching), repeat=depth)]


def flat_nodes(n_leaves: int) -> int:
    return n_leaves + 1


def branch_nodes(depth: int, total_depth: int, width: int) -> int:
    return 1 + (depth - 1) + width * (total_depth - depth + 1)


def wide_nodes(depth: int, branching: int) -> int:
    return sum(branching**i for i in range(depth + 1))


def tuples_of(records: Iterable[MetadataRecord]) -> list[tuple]:
    return [t for r in records for t in r.tuples()]


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


@dataclass
class BenchResult:
    label: str
    sizes: list[int]
    times_ns: list[float]
    slope: float | None = None
    intercept: float | None = None
    r2: float | None = None

    def __post_init__(self):
        if len(self.sizes) != len(self.times_ns):
            raise ValueError("sizes and times_ns differ in length")
        if any(a >= b for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if self.slope is None and len(self.sizes) >= 2:
            self.slope, self.intercept, self.r2 = linear_fit(self.sizes, self.times_ns)

    @property
    def has_fit(self) -> bool:
        return self.slope is not None


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through the points, plus its r²."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def _timed(fn: Callable[[], object]) -> int:
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        fn()
        return time.perf_counter_ns() - t0
    finally:
        gc.enable()


def median_ns(fn: Callable[[], object], reps: int = 5) -> float:
    """Median wall time of ``fn`` over ``reps`` runs, after one warm-up run."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    was_enabled = gc.isenabled()
    fn()
    try:
        samples = [_timed(fn) for _ in range(reps)]
    finally:
        if not was_enabled:
            gc.disable()
    return statistics.median(samples)


def doubling_ratio(make_fn: Callable[[int], Callable[[], object]], n: int, reps: int = 5, trials: int = 3) -> float:
    """time(2n) / time(n) for a workload factory.

    Runs of the two sizes alternate so that slow machine drift hits both
    alike. Each trial builds fresh inputs and yields the ratio of medians;
    the result is the median over trials.
    """
    if reps < 1 or trials < 1:
        raise ValueError("reps and trials must be >= 1")
    ratios = []
    for _ in range(trials):
        small, large = make_fn(n), make_fn(2 * n)
        small()
        large()
        ts, tl = [], []
        for _ in range(reps):
            ts.append(_timed(small))
            tl.append(_timed(large))
        ratios.append(statistics.median(tl) / statistics.median(ts))
    return statistics.median(ratios)


# ---------------------------------------------------------------------------
# workloads
# ---------------------------------------------------------------------------


def construction_workload(records: list[MetadataRecord]) -> Callable[[], Qube]:
    ts = tuples_of(records)
    return lambda: from_tuples(ts)


def compression_workload(records: list[MetadataRecord]) -> Callable[[], Qube]:
    q = from_tuples(tuples_of(records))
    return lambda: compress(q)


def sparse_pair(n: int) -> tuple[Qube, Qube]:
    """Two compressed qubes of ``n`` leaves, half overlapping, that do not collapse."""
    a = compress(from_tuples((("a", i), ("b", i)) for i in range(n)))
    b = compress(from_tuples((("a", i), ("b", i)) for i in range(n // 2, n // 2 + n)))
    return a, b


def dense_pair(n: int) -> tuple[Qube, Qube]:
    """Two flat compressed qubes of ``n`` values each (one node apiece)."""
    a = compress(from_tuples((("a", i),) for i in range(n)))
    b = compress(from_tuples((("a", i),) for i in range(n // 2, n // 2 + n)))
    return a, b


def slice_qube(j: int, steps: int = 24, params: int = 40) -> Qube:
    """One date slice with a fixed, partly irregular step/param layout."""
    ts = [
        (("date", j), ("step", s), ("param", p))
        for s in range(steps)
        for p in range(params)
        if (s * 7 + p) % 5 != 0 or s % 3 == 0
    ]
    return compress(from_tuples(ts))


def _union_of(a: Qube, b: Qube) -> Callable[[], Qube]:
    return lambda: union(a, b)


def progressive_workload(k: int, slices: Sequence[Qube]) -> Callable[[], Qube]:
    def run() -> Qube:
        acc = Qube.empty()
        for q in slices[:k]:
            acc = union(acc, q)
        return acc

    return run


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

DEFAULT_LEAF_SIZES = (1_000, 10_000, 100_000)
DEFAULT_BRANCH = {"total_depth": 8, "width": 2_000}
DEFAULT_WIDE = {"depth": 4, "branching": (4, 6, 8, 10, 12)}


def _shape_sweeps(shapes: Iterable[str], sizes: Sequence[int] | None):
    for shape in shapes:
        if shape == "flat":
            for n in sizes or DEFAULT_LEAF_SIZES:
                yield "flat", n, gen_flat(n)
        elif shape == "branch":
            k, w = DEFAULT_BRANCH["total_depth"], DEFAULT_BRANCH["width"]
            for d in sizes or range(1, k + 1):
                yield "branch", d, gen_branch_at_depth(d, k, w)
        elif shape == "wide":
            depth = DEFAULT_WIDE["depth"]
            for b in sizes or DEFAULT_WIDE["branching"]:
                yield "wide", wide_nodes(depth, b), gen_wide(depth, b)
        else:
            raise ValueError(f"unknown shape {shape!r}")


def interleaved_medians(fns: Sequence[Callable[[], object]], reps: int = 5) -> list[float]:
    """Median time of each workload, timed round-robin after one warm-up each.

    Interleaving spreads slow machine drift evenly over all sizes instead of
    turning it into a spurious trend.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    was_enabled = gc.isenabled()
    for fn in fns:
        fn()
    samples: list[list[int]] = [[] for _ in fns]
    try:
        for _ in range(reps):
            for i, fn in enumerate(fns):
                samples[i].append(_timed(fn))
    finally:
        if not was_enabled:
            gc.disable()
    return [statistics.median(s) for s in samples]


def _sweep(prefix: str, shapes, sizes, reps, workload) -> list[BenchResult]:
    grouped: dict[str, tuple[list, list]] = {}
    for shape, x, records in _shape_sweeps(shapes, sizes):
        xs, fns = grouped.setdefault(shape, ([], []))
        xs.append(x)
        fns.append(workload(records))
    return [BenchResult(f"{prefix}/{shape}", xs, interleaved_medians(fns, reps)) for shape, (xs, fns) in grouped.items()]


def bench_construction(shapes=("flat", "branch", "wide"), sizes=None, reps: int = 5) -> list[BenchResult]:
    """Time naive construction. x-axis: leaves (flat), depth (branch), nodes (wide)."""
    return _sweep("construction", shapes, sizes, reps, construction_workload)


def bench_compression(shapes=("flat", "branch", "wide"), sizes=None, reps: int = 5) -> list[BenchResult]:
    return _sweep("compression", shapes, sizes, reps, compression_workload)


def bench_union(mode: str = "pairwise", sizes=None, reps: int = 5) -> list[BenchResult]:
    """Pairwise: union of two equal-size qubes vs leaves per input.

    Progressive: cumulative time of folding ``k`` fixed-size slices vs ``k``.
    """
    if mode == "pairwise":
        out = []
        for label, make in (("union/sparse", sparse_pair), ("union/dense", dense_pair)):
            xs = list(sizes or DEFAULT_LEAF_SIZES)
            fns = [_union_of(*make(n)) for n in xs]
            out.append(BenchResult(label, xs, interleaved_medians(fns, reps)))
        return out
    if mode == "progressive":
        ks = list(sizes or (8, 16, 32, 64))
        slices = [slice_qube(j) for j in range(max(ks))]
        ts = interleaved_medians([progressive_workload(k, slices) for k in ks], reps)
        return [BenchResult("union/progressive", ks, ts)]
    raise ValueError(f"unknown union mode {mode!r}")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.6g}"


def emit_csv(results: Iterable[BenchResult], path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in results:
            for x, t in zip(r.sizes, r.times_ns):
                w.writerow((r.label, x, f"{t:.0f}", _fmt(r.slope), _fmt(r.intercept), _fmt(r.r2)))
