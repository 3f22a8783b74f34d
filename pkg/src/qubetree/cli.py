"""``qube`` command line.

Exit status: 0 on success, 1 on usage errors, 2 on data errors. Qube files
are read in either the JSON interchange or the text format and written as
JSON interchange.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench, extract, serialize
from .core import compress, count_leaves, stats
from .errors import QubeError
from .ingest import BuildConfig, MergeStrategy, build, parse_records
from .select import MissingPolicy, axes, parse_constraint, select
from .setops import difference, intersect, union
from .values import render_value

log = logging.getLogger("qubetree")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_qube(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return serialize.load_any(text)


def _write(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _write_qube(out: str, q) -> None:
    _write(out, serialize.dumps(q) + "\n")


def _constraint(args):
    missing = MissingPolicy.DROP if args.drop_missing else MissingPolicy.KEEP
    return parse_constraint(args.constraint, missing)


def _parse_grid(text: str) -> extract.GridSpec:
    try:
        nlat, nlon = (int(x) for x in text.lower().split("x"))
        return extract.GridSpec(nlat, nlon)
    except ValueError:
        raise UsageError(f"bad --grid {text!r}; expected NLATxNLON") from None


def cmd_build(args):
    strategy = MergeStrategy.SEQUENTIAL if args.strategy == "seq" else MergeStrategy.PAIRWISE_TREE
    cfg = BuildConfig(batch_size=args.batch, compress_each_batch=not args.no_early_compress, strategy=strategy)
    records = parse_records(Path(args.records).read_text(encoding="utf-8"))
    run_stats: dict = {}
    q = build(records, cfg, stats=run_stats)
    log.info("built %d records, peak intermediate nodes %d", len(records), run_stats["peak_nodes"])
    _write_qube(args.output, q)


def cmd_compress(args):
    _write_qube(args.output, compress(_read_qube(args.input)))


def _setop(fn):
    def run(args):
        _write_qube(args.output, fn(_read_qube(args.a), _read_qube(args.b)))

    return run


def cmd_select(args):
    _write_qube(args.output, select(_read_qube(args.input), _constraint(args)))


def cmd_count(args):
    print(count_leaves(_read_qube(args.input)))


def cmd_stats(args):
    s = stats(_read_qube(args.input))
    print(f"leaves={s.leaf_count} nodes={s.node_count} distinct={s.distinct_structural_nodes} depth={s.max_depth}")


def cmd_axes(args):
    for dim, vals in axes(_read_qube(args.input)).items():
        print(f"{dim}={'/'.join(render_value(v) for v in vals)}")


def cmd_ls(args):
    sys.stdout.write(serialize.to_text(_read_qube(args.input)))


def cmd_mockstore(args):
    grid = _parse_grid(args.grid)
    m = extract.FieldStoreManifest.for_qube(_read_qube(args.source), grid)
    extract.write_mock_store(m, args.output)
    print(f"fields={len(m.fields)} cells={m.grid.cell_count} bytes={len(m.fields) * m.field_size}")


def cmd_plan(args):
    q = _read_qube(args.qube)
    m = extract.load_manifest(args.store)
    try:
        feature = extract.Feature.parse(args.feature)
    except ValueError as e:
        raise UsageError(str(e)) from None
    p = extract.plan(q, _constraint(args), feature, m)
    line = f"ranges={len(p.ranges)} bytes={p.total_bytes} fields={p.fields_touched}"
    if args.execute:
        counter = extract.ReadCounter()
        values = extract.execute(p, Path(args.store) / m.data_path, counter)
        line += f" read={counter.payload_bytes} header_read={counter.header_bytes} values={len(values)}"
    print(line)


def cmd_bench(args):
    if args.kind == "construction":
        results = bench.bench_construction(args.shapes, args.sizes, args.reps)
    elif args.kind == "compression":
        results = bench.bench_compression(args.shapes, args.sizes, args.reps)
    else:
        results = bench.bench_union(args.mode, args.sizes, args.reps)
    bench.emit_csv(results, args.output)
    if not args.no_plot:
        from .plotting import plot_results

        fig = Path(args.output).with_suffix(".png")
        plot_results(results, fig, title=f"{args.kind} scaling")
        log.info("wrote %s", fig)
    for r in results:
        r2 = "n/a" if r.r2 is None else f"{r.r2:.4f}"
        print(f"{r.label} r2={r2}")


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qube", description="Compressed tree data hypercubes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("build", help="build a qube from a record file")
    s.add_argument("--records", required=True)
    s.add_argument("--batch", type=int, default=64)
    s.add_argument("--strategy", choices=("seq", "pairwise"), default="seq")
    s.add_argument("--no-early-compress", action="store_true")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("compress")
    s.add_argument("input")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_compress)

    for name, fn in (("union", union), ("intersect", intersect), ("diff", difference)):
        s = sub.add_parser(name)
        s.add_argument("a")
        s.add_argument("b")
        s.add_argument("-o", "--output", default="-")
        s.set_defaults(func=_setop(fn))

    s = sub.add_parser("select")
    s.add_argument("input")
    s.add_argument("--constraint", required=True)
    s.add_argument("--drop-missing", action="store_true")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_select)

    for name, fn in (("count", cmd_count), ("stats", cmd_stats), ("axes", cmd_axes), ("ls", cmd_ls)):
        s = sub.add_parser(name)
        s.add_argument("input")
        s.set_defaults(func=fn)

    s = sub.add_parser("mockstore", help="write a synthetic field store for a qube's leaves")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--grid", required=True, help="NLATxNLON")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_mockstore)

    s = sub.add_parser("plan", help="plan (and optionally run) a feature extraction")
    s.add_argument("qube")
    s.add_argument("--constraint", required=True)
    s.add_argument("--feature", required=True)
    s.add_argument("--store", required=True)
    s.add_argument("--drop-missing", action="store_true")
    s.add_argument("--execute", action="store_true")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("bench", help="scaling benchmarks; writes CSV and a PNG figure next to it")
    s.add_argument("kind", choices=("construction", "compression", "union"))
    s.add_argument("--sizes", type=int, nargs="+")
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--shapes", nargs="+", default=["flat", "branch", "wide"], choices=("flat", "branch", "wide"))
    s.add_argument("--mode", choices=("pairwise", "progressive"), default="pairwise")
    s.add_argument("--no-plot", action="store_true")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return 0 if e.code in (0, None) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except (QubeError, ValueError, TypeError, OSError, json.JSONDecodeError) as e:
        print(f"qube {args.command}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
