from __future__ import annotations

import itertools
from datetime import date

import pytest

from oracles import random_tuples, rng_for
from qubetree import DuplicateDimension, IncompatiblePath, QubeSyntaxError, compress, count_leaves, from_tuples, leaves
from qubetree.ingest import BuildConfig, MergeStrategy, MetadataRecord, build, parse_records, render_records

CONFIGS = [
    BuildConfig(batch_size=b, compress_each_batch=e, strategy=s)
    for b, e, s in itertools.product((1, 7, 64), (True, False), MergeStrategy)
]


def records_from_tuples(tuples):
    return [MetadataRecord(tuple((d, (v,)) for d, v in t)) for t in tuples]


def test_record_expands_to_cartesian_product():
    r = MetadataRecord.of(cls="od", date=[date(2020, 1, 1), date(2020, 1, 2)], param=["t", "z", "u"])
    assert r.size == 6
    assert len(set(r.tuples())) == 6
    q = r.to_qube()
    assert compress(q) == q
    assert set(leaves(q)) == set(r.tuples())


def test_record_rejects_repeats_and_empty_lists():
    with pytest.raises(DuplicateDimension):
        MetadataRecord((("a", (1,)), ("a", (2,))))
    with pytest.raises(ValueError):
        MetadataRecord((("a", ()),))


def test_parse_records_document():
    text = "# header\n\nclass=od,date=20200101/20200102,param=t/z\n  step=0/6 , param=t\n"
    recs = parse_records(text)
    assert [r.size for r in recs] == [4, 2]
    assert recs[0].pairs[1] == ("date", (date(2020, 1, 1), date(2020, 1, 2)))
    assert recs[1].pairs[0] == ("step", (0, 6))
    assert parse_records(render_records(recs)) == recs


def test_parse_records_types_override():
    (r,) = parse_records("date=20200101,step=6", types={"date": "str", "step": "str"})
    assert r.pairs == (("date", ("20200101",)), ("step", ("6",)))


def test_parse_records_errors_have_lines():
    with pytest.raises(DuplicateDimension) as e:
        parse_records("a=1\nb=2,b=3\n")
    assert e.value.line == 2
    with pytest.raises(QubeSyntaxError) as e:
        parse_records("a=1\n\nnonsense\n")
    assert e.value.line == 3
    with pytest.raises(QubeSyntaxError) as e:
        parse_records("a=1,b=x~q")
    assert (e.value.line, e.value.column) == (1, 7)


def test_build_empty():
    assert not build([])


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: f"b{c.batch_size}-{'early' if c.compress_each_batch else 'late'}-{c.strategy.value}")
def test_build_configs_agree_with_oracle(cfg):
    tuples = random_tuples(rng_for("ingest"), max_tuples=3000)
    recs = records_from_tuples(sorted(tuples, key=repr))
    stats: dict = {}
    q = build(recs, cfg, stats=stats)
    assert set(leaves(q)) == tuples
    assert q == compress(from_tuples(tuples))
    assert stats["peak_nodes"] >= 1


def test_build_with_dense_records():
    recs = [MetadataRecord.of(date=d, step=[0, 6, 12], param=["t", "z"]) for d in range(1, 41)]
    q = build(recs, BuildConfig(batch_size=8))
    assert count_leaves(q) == 240
    assert [len(q.root.children), len(q.root.children[0].values)] == [1, 40]


def test_early_compression_bounds_peak():
    recs = [MetadataRecord.of(date=d, step=list(range(24)), param=[f"p{k}" for k in range(10)]) for d in range(60)]
    early, late = {}, {}
    a = build(recs, BuildConfig(batch_size=4, compress_each_batch=True), stats=early)
    b = build(recs, BuildConfig(batch_size=4, compress_each_batch=False), stats=late)
    assert a == b
    assert early["peak_nodes"] <= late["peak_nodes"]


def test_build_batch_order_hook_is_applied():
    recs = [MetadataRecord.of(a=i, b=[1, 2]) for i in range(10)]
    seen = []

    def order(batches):
        seen.append(len(batches))
        return list(reversed(batches))

    q = build(recs, BuildConfig(batch_size=3, batch_order=order))
    assert seen == [4]
    assert count_leaves(q) == 20


def test_build_conflict_across_batches():
    recs = [MetadataRecord.of(a=1), MetadataRecord.of(a=1, b=2)]
    for early in (True, False):
        with pytest.raises(IncompatiblePath):
            build(recs, BuildConfig(batch_size=1, compress_each_batch=early))


def test_batch_size_validated():
    with pytest.raises(ValueError):
        BuildConfig(batch_size=0)
