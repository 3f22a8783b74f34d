from __future__ import annotations

from datetime import date

import pytest

from oracles import canonical_problems, random_constraint_rules, random_tuples, rng_for, satisfies
from qubetree import (
    Constraint,
    MissingPolicy,
    MixedTagRange,
    Predicate,
    QubeSyntaxError,
    axes,
    compress,
    from_tuples,
    leaves,
    parse_constraint,
    select,
)


def q_of(tuples):
    return compress(from_tuples(tuples))


def to_constraint(rules, drop):
    preds = {}
    for dim, p in rules.items():
        if p[0] == "set":
            preds[dim] = Predicate.one_of(p[1])
        elif p[0] == "range":
            preds[dim] = Predicate.between(p[1], p[2])
        else:
            preds[dim] = Predicate.any()
    return Constraint(preds, MissingPolicy.DROP if drop else MissingPolicy.KEEP)


GRID = [(("date", d), ("step", s), ("param", p)) for d in (1, 2) for s in (0, 6, 12) for p in ("t", "z")]


def test_select_by_set_and_range():
    q = q_of(GRID)
    got = select(q, parse_constraint("param=t,step=0..6"))
    assert set(leaves(got)) == {t for t in GRID if t[2][1] == "t" and t[1][1] <= 6}
    assert canonical_problems(got) == []


def test_select_any_is_identity_on_present_dims():
    q = q_of(GRID)
    assert select(q, parse_constraint("param=*")) == q
    assert select(q, Constraint()) == q


def test_select_missing_policy():
    q = q_of([(("a", 1), ("b", 1)), (("a", 2),)])
    keep = select(q, parse_constraint("b=1"))
    drop = select(q, parse_constraint("b=1", MissingPolicy.DROP))
    assert set(leaves(keep)) == {(("a", 1), ("b", 1)), (("a", 2),)}
    assert set(leaves(drop)) == {(("a", 1), ("b", 1))}
    assert set(leaves(select(q, parse_constraint("b=*", MissingPolicy.DROP)))) == {(("a", 1), ("b", 1))}


def test_select_no_match_is_empty():
    assert not select(q_of(GRID), parse_constraint("param=q"))


def test_select_does_not_descend_into_pruned_branches():
    # 50 dates over subtrees that cannot merge with each other
    tuples = [(("date", d), ("step", s), ("param", f"p{d}_{s}_{k}")) for d in range(50) for s in range(5) for k in range(4)]
    q = q_of(tuples)
    full: dict = {}
    select(q, Constraint(), stats=full)
    narrow: dict = {}
    got = select(q, parse_constraint("date=7"), stats=narrow)
    assert set(leaves(got)) == {t for t in tuples if t[0][1] == 7}
    # visits: all 50 date nodes, then only the kept date's subtree
    kept_subtree = len(q.root.children[7].children) + sum(len(c.children) for c in q.root.children[7].children)
    assert narrow["visited"] == 50 + kept_subtree
    assert narrow["visited"] < full["visited"] / 5


def test_range_tag_mismatch_raises():
    q = q_of([(("a", "x"),)])
    with pytest.raises(MixedTagRange):
        select(q, Constraint({"a": Predicate.between(1, 5)}))
    with pytest.raises(MixedTagRange):
        Predicate.between(1, "5")


def test_parse_constraint_values_and_errors():
    c = parse_constraint("date=20240101..20240105, param=t/z, step=*")
    assert c.by_dim["date"] == Predicate.between(date(2024, 1, 1), date(2024, 1, 5))
    assert c.by_dim["param"] == Predicate.one_of(["t", "z"])
    assert c.by_dim["step"].kind == "any"
    with pytest.raises(QubeSyntaxError) as e:
        parse_constraint("a=1,bogus")
    assert e.value.column == 5
    for bad in ("a=1,a=2", "a=5..1", "a=1..x", "=1", "a=x~q"):
        with pytest.raises(QubeSyntaxError):
            parse_constraint(bad)


def test_constraint_and_requires_disjoint_dims():
    c = parse_constraint("a=1") & parse_constraint("b=2")
    assert set(c.by_dim) == {"a", "b"}
    with pytest.raises(ValueError):
        parse_constraint("a=1") & parse_constraint("a=2")


@pytest.mark.parametrize("k", range(40))
@pytest.mark.parametrize("drop", [False, True])
def test_random_select_matches_filter_oracle(k, drop):
    rng = rng_for("select", k)
    tuples = random_tuples(rng, max_tuples=2000)
    rules = random_constraint_rules(rng, tuples)
    c = to_constraint(rules, drop)
    got = select(q_of(tuples), c)
    expected = {t for t in tuples if satisfies(t, rules, drop)}
    assert set(leaves(got)) == expected
    assert {t for t in tuples if c.satisfied_by(t)} == expected
    assert canonical_problems(got) == []


def test_axes():
    q = q_of(GRID + [(("date", 3), ("level", 500))])
    assert axes(q) == {"date": (1, 2, 3), "level": (500,), "param": ("t", "z"), "step": (0, 6, 12)}
    assert axes(q_of([])) == {}


def test_axes_random_matches_oracle():
    for k in range(20):
        tuples = random_tuples(rng_for("axes", k))
        expected: dict = {}
        for t in tuples:
            for d, v in t:
                expected.setdefault(d, set()).add(v)
        got = axes(q_of(tuples))
        assert {d: set(v) for d, v in got.items()} == expected
        assert list(got) == sorted(got)
