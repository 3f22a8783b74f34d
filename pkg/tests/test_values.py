from datetime import date, datetime, timezone, timedelta

import pytest
from hypothesis import given, strategies as st

from qubetree import QubeSyntaxError
from qubetree.values import (
    DATE,
    INT,
    STR,
    TIMESTAMP,
    coerce_value,
    escape,
    parse_value,
    render_value,
    sniff,
    sort_values,
    tag_of,
    unescape,
    value_key,
)

values = st.one_of(
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.text(),
    st.dates(min_value=date(1000, 1, 1), max_value=date(9999, 12, 31)),
    st.datetimes(min_value=datetime(1000, 1, 1), max_value=datetime(9999, 12, 31)).map(lambda d: d.replace(microsecond=0)),
)


def test_tag_order_int_str_date_timestamp():
    vs = [datetime(2020, 1, 1), date(2020, 1, 1), "a", 5, -1]
    assert sort_values(vs) == (-1, 5, "a", date(2020, 1, 1), datetime(2020, 1, 1))
    assert [tag_of(v) for v in sort_values(vs)] == [INT, INT, STR, DATE, TIMESTAMP]


def test_sort_values_dedupes():
    assert sort_values([3, 1, 3, "1", "1"]) == (1, 3, "1")


@pytest.mark.parametrize("bad", [True, 1.5, None, b"x", 2**63])
def test_coerce_rejects(bad):
    with pytest.raises((TypeError, ValueError)):
        coerce_value(bad)


def test_coerce_normalises_aware_datetimes_to_utc():
    aware = datetime(2021, 1, 1, 12, 0, 0, 123, tzinfo=timezone(timedelta(hours=2)))
    assert coerce_value(aware) == datetime(2021, 1, 1, 10, 0, 0)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("12", 12),
        ("-7", -7),
        ("012", "012"),
        ("20240101", date(2024, 1, 1)),
        ("20241399", 20241399),
        ("20240101T060000", datetime(2024, 1, 1, 6)),
        ("2t", "2t"),
        ("", ""),
    ],
)
def test_sniff(text, expected):
    got = sniff(text)
    assert got == expected and type(got) is type(expected)


def test_render_adds_suffix_only_when_needed():
    assert render_value(5) == "5"
    assert render_value("5") == "5~s"
    assert render_value("t") == "t"
    assert render_value(date(2024, 1, 2)) == "20240102"
    assert render_value(20240102) == "20240102~i"
    assert render_value("") == "~s"
    assert render_value("x,y") == "x%2Cy"


def test_escape_roundtrip_reserved():
    s = ",=/%\n\r@~*"
    assert all(c not in escape(s) for c in ",=/\n\r@~*")
    assert unescape(escape(s)) == s


def test_unescape_rejects_bad_percent():
    with pytest.raises(ValueError):
        unescape("50%")
    with pytest.raises(ValueError):
        unescape("%ZZ")


def test_parse_value_errors_carry_position():
    with pytest.raises(QubeSyntaxError) as e:
        parse_value("abc~q", line=3, column=7)
    assert (e.value.line, e.value.column) == (3, 7)
    with pytest.raises(QubeSyntaxError):
        parse_value("x~y~s")
    with pytest.raises(QubeSyntaxError):
        parse_value("")
    with pytest.raises(QubeSyntaxError):
        parse_value("abc", INT)


@given(values)
def test_render_parse_roundtrip(v):
    back = parse_value(render_value(v))
    assert back == v and type(back) is type(v)


@given(st.lists(values, max_size=20))
def test_value_key_is_total_and_consistent(vs):
    ordered = sorted(set(vs), key=value_key)
    keys = [value_key(v) for v in ordered]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
