from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from demobpr import fixture_path
from demobpr.dsl import (
    DiagnosticKind,
    ParseError,
    SourceSpan,
    format_decimal,
    model_diff,
    parse,
    serialize,
)
from demobpr.model import EnterpriseModel, StepKind, StepRef, TransactionKind
from modelgen import enterprise_models

HEADER = """\
actor A01 "Customer" environmental
actor A02 "Seller" internal
fact B-R02 "[Selling] begins / [Selling] ends"
"""


def diagnostics(text):
    with pytest.raises(ParseError) as info:
        parse(text, "m.demo")
    return info.value.diagnostics


def test_transaction_line():
    m = parse(HEADER + 'transaction B-T02 "Selling" result B-R02 executor A02 initiators A01\n')
    assert m.transactions == (TransactionKind("B-T02", "Selling", "B-R02", "A02", ("A01",)),)


def test_empty_input():
    m = parse("")
    assert m == EnterpriseModel()
    assert m.name == "unnamed"


def test_undeclared_fact_in_use():
    text = HEADER + 'transaction B-T01 "t" result B-R02 executor A02 initiators A01\nuse B-R99 at B-T01/ex\n'
    ds = diagnostics(text)
    assert len(ds) == 1
    assert ds[0].kind is DiagnosticKind.REFERENCE
    assert ds[0].span == SourceSpan("m.demo", 5, 5)
    assert "B-R99" in ds[0].message


def test_reference_errors_are_all_collected():
    text = HEADER + "access A07 PB01\ntrigger X/ex -> Y/rq\n"
    ds = diagnostics(text)
    assert [d.kind for d in ds] == [DiagnosticKind.REFERENCE] * 4
    assert [d.span.line for d in ds] == [4, 4, 5, 5]


def test_syntax_diagnostics_carry_columns():
    ds = diagnostics('actor A01 "Customer" sideways\nbogus line\nmetrics B-T01/xx time 1 cost 1 freq 1\nfact F "open\n')
    assert [(d.span.line, d.kind) for d in ds] == [(i, DiagnosticKind.SYNTAX) for i in (1, 2, 3, 4)]
    assert ds[0].span.column == 22
    assert ds[1].span.column == 1
    assert ds[3].span.column == 8


def test_duplicates():
    ds = diagnostics(HEADER + 'actor a01 "Again" internal\n')
    assert [(d.kind, d.span.line) for d in ds] == [(DiagnosticKind.DUPLICATE, 4)]


def test_arrow_without_spaces_and_comments():
    text = HEADER + (
        'fact F2 "x"\n'
        'transaction T1 "t" result B-R02 executor A02 initiators A01  # trailing\n'
        'transaction T2 "u" result F2 executor A01 initiators A02\n'
        "trigger T1/ex->T2/rq\n"
    )
    m = parse(text)
    assert str(m.psd_links[0]) == "causal T1/ex -> T2/rq"


def test_crlf_and_bom():
    text = "﻿" + HEADER.replace("\n", "\r\n")
    assert parse(text) == parse(HEADER)


def test_serialize_examples():
    assert serialize(EnterpriseModel()) == 'model "unnamed"\n'
    one = parse('actor A "Solo" internal\n')
    lines = serialize(one).splitlines()
    assert sum(l.startswith("actor ") for l in lines) == 1


def test_escaped_strings_round_trip():
    m = parse('actor A "say \\"hi\\" \\\\ # not a comment" internal\n')
    assert m.actors[0].name == 'say "hi" \\ # not a comment'
    assert parse(serialize(m)) == m


@pytest.mark.parametrize("name", ["barez-asis.demo", "barez-tobe.demo", "branch-asis.demo", "selling.demo"])
def test_fixture_round_trip(name):
    text = fixture_path(name).read_text(encoding="utf-8")
    m = parse(text)
    once = serialize(m)
    assert parse(once) == m
    assert serialize(parse(once)) == once


def test_format_decimal():
    assert format_decimal(Decimal("100.000")) == "100"
    assert format_decimal(Decimal("1E+2")) == "100"
    assert format_decimal(Decimal("0.3320")) == "0.332"
    assert format_decimal(Decimal("4566.80")) == "4566.8"


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(enterprise_models())
def test_round_trip_random(model):
    text = serialize(model)
    again = parse(text)
    assert again == model
    assert serialize(again) == text


_FRAGMENTS = st.sampled_from(
    ["actor", "fact", "transaction", "bank", "access", "trigger", "wait", "use", "metrics",
     "model", "A01", "B-T01/ex", "->", ",", '"x"', '"', "#", "result", "executor", "initiators",
     "time", "1.5", "-3", "production", "internal", "contains", "label", "\t", " ", "\n", "é", "\x00"]
)


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.text(max_size=80), st.lists(_FRAGMENTS, max_size=30).map(" ".join)))
def test_parse_is_total(text):
    try:
        parse(text)
    except ParseError as exc:
        assert exc.diagnostics
        for d in exc.diagnostics:
            assert d.span.line >= 1 and d.span.column >= 1


# -- diff ---------------------------------------------------------------------


def test_diff_identity(asis):
    assert model_diff(asis, asis).empty


def test_diff_checking_the_customer(asis, tobe):
    d = model_diff(asis, tobe)
    delta = next(x for x in d.metric_deltas if x.label == "Checking the Customer")
    assert delta.step == StepRef("B-T02", StepKind.RQ)
    assert delta.cost == (Decimal(20), Decimal(10))
    assert delta.duration == (Decimal(200), Decimal(20))


def numbers(delta):
    return (delta.step, delta.duration, delta.cost, delta.daily_frequency)


def test_diff_anti_symmetric(asis, tobe):
    ab, ba = model_diff(asis, tobe), model_diff(tobe, asis)
    assert ab.added == ba.removed and ab.removed == ba.added
    assert [numbers(x) for x in ab.metric_deltas] == [numbers(x.swapped()) for x in ba.metric_deltas]


def test_diff_removing_a_transaction():
    text = fixture_path("barez-asis.demo").read_text(encoding="utf-8")
    kept = "\n".join(l for l in text.splitlines() if "b-t07" not in l.lower())
    before, after = parse(text), parse(kept)
    d = model_diff(before, after)
    assert not d.added and not d.changed and not d.metric_deltas
    tx_removed = [e for e in d.removed if e.kind == "transaction"]
    assert tx_removed == [e for e in d.removed if e.key == "B-T07"]
    assert len(tx_removed) == 1
    dependents = [e for e in d.removed if e.kind != "transaction"]
    assert dependents and all("B-T07" in e.key for e in dependents)
    assert {e.kind for e in dependents} == {"trigger", "use", "metrics"}


@settings(max_examples=50, deadline=None)
@given(enterprise_models(max_transactions=5), enterprise_models(max_transactions=5))
def test_diff_anti_symmetric_random(a, b):
    ab, ba = model_diff(a, b), model_diff(b, a)
    assert ab.added == ba.removed and ab.removed == ba.added
    assert [numbers(x) for x in ab.metric_deltas] == [numbers(x.swapped()) for x in ba.metric_deltas]
    assert model_diff(a, a).empty
