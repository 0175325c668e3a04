from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings

from demobpr import fixture_path, parse, parse_file
from demobpr.model import (
    ActorRole,
    EnterpriseModel,
    FactKind,
    Locus,
    ModelError,
    StepKind,
    StepMetrics,
    StepRef,
    TransactionKind,
    boundary,
    require_valid,
    transaction_result_table,
    validate_model,
)
from modelgen import enterprise_models


def codes(model):
    return [i.code for i in validate_model(model).errors]


def test_fixtures_are_clean(asis, tobe):
    for m in (asis, tobe):
        report = validate_model(m)
        assert report.ok and not report.warnings
        assert report.summary() == "0 errors, 0 warnings"


def test_ids_are_case_insensitive():
    a = ActorRole(" a01 ", "Customer")
    assert a.id == "A01"
    assert StepRef.parse("b-t01/EX") == StepRef("B-T01", StepKind.EX)
    assert str(StepRef.parse("b-t01/EX")) == "B-T01/ex"


def test_collections_sorted_regardless_of_order():
    a, b = ActorRole("A02", "y"), ActorRole("A01", "x")
    assert EnterpriseModel(actors=(a, b)) == EnterpriseModel(actors=(b, a))


def test_dangling_and_duplicate_references():
    m = EnterpriseModel(
        actors=(ActorRole("A01", "x"), ActorRole("A02", "y")),
        facts=(FactKind("F1", "f"),),
        transactions=(
            TransactionKind("T1", "t", "F1", "A01", ("A09",)),
            TransactionKind("T2", "t", "F1", "A03", ("A01",)),
            TransactionKind("T3", "t", "F7", "A01", ("A01",)),
        ),
    )
    assert sorted(codes(m)) == [
        "DANGLING_EXECUTOR",
        "DANGLING_INITIATOR",
        "DANGLING_RESULT",
        "DUPLICATE_RESULT",
        "SELF_INITIATION",
    ]
    with pytest.raises(ModelError):
        require_valid(m)


def test_psd_rules():
    text = """
actor A "a" internal
actor B "b" internal
fact F1 "f1"
fact F2 "f2"
transaction T1 "t1" result F1 executor A initiators B
transaction T2 "t2" result F2 executor B initiators A
"""
    ok = parse(text + "trigger T1/ex -> T2/rq\n")
    assert validate_model(ok).ok
    m = parse(text)
    from demobpr.model import LinkKind, PsdLink

    bad = EnterpriseModel(
        name=m.name,
        actors=m.actors,
        facts=m.facts,
        transactions=m.transactions,
        psd_links=(
            PsdLink(LinkKind.CAUSAL, StepRef("T1", StepKind.EX), StepRef("T1", StepKind.RQ)),
            PsdLink(LinkKind.CAUSAL, StepRef("T1", StepKind.EX), StepRef("T2", StepKind.PM)),
            PsdLink(LinkKind.WAIT, StepRef("T9", StepKind.EX), StepRef("T2", StepKind.PM)),
        ),
    )
    assert sorted(codes(bad)) == ["CAUSAL_NOT_REQUEST", "CAUSAL_SELF_LINK", "DANGLING_STEP"]


def test_metric_checks_and_warnings():
    base = parse(
        'actor A "a" internal\nactor B "b" environmental\nactor C "idle" internal\n'
        'fact F1 "f1"\nfact F2 "spare"\n'
        'transaction T1 "t1" result F1 executor A initiators B\n'
    )
    m = EnterpriseModel(
        name="m",
        actors=base.actors,
        facts=base.facts,
        transactions=base.transactions,
        metrics=(
            StepMetrics(StepRef("T1", StepKind.RQ), Decimal(-1), Decimal(1), Decimal(1)),
            StepMetrics(StepRef("T1", StepKind.QT), Decimal(1), Decimal(1), Decimal(1)),
        ),
    )
    report = validate_model(m)
    assert [i.code for i in report.errors] == ["INVALID_METRIC"]
    assert sorted(i.code for i in report.warnings) == ["OFF_PATH_METRICS", "UNUSED_ACTOR", "UNUSED_FACT"]
    report = validate_model(base)
    assert "NO_METRICS" in [i.code for i in report.warnings]


def test_trt_single_transaction():
    rows = transaction_result_table(parse_file(fixture_path("selling.demo")))
    assert len(rows) == 1
    assert (rows[0].transaction, rows[0].name, rows[0].result) == ("B-T02", "Selling", "B-R02")


def test_trt_fixture(asis):
    rows = transaction_result_table(asis)
    assert [r.transaction for r in rows] == ["B-T01", "B-T02", "B-T04", "B-T05", "B-T06", "B-T07", "B-T08"]
    assert len({r.result for r in rows}) == len(rows)


def test_boundary_fixture(asis):
    b = boundary(asis)
    assert b.environmental_actors == ("A01", "A06")
    assert b.boundary_transactions == ("B-T01", "B-T04", "B-T05", "B-T06", "B-T07")


def test_composite_counts_as_environmental():
    m = parse(
        'actor A "a" internal\nactor C "c" composite\nfact F "f"\n'
        'transaction T "t" result F executor A initiators C\n'
    )
    assert boundary(m).environmental_actors == ("C",)
    assert boundary(m).boundary_transactions == ("T",)


@settings(max_examples=100, deadline=None)
@given(enterprise_models())
def test_boundary_matches_brute_force(model):
    b = boundary(model)
    internal = {a.id for a in model.actors if a.locus is Locus.INTERNAL}
    expected = []
    for t in model.transactions:
        sides = {a in internal for a in t.initiators} | {t.executor in internal}
        if len(sides) == 2:
            expected.append(t.id)
    assert list(b.boundary_transactions) == expected
    assert set(b.internal_actors) | set(b.environmental_actors) == {a.id for a in model.actors}
    assert not set(b.internal_actors) & set(b.environmental_actors)


@settings(max_examples=100, deadline=None)
@given(enterprise_models())
def test_generated_models_validate(model):
    assert validate_model(model).ok
