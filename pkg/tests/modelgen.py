"""Hypothesis strategies producing valid random enterprise models."""

from __future__ import annotations

from decimal import Decimal

from hypothesis import strategies as st

from demobpr.model import (
    HAPPY_PATH,
    ActorRole,
    Bank,
    BankKind,
    EnterpriseModel,
    FactKind,
    InfoLink,
    IutEntry,
    LinkKind,
    Locus,
    PsdLink,
    StepKind,
    StepMetrics,
    StepRef,
    TransactionKind,
)

# printable text without line breaks, including quotes, backslashes and '#'
names = st.text(
    alphabet=st.characters(
        blacklist_categories=("Cc", "Cs", "Zl", "Zp"),
        blacklist_characters="\u0085",
    ),
    min_size=1,
    max_size=20,
).filter(lambda s: s.strip() != "")

decimals = st.decimals(min_value=0, max_value=10_000, places=3, allow_nan=False, allow_infinity=False)


@st.composite
def enterprise_models(
    draw,
    max_transactions: int = 12,
    happy_only: bool = False,
    integer_freq: bool = False,
    with_metrics: bool = True,
    max_freq: int = 10_000,
) -> EnterpriseModel:
    """A model that passes validation.

    ``happy_only`` keeps causal sources and metrics on rq, pm, ex, st, ac;
    causal links then only point from lower to higher transaction numbers and
    every root carries a metric with frequency of at least 1, so every
    transaction is instantiated by the simulator.
    """
    n_actors = draw(st.integers(2, 6))
    actors = [
        ActorRole(f"A{i:02d}", draw(names), draw(st.sampled_from(list(Locus))))
        for i in range(1, n_actors + 1)
    ]
    actor_ids = [a.id for a in actors]

    n_tx = draw(st.integers(1, max_transactions))
    facts = [FactKind(f"F{i:02d}", draw(names)) for i in range(1, n_tx + 1)]
    extra_facts = draw(st.integers(0, 2))
    facts += [FactKind(f"X{i:02d}", draw(names)) for i in range(1, extra_facts + 1)]
    fact_ids = [f.id for f in facts]

    txs = []
    for i in range(1, n_tx + 1):
        executor = draw(st.sampled_from(actor_ids))
        others = [a for a in actor_ids if a != executor]
        initiators = draw(st.lists(st.sampled_from(others), min_size=1, max_size=2, unique=True))
        txs.append(TransactionKind(f"T{i:02d}", draw(names), f"F{i:02d}", executor, tuple(initiators)))
    tx_ids = [t.id for t in txs]

    n_banks = draw(st.integers(0, 4))
    banks = [
        Bank(
            f"B{i:02d}",
            draw(st.sampled_from(list(BankKind))),
            draw(names),
            tuple(draw(st.lists(st.sampled_from(fact_ids), max_size=4, unique=True))),
        )
        for i in range(1, n_banks + 1)
    ]
    access = []
    if banks:
        pairs = [(a, b.id) for a in actor_ids for b in banks]
        access = [InfoLink(a, b) for a, b in draw(st.lists(st.sampled_from(pairs), max_size=6, unique=True))]

    all_steps = list(StepKind)
    source_steps = list(HAPPY_PATH) if happy_only else all_steps
    psd: set[PsdLink] = set()
    if n_tx > 1:
        for _ in range(draw(st.integers(0, 2 * n_tx))):
            i, j = draw(st.lists(st.sampled_from(tx_ids), min_size=2, max_size=2, unique=True))
            if happy_only and i > j:
                i, j = j, i
            step = draw(st.sampled_from(source_steps))
            psd.add(PsdLink(LinkKind.CAUSAL, StepRef(i, step), StepRef(j, StepKind.RQ)))
        for _ in range(draw(st.integers(0, n_tx))):
            i, j = draw(st.lists(st.sampled_from(tx_ids), min_size=2, max_size=2, unique=True))
            src = StepRef(i, draw(st.sampled_from(source_steps)))
            dst = StepRef(j, draw(st.sampled_from(source_steps)))
            psd.add(PsdLink(LinkKind.WAIT, src, dst))

    iut: set[IutEntry] = set()
    for _ in range(draw(st.integers(0, 2 * n_tx))):
        step = StepRef(draw(st.sampled_from(tx_ids)), draw(st.sampled_from(all_steps)))
        iut.add(IutEntry(draw(st.sampled_from(fact_ids)), step))

    metrics: dict[StepRef, StepMetrics] = {}
    if integer_freq:
        freq = st.integers(0, min(5, max_freq)).map(Decimal)
    else:
        freq = st.decimals(min_value=0, max_value=max_freq, places=3)
    metric_steps = list(HAPPY_PATH) if happy_only else all_steps
    if with_metrics:
        labels = draw(st.lists(names, min_size=1, max_size=4, unique=True))
        for t in tx_ids:
            for step in draw(st.lists(st.sampled_from(metric_steps), max_size=3, unique=True)):
                ref = StepRef(t, step)
                metrics[ref] = StepMetrics(ref, draw(decimals), draw(decimals), draw(freq), draw(st.sampled_from(labels)))
        if happy_only:
            targets = {l.target.transaction for l in psd if l.kind is LinkKind.CAUSAL}
            for t in tx_ids:
                if t in targets:
                    continue
                ref = StepRef(t, StepKind.RQ)
                old = metrics.get(ref)
                f = Decimal(draw(st.integers(1, 5)))
                metrics[ref] = StepMetrics(
                    ref,
                    old.duration if old else draw(decimals),
                    old.cost if old else draw(decimals),
                    max(f, old.daily_frequency) if old else f,
                    old.label if old else draw(st.sampled_from(labels)),
                )

    name = draw(names)
    return EnterpriseModel(
        name=name,
        actors=tuple(actors),
        facts=tuple(facts),
        transactions=tuple(txs),
        banks=tuple(banks),
        info_links=tuple(access),
        psd_links=tuple(psd),
        iut_entries=tuple(iut),
        metrics=tuple(metrics.values()),
    )
