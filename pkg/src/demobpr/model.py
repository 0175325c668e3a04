"""Immutable DEMO enterprise ontology: actors, facts, transactions, banks and
process structure, with structural validation and the basic IAM views."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from functools import lru_cache
from typing import Iterable


class ModelError(ValueError):
    """Raised when an operation requires a model that passed validation."""


class Locus(str, Enum):
    INTERNAL = "internal"
    ENVIRONMENTAL = "environmental"
    COMPOSITE = "composite"


class BankKind(str, Enum):
    PRODUCTION = "production"
    COORDINATION = "coordination"


class LinkKind(str, Enum):
    CAUSAL = "causal"
    WAIT = "wait"


class StepKind(str, Enum):
    """Coordination and production acts of the DEMO transaction pattern."""

    RQ = "rq"
    PM = "pm"
    DC = "dc"
    QT = "qt"
    EX = "ex"
    ST = "st"
    AC = "ac"
    RJ = "rj"
    SP = "sp"

    @classmethod
    def parse(cls, text: str) -> StepKind:
        return cls(text.strip().lower())

    @property
    def order(self) -> int:
        return _STEP_ORDER[self]

    def __str__(self) -> str:
        return self.value


_STEP_ORDER = {kind: i for i, kind in enumerate(StepKind)}

HAPPY_PATH = (StepKind.RQ, StepKind.PM, StepKind.EX, StepKind.ST, StepKind.AC)


def canonical_id(value: str) -> str:
    return value.strip().upper()


@dataclass(frozen=True)
class ActorRole:
    id: str
    name: str
    locus: Locus = Locus.INTERNAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", canonical_id(self.id))
        object.__setattr__(self, "locus", Locus(self.locus))


@dataclass(frozen=True)
class FactKind:
    id: str
    statement: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", canonical_id(self.id))


@dataclass(frozen=True)
class TransactionKind:
    id: str
    name: str
    result: str
    executor: str
    initiators: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", canonical_id(self.id))
        object.__setattr__(self, "result", canonical_id(self.result))
        object.__setattr__(self, "executor", canonical_id(self.executor))
        object.__setattr__(
            self, "initiators", tuple(sorted({canonical_id(a) for a in self.initiators}))
        )

    @property
    def actors(self) -> frozenset[str]:
        return frozenset(self.initiators) | {self.executor}


@dataclass(frozen=True)
class Bank:
    id: str
    kind: BankKind
    name: str
    contents: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", canonical_id(self.id))
        object.__setattr__(self, "kind", BankKind(self.kind))
        object.__setattr__(
            self, "contents", tuple(sorted({canonical_id(f) for f in self.contents}))
        )


@dataclass(frozen=True)
class InfoLink:
    actor: str
    bank: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "actor", canonical_id(self.actor))
        object.__setattr__(self, "bank", canonical_id(self.bank))


@dataclass(frozen=True, order=False)
class StepRef:
    transaction: str
    step: StepKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "transaction", canonical_id(self.transaction))
        object.__setattr__(self, "step", StepKind.parse(str(self.step)))

    @classmethod
    def parse(cls, text: str) -> StepRef:
        """Parse ``B-T01/ex`` (case-insensitive). Raises ValueError."""
        tx, sep, step = text.strip().partition("/")
        if not sep or not tx.strip() or not step.strip():
            raise ValueError(f"malformed step reference {text!r}")
        return cls(tx, StepKind.parse(step))

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.transaction, self.step.order)

    def __str__(self) -> str:
        return f"{self.transaction}/{self.step.value}"


@dataclass(frozen=True)
class PsdLink:
    kind: LinkKind
    source: StepRef
    target: StepRef

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LinkKind(self.kind))

    @property
    def sort_key(self) -> tuple:
        return (self.kind.value, self.source.sort_key, self.target.sort_key)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.source} -> {self.target}"


@dataclass(frozen=True)
class IutEntry:
    fact: str
    step: StepRef

    def __post_init__(self) -> None:
        object.__setattr__(self, "fact", canonical_id(self.fact))


@dataclass(frozen=True)
class StepMetrics:
    """Daily workload of one step: minutes and EUR per execution, executions per workday."""

    step: StepRef
    duration: Decimal
    cost: Decimal
    daily_frequency: Decimal
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("duration", "cost", "daily_frequency"):
            object.__setattr__(self, name, Decimal(getattr(self, name)))
        if not self.label:
            object.__setattr__(self, "label", str(self.step))

    @property
    def daily_time(self) -> Decimal:
        return self.duration * self.daily_frequency

    @property
    def daily_cost(self) -> Decimal:
        return self.cost * self.daily_frequency


@dataclass(frozen=True)
class EnterpriseModel:
    """A complete ontology. Collections are stored sorted by key, so two models
    with the same declarations compare equal regardless of input order."""

    name: str = "unnamed"
    actors: tuple[ActorRole, ...] = ()
    facts: tuple[FactKind, ...] = ()
    transactions: tuple[TransactionKind, ...] = ()
    banks: tuple[Bank, ...] = ()
    info_links: tuple[InfoLink, ...] = ()
    psd_links: tuple[PsdLink, ...] = ()
    iut_entries: tuple[IutEntry, ...] = ()
    metrics: tuple[StepMetrics, ...] = ()

    def __post_init__(self) -> None:
        def put(name: str, items: Iterable, key) -> None:
            object.__setattr__(self, name, tuple(sorted(items, key=key)))

        put("actors", self.actors, lambda a: a.id)
        put("facts", self.facts, lambda f: f.id)
        put("transactions", self.transactions, lambda t: t.id)
        put("banks", self.banks, lambda b: b.id)
        put("info_links", self.info_links, lambda l: (l.actor, l.bank))
        put("psd_links", self.psd_links, lambda l: l.sort_key)
        put("iut_entries", self.iut_entries, lambda e: (e.step.sort_key, e.fact))
        put("metrics", self.metrics, lambda m: m.step.sort_key)

    def actor(self, actor_id: str) -> ActorRole:
        return _index(self.actors)[canonical_id(actor_id)]

    def fact(self, fact_id: str) -> FactKind:
        return _index(self.facts)[canonical_id(fact_id)]

    def transaction(self, tx_id: str) -> TransactionKind:
        return _index(self.transactions)[canonical_id(tx_id)]

    def bank(self, bank_id: str) -> Bank:
        return _index(self.banks)[canonical_id(bank_id)]

    @property
    def transaction_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.transactions)


def _index(items) -> dict:
    return {item.id: item for item in items}


# -- validation ---------------------------------------------------------------


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    code: str
    severity: Severity
    message: str
    location: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.location}: {self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity is Severity.WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> str:
        return f"{len(self.errors)} errors, {len(self.warnings)} warnings"


OFF_PATH_STEPS = frozenset({StepKind.DC, StepKind.QT, StepKind.RJ, StepKind.SP})


@lru_cache(maxsize=64)
def validate_model(model: EnterpriseModel) -> ValidationReport:
    """Check every referential and structural rule of the ontology.

    Problems are reported, never raised. Referential breakage is an error;
    modeling smells (unused facts or actors, transactions without metrics)
    are warnings.
    """
    issues: list[Issue] = []

    def error(code: str, location: str, message: str) -> None:
        issues.append(Issue(code, Severity.ERROR, message, location))

    def warn(code: str, location: str, message: str) -> None:
        issues.append(Issue(code, Severity.WARNING, message, location))

    def check_unique(kind: str, ids: list[str]) -> set[str]:
        seen: set[str] = set()
        for ident in ids:
            if not ident:
                error("EMPTY_ID", f"{kind}:", f"{kind} with empty identifier")
            elif ident in seen:
                error("DUPLICATE_ID", f"{kind}:{ident}", f"{kind} {ident} declared twice")
            seen.add(ident)
        return seen

    actor_ids = check_unique("actor", [a.id for a in model.actors])
    fact_ids = check_unique("fact", [f.id for f in model.facts])
    tx_ids = check_unique("transaction", [t.id for t in model.transactions])
    bank_ids = check_unique("bank", [b.id for b in model.banks])

    for a in model.actors:
        if not a.name.strip():
            error("EMPTY_NAME", f"actor:{a.id}", "actor name is empty")
    for f in model.facts:
        if not f.statement.strip():
            error("EMPTY_NAME", f"fact:{f.id}", "fact statement is empty")

    result_owner: dict[str, str] = {}
    for t in model.transactions:
        loc = f"transaction:{t.id}"
        if not t.name.strip():
            error("EMPTY_NAME", loc, "transaction name is empty")
        if t.result not in fact_ids:
            error("DANGLING_RESULT", loc, f"result {t.result} is not a declared fact kind")
        elif t.result in result_owner:
            error(
                "DUPLICATE_RESULT",
                loc,
                f"result {t.result} already belongs to {result_owner[t.result]}",
            )
        else:
            result_owner[t.result] = t.id
        if t.executor not in actor_ids:
            error("DANGLING_EXECUTOR", loc, f"executor {t.executor} is not a declared actor")
        if not t.initiators:
            error("NO_INITIATOR", loc, "transaction has no initiator")
        for a in t.initiators:
            if a not in actor_ids:
                error("DANGLING_INITIATOR", loc, f"initiator {a} is not a declared actor")
        if t.executor in t.initiators:
            error("SELF_INITIATION", loc, f"executor {t.executor} also initiates it")

    for b in model.banks:
        for f in b.contents:
            if f not in fact_ids:
                error("DANGLING_BANK_FACT", f"bank:{b.id}", f"contains undeclared fact {f}")

    seen_links: set[tuple[str, str]] = set()
    for link in model.info_links:
        loc = f"access:{link.actor}->{link.bank}"
        if link.actor not in actor_ids:
            error("DANGLING_ACCESS", loc, f"actor {link.actor} is not declared")
        if link.bank not in bank_ids:
            error("DANGLING_ACCESS", loc, f"bank {link.bank} is not declared")
        if (link.actor, link.bank) in seen_links:
            error("DUPLICATE_ACCESS", loc, "information link declared twice")
        seen_links.add((link.actor, link.bank))

    def check_step(ref: StepRef, loc: str) -> None:
        if ref.transaction not in tx_ids:
            error("DANGLING_STEP", loc, f"step {ref} refers to undeclared transaction")

    seen_psd: set[PsdLink] = set()
    for link in model.psd_links:
        loc = f"psd:{link}"
        check_step(link.source, loc)
        check_step(link.target, loc)
        if link.kind is LinkKind.CAUSAL:
            if link.source.transaction == link.target.transaction:
                error("CAUSAL_SELF_LINK", loc, "causal link inside one transaction")
            if link.target.step is not StepKind.RQ:
                error("CAUSAL_NOT_REQUEST", loc, "causal link must target a request step")
        if link in seen_psd:
            error("DUPLICATE_PSD_LINK", loc, "link declared twice")
        seen_psd.add(link)

    seen_iut: set[IutEntry] = set()
    used_facts: set[str] = set(result_owner)
    for entry in model.iut_entries:
        loc = f"use:{entry.fact}@{entry.step}"
        check_step(entry.step, loc)
        if entry.fact not in fact_ids:
            error("DANGLING_IUT_FACT", loc, f"fact {entry.fact} is not declared")
        if entry in seen_iut:
            error("DUPLICATE_IUT", loc, "information use declared twice")
        seen_iut.add(entry)
        used_facts.add(entry.fact)

    seen_metric_steps: set[StepRef] = set()
    for m in model.metrics:
        loc = f"metrics:{m.step}"
        check_step(m.step, loc)
        if m.step in seen_metric_steps:
            error("DUPLICATE_METRICS", loc, "step has more than one metrics record")
        seen_metric_steps.add(m.step)
        for name in ("duration", "cost", "daily_frequency"):
            value: Decimal = getattr(m, name)
            if not value.is_finite() or value < 0:
                error("INVALID_METRIC", loc, f"{name} must be finite and >= 0, got {value}")
        if m.step.step in OFF_PATH_STEPS:
            warn(
                "OFF_PATH_METRICS",
                loc,
                f"{m.step.step} is outside the happy path; simulation accrues it "
                "only when the branch is taken",
            )

    for b in model.banks:
        used_facts.update(b.contents)
    for f in model.facts:
        if f.id not in used_facts:
            warn("UNUSED_FACT", f"fact:{f.id}", "fact kind is not a result, used, or banked")

    metric_txs = {m.step.transaction for m in model.metrics}
    for t in model.transactions:
        if t.id not in metric_txs:
            warn("NO_METRICS", f"transaction:{t.id}", "transaction has no metrics")

    involved = {a for t in model.transactions for a in t.actors}
    involved.update(link.actor for link in model.info_links)
    for a in model.actors:
        if a.id not in involved:
            warn("UNUSED_ACTOR", f"actor:{a.id}", "actor has no transactions or bank access")

    issues.sort(key=lambda i: (i.location, i.code, i.message))
    return ValidationReport(tuple(issues))


def require_valid(model: EnterpriseModel) -> EnterpriseModel:
    report = validate_model(model)
    if not report.ok:
        first = report.errors[0]
        raise ModelError(f"model {model.name!r} has {len(report.errors)} errors; first: {first}")
    return model


# -- IAM views ----------------------------------------------------------------


@dataclass(frozen=True)
class TrtRow:
    transaction: str
    name: str
    result: str
    statement: str


def transaction_result_table(model: EnterpriseModel) -> list[TrtRow]:
    """One row per transaction with its result fact, sorted by transaction id."""
    require_valid(model)
    return [
        TrtRow(t.id, t.name, t.result, model.fact(t.result).statement)
        for t in model.transactions
    ]


def is_internal(actor: ActorRole) -> bool:
    # composite actors are outside the boundary for the split
    return actor.locus is Locus.INTERNAL


@dataclass(frozen=True)
class Boundary:
    internal_actors: tuple[str, ...]
    environmental_actors: tuple[str, ...]
    boundary_transactions: tuple[str, ...] = field(default=())


def boundary(model: EnterpriseModel) -> Boundary:
    """Split actors into internal and environmental and find the transactions
    whose initiators and executor sit on different sides."""
    require_valid(model)
    side = {a.id: is_internal(a) for a in model.actors}
    crossing = tuple(
        t.id
        for t in model.transactions
        if any(side[i] != side[t.executor] for i in t.initiators)
    )
    return Boundary(
        internal_actors=tuple(a for a, inside in side.items() if inside),
        environmental_actors=tuple(a for a, inside in side.items() if not inside),
        boundary_transactions=crossing,
    )
