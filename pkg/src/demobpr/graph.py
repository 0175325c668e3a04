"""Actor/transaction/bank graphs and connectivity-driven selection expansion."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable

from demobpr.model import (
    EnterpriseModel,
    ModelError,
    canonical_id,
    is_internal,
    require_valid,
)


@dataclass(frozen=True)
class GraphNode:
    kind: str  # actor | transaction | bank
    id: str
    label: str
    annotation: tuple[str, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind, self.id)


@dataclass(frozen=True)
class GraphEdge:
    kind: str  # initiates | executes | access | psd
    source: tuple[str, str]
    target: tuple[str, str]
    annotation: str = ""


_NODE_ORDER = {"actor": 0, "transaction": 1, "bank": 2}
_EDGE_ORDER = {"initiates": 0, "executes": 1, "access": 2, "psd": 3}


@dataclass(frozen=True)
class OntologyGraph:
    nodes: tuple[GraphNode, ...] = ()
    edges: tuple[GraphEdge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "nodes", tuple(sorted(self.nodes, key=lambda n: (_NODE_ORDER[n.kind], n.id)))
        )
        object.__setattr__(
            self,
            "edges",
            tuple(
                sorted(
                    self.edges,
                    key=lambda e: (_EDGE_ORDER[e.kind], e.source, e.target, e.annotation),
                )
            ),
        )
        keys = {n.key for n in self.nodes}
        for e in self.edges:
            if e.source not in keys or e.target not in keys:
                raise ValueError(f"edge {e} has an undeclared endpoint")

    def edges_of(self, kind: str) -> tuple[GraphEdge, ...]:
        return tuple(e for e in self.edges if e.kind == kind)


def _atd_parts(model: EnterpriseModel) -> tuple[list[GraphNode], list[GraphEdge]]:
    nodes = [GraphNode("actor", a.id, a.name) for a in model.actors]
    nodes += [GraphNode("transaction", t.id, t.name) for t in model.transactions]
    edges = []
    for t in model.transactions:
        tx = ("transaction", t.id)
        edges.append(GraphEdge("executes", ("actor", t.executor), tx))
        edges.extend(GraphEdge("initiates", ("actor", a), tx) for a in t.initiators)
    return nodes, edges


def build_atd(model: EnterpriseModel) -> OntologyGraph:
    """Actor Transaction Diagram: actors, transactions, initiates/executes edges."""
    require_valid(model)
    nodes, edges = _atd_parts(model)
    return OntologyGraph(tuple(nodes), tuple(edges))


def build_ocd(model: EnterpriseModel) -> OntologyGraph:
    """Organization Construction Diagram: the ATD plus banks (annotated with
    their contents), information-access edges and process-structure links."""
    require_valid(model)
    nodes, edges = _atd_parts(model)
    nodes += [GraphNode("bank", b.id, b.name, b.contents) for b in model.banks]
    edges += [
        GraphEdge("access", ("actor", l.actor), ("bank", l.bank)) for l in model.info_links
    ]
    edges += [
        GraphEdge(
            "psd",
            ("transaction", l.source.transaction),
            ("transaction", l.target.transaction),
            f"{l.kind.value} {l.source.step.value}->{l.target.step.value}",
        )
        for l in model.psd_links
    ]
    return OntologyGraph(tuple(nodes), tuple(edges))


# -- connectivity -------------------------------------------------------------


@dataclass(frozen=True)
class WeightConfig:
    w_actor: Decimal = Decimal(1)
    w_psd: Decimal = Decimal(1)
    w_bank: Decimal = Decimal(1)

    def __post_init__(self) -> None:
        weights = []
        for name in ("w_actor", "w_psd", "w_bank"):
            value = Decimal(str(getattr(self, name)))
            if not value.is_finite() or value < 0:
                raise ValueError(f"{name} must be a non-negative number, got {value}")
            object.__setattr__(self, name, value)
            weights.append(value)
        if not any(weights):
            raise ValueError("at least one weight must be positive")

    def scaled(self, factor: Decimal) -> WeightConfig:
        return WeightConfig(self.w_actor * factor, self.w_psd * factor, self.w_bank * factor)


@dataclass(frozen=True)
class Connection:
    """Raw evidence connecting two transactions and its weighted total."""

    shared_actors: int
    psd_links: int
    shared_banks: int
    weight: Decimal


def banks_touched(model: EnterpriseModel, tx_id: str) -> frozenset[str]:
    """Banks holding the transaction's result or a fact it uses at any step."""
    t = model.transaction(tx_id)
    facts = {t.result}
    facts.update(e.fact for e in model.iut_entries if e.step.transaction == t.id)
    return frozenset(b.id for b in model.banks if facts.intersection(b.contents))


class _ConnectivityIndex:
    def __init__(self, model: EnterpriseModel) -> None:
        self.model = model
        self.actors = {t.id: t.actors for t in model.transactions}
        self.banks = {t.id: banks_touched(model, t.id) for t in model.transactions}
        self.psd: Counter[frozenset[str]] = Counter(
            frozenset((l.source.transaction, l.target.transaction))
            for l in model.psd_links
            if l.source.transaction != l.target.transaction
        )

    def connection(self, ti: str, tj: str, cfg: WeightConfig) -> Connection:
        actors = len(self.actors[ti] & self.actors[tj])
        psd = self.psd[frozenset((ti, tj))]
        banks = len(self.banks[ti] & self.banks[tj])
        weight = cfg.w_actor * actors + cfg.w_psd * psd + cfg.w_bank * banks
        return Connection(actors, psd, banks, weight)


def _check_ids(model: EnterpriseModel, ids: Iterable[str]) -> list[str]:
    known = set(model.transaction_ids)
    out = []
    for raw in ids:
        ident = canonical_id(raw)
        if ident not in known:
            raise ModelError(f"unknown transaction {ident}")
        out.append(ident)
    return out


def connection(
    model: EnterpriseModel, t_i: str, t_j: str, cfg: WeightConfig = WeightConfig()
) -> Connection:
    require_valid(model)
    ti, tj = _check_ids(model, (t_i, t_j))
    if ti == tj:
        raise ModelError("connection weight needs two distinct transactions")
    return _ConnectivityIndex(model).connection(ti, tj, cfg)


def connection_weight(
    model: EnterpriseModel, t_i: str, t_j: str, cfg: WeightConfig = WeightConfig()
) -> Decimal:
    """Weighted count of shared actor roles, PSD links between the two
    transactions (either direction) and banks both of them touch."""
    return connection(model, t_i, t_j, cfg).weight


@dataclass(frozen=True)
class WeightRow:
    transaction: str
    weight: Decimal
    shared_actors: int
    psd_links: int
    shared_banks: int


@dataclass(frozen=True)
class SelectionResult:
    seed: tuple[str, ...]
    added: tuple[str, ...]
    weight_table: tuple[WeightRow, ...]

    @property
    def selected(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.seed) | set(self.added)))


POLICIES = ("argmax", "top_k", "threshold")


def expand_selection(
    model: EnterpriseModel,
    seed: Iterable[str],
    policy: str = "argmax",
    *,
    k: int | None = None,
    threshold: Decimal | float | str | None = None,
    cfg: WeightConfig = WeightConfig(),
    internal_only: bool = False,
) -> SelectionResult:
    """One expansion round: add the non-seed transactions most connected to the seed.

    A candidate's weight is the sum of its connection weights to each seed
    transaction. ``argmax`` keeps every candidate tied at the maximum
    positive weight, ``top_k`` the ``k`` heaviest (ties broken by id) and
    ``threshold`` all candidates weighing at least ``threshold``. With
    ``internal_only`` candidates executed by environmental or composite
    actors are left out of the table.
    """
    require_valid(model)
    seed_ids = sorted(set(_check_ids(model, seed)))
    if not seed_ids:
        raise ModelError("seed must name at least one transaction")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if policy == "top_k" and (k is None or int(k) != k or k < 1):
        raise ValueError(f"top_k needs an integer k >= 1, got {k!r}")
    if policy == "threshold":
        if threshold is None:
            raise ValueError("threshold policy needs a threshold")
        threshold = Decimal(str(threshold))
        if not threshold.is_finite() or threshold <= 0:
            raise ValueError(f"threshold must be > 0, got {threshold}")

    index = _ConnectivityIndex(model)
    rows = []
    for t in model.transactions:
        if t.id in seed_ids:
            continue
        if internal_only and not is_internal(model.actor(t.executor)):
            continue
        parts = [index.connection(t.id, s, cfg) for s in seed_ids]
        rows.append(
            WeightRow(
                t.id,
                sum((p.weight for p in parts), Decimal(0)),
                sum(p.shared_actors for p in parts),
                sum(p.psd_links for p in parts),
                sum(p.shared_banks for p in parts),
            )
        )

    positive = [r for r in rows if r.weight > 0]
    if policy == "argmax":
        best = max((r.weight for r in positive), default=None)
        added = [r.transaction for r in positive if r.weight == best]
    elif policy == "top_k":
        ranked = sorted(positive, key=lambda r: (-r.weight, r.transaction))
        added = [r.transaction for r in ranked[:k]]
    else:
        added = [r.transaction for r in positive if r.weight >= threshold]
    return SelectionResult(tuple(seed_ids), tuple(sorted(added)), tuple(rows))


@dataclass(frozen=True)
class LoadRow:
    actor: str
    executes: int
    initiates: int


def actor_load(model: EnterpriseModel) -> list[LoadRow]:
    """Per-actor count of executed and initiated transactions, sorted by actor."""
    atd = build_atd(model)
    executes = Counter(e.source[1] for e in atd.edges_of("executes"))
    initiates = Counter(e.source[1] for e in atd.edges_of("initiates"))
    return [LoadRow(a.id, executes[a.id], initiates[a.id]) for a in model.actors]
