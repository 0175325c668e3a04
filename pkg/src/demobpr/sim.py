"""Scenario time/cost evaluation: closed-form daily totals and a seeded
discrete-event simulation that walks the transaction pattern.

All money and minute accumulation is exact :class:`~decimal.Decimal`
arithmetic; averages divide once, at the end.
"""

from __future__ import annotations

import configparser
import heapq
import itertools
from concurrent.futures import ThreadPoolExecutor
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from decimal import ROUND_HALF_UP, Decimal
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Mapping

import numpy as np

from demobpr.model import (
    HAPPY_PATH,
    EnterpriseModel,
    LinkKind,
    ModelError,
    StepKind,
    StepMetrics,
    StepRef,
    canonical_id,
    require_valid,
)
from demobpr.pattern import TransactionState, pattern_next

ZERO = Decimal(0)

ARRIVAL_MODELS = ("deterministic", "poisson")


class SimulationError(ModelError):
    """The model cannot be simulated (e.g. a causal cycle)."""


class EmptyResultError(ModelError):
    """The model carries no metrics, so there is nothing to total."""


class UndefinedReductionError(ValueError):
    """Reductions are undefined when an AS-IS total is zero."""


def round_half_up(value: Decimal, places: int = 0) -> Decimal:
    return value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class SimConfig:
    months: int = 6
    workdays_per_week: int = 6
    hours_per_day: int = 8
    replications: int = 3
    arrival_model: str = "deterministic"
    seed: int = 0
    decline_probability: Mapping[str, float] = field(default_factory=dict)
    reject_probability: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("months", "workdays_per_week", "hours_per_day", "replications"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.workdays_per_week > 7 or self.hours_per_day > 24:
            raise ValueError("at most 7 workdays per week and 24 hours per day")
        if self.arrival_model not in ARRIVAL_MODELS:
            raise ValueError(f"arrival_model must be one of {ARRIVAL_MODELS}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        for name in ("decline_probability", "reject_probability"):
            probs = {canonical_id(k): float(v) for k, v in dict(getattr(self, name)).items()}
            for tx, p in probs.items():
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"{name}[{tx}] must lie in [0, 1], got {p}")
            object.__setattr__(self, name, dict(sorted(probs.items())))

    @property
    def workdays(self) -> int:
        """Workdays per replication: 13/3 weeks per month (26 days at 6-day weeks)."""
        return self.months * self.workdays_per_week * 13 // 3

    @property
    def day_minutes(self) -> int:
        return self.hours_per_day * 60


_INT_KEYS = ("months", "workdays_per_week", "hours_per_day", "replications", "seed")


def load_sim_config(path: str | Path, **overrides) -> SimConfig:
    """Read a SimConfig from an INI file; non-None ``overrides`` win.

    ``[simulation]`` holds the scalar fields under their own names;
    ``[decline]`` and ``[reject]`` map transaction ids to branch probabilities.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep transaction ids as written
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    values: dict[str, object] = {}
    if parser.has_section("simulation"):
        known = {f.name for f in fields(SimConfig)}
        for key, raw in parser.items("simulation"):
            if key not in known or key.endswith("_probability"):
                raise ValueError(f"unknown simulation key {key!r} in {path}")
            values[key] = int(raw) if key in _INT_KEYS else raw.strip()
    for section, name in (("decline", "decline_probability"), ("reject", "reject_probability")):
        if parser.has_section(section):
            values[name] = {k: float(v) for k, v in parser.items(section)}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values)


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioRow:
    label: str
    time: Decimal
    cost: Decimal


def _label_key(label: str) -> tuple[str, str]:
    return (label.casefold(), label)


@dataclass(frozen=True)
class ScenarioResult:
    """Average daily time (minutes) and cost (EUR) per function label."""

    rows: tuple[ScenarioRow, ...]
    replication_count: int = 1
    mode: str = "analytic"
    config: SimConfig | None = None
    instance_means: tuple[tuple[str, Decimal], ...] = ()
    day_totals: tuple[tuple[Decimal, Decimal], ...] = ()
    paths: tuple[tuple[str, ...], ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "rows", tuple(sorted(self.rows, key=lambda r: _label_key(r.label)))
        )

    @property
    def sum_time(self) -> Decimal:
        return sum((r.time for r in self.rows), ZERO)

    @property
    def sum_cost(self) -> Decimal:
        return sum((r.cost for r in self.rows), ZERO)

    def row(self, label: str) -> ScenarioRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def analytic_totals(model: EnterpriseModel) -> ScenarioResult:
    """Daily time and cost per label: duration and cost times daily frequency,
    summed over every step carrying that label."""
    require_valid(model)
    if not model.metrics:
        raise EmptyResultError(f"model {model.name!r} has no metrics")
    time: dict[str, Decimal] = defaultdict(lambda: ZERO)
    cost: dict[str, Decimal] = defaultdict(lambda: ZERO)
    for m in model.metrics:
        time[m.label] += m.daily_time
        cost[m.label] += m.daily_cost
    return ScenarioResult(tuple(ScenarioRow(label, time[label], cost[label]) for label in time))


# -- discrete-event simulation ------------------------------------------------

# Intra-transaction precedence used for the load-time deadlock check. The
# renegotiate (dc->rq) and restate (rj->st) loops are never walked by the
# simulator, so they are left out.
_INTRA_ORDER = [
    (StepKind.RQ, StepKind.PM),
    (StepKind.PM, StepKind.EX),
    (StepKind.EX, StepKind.ST),
    (StepKind.ST, StepKind.AC),
    (StepKind.RQ, StepKind.DC),
    (StepKind.DC, StepKind.QT),
    (StepKind.ST, StepKind.RJ),
    (StepKind.RJ, StepKind.SP),
]

DECLINE_PATH = (StepKind.RQ, StepKind.DC, StepKind.QT)
REJECT_PATH = (StepKind.RQ, StepKind.PM, StepKind.EX, StepKind.ST, StepKind.RJ, StepKind.SP)

# steps performed by the initiator; the rest belong to the executor
_INITIATOR_STEPS = frozenset({StepKind.RQ, StepKind.AC, StepKind.QT, StepKind.SP})


def _reach_probability(step: StepKind, p_decline: Decimal, p_reject: Decimal) -> Decimal:
    one = Decimal(1)
    if step is StepKind.RQ:
        return one
    if step in (StepKind.DC, StepKind.QT):
        return p_decline
    if step in (StepKind.PM, StepKind.EX, StepKind.ST):
        return one - p_decline
    if step in (StepKind.RJ, StepKind.SP):
        return (one - p_decline) * p_reject
    return (one - p_decline) * (one - p_reject)


class _Plan:
    """Static structure derived from a validated model at load time."""

    def __init__(self, model: EnterpriseModel, cfg: SimConfig) -> None:
        self.model = model
        self.cfg = cfg
        txs = model.transaction_ids
        for tx in (*cfg.decline_probability, *cfg.reject_probability):
            if tx not in txs:
                raise SimulationError(f"branch probability given for unknown transaction {tx}")
        self.metrics: dict[tuple[str, StepKind], StepMetrics] = {
            (m.step.transaction, m.step.step): m for m in model.metrics
        }
        self.causal_out: dict[tuple[str, StepKind], list[str]] = defaultdict(list)
        self.causal_in: dict[str, list[StepRef]] = defaultdict(list)
        self.wait_in: dict[tuple[str, StepKind], list[tuple[str, StepKind]]] = defaultdict(list)
        for link in model.psd_links:
            if link.kind is LinkKind.CAUSAL:
                self.causal_out[(link.source.transaction, link.source.step)].append(
                    link.target.transaction
                )
                self.causal_in[link.target.transaction].append(link.source)
            else:
                self.wait_in[(link.target.transaction, link.target.step)].append(
                    (link.source.transaction, link.source.step)
                )
        self._check_acyclic()

        tx_graph = TopologicalSorter({tx: {s.transaction for s in self.causal_in[tx]} for tx in txs})
        self.order = list(tx_graph.static_order())
        self.roots = [tx for tx in txs if not self.causal_in[tx]]

        self.p_decline = {tx: Decimal(str(cfg.decline_probability.get(tx, 0.0))) for tx in txs}
        self.p_reject = {tx: Decimal(str(cfg.reject_probability.get(tx, 0.0))) for tx in txs}
        # expected daily instances; deterministic mode instantiates the rounded value
        self.rate: dict[str, Decimal] = {}
        self.planned: dict[str, int] = {}
        for tx in self.order:
            if tx in self.roots:
                freqs = [m.daily_frequency for (t, _), m in self.metrics.items() if t == tx]
                self.rate[tx] = max(freqs, default=ZERO)
                self.planned[tx] = int(round_half_up(self.rate[tx]))
            else:
                rate = planned = ZERO
                for src in self.causal_in[tx]:
                    reach = _reach_probability(
                        src.step, self.p_decline[src.transaction], self.p_reject[src.transaction]
                    )
                    rate += self.rate[src.transaction] * reach
                    planned += self.planned[src.transaction] * reach
                self.rate[tx] = rate
                self.planned[tx] = int(round_half_up(planned))

        self.descendants: dict[str, frozenset[str]] = {}
        for tx in reversed(self.order):
            children = {t for (src, _), ts in self.causal_out.items() if src == tx for t in ts}
            below = set(children)
            for c in children:
                below |= self.descendants[c]
            self.descendants[tx] = frozenset(below)

        self.warnings: list[str] = [
            f"root {tx} has no step with daily frequency > 0 and is never instantiated"
            for tx in self.roots
            if self.rate[tx] == 0
        ]
        for (tx, step), m in sorted(self.metrics.items(), key=lambda kv: kv[1].step.sort_key):
            if m.daily_frequency > 0 and self.rate[tx] == 0:
                self.warnings.append(
                    f"{m.step} has metrics but {tx} is never instantiated"
                )

    def _check_acyclic(self) -> None:
        graph: dict[tuple[str, str], set[tuple[str, str]]] = defaultdict(set)
        for tx in self.model.transaction_ids:
            for before, after in _INTRA_ORDER:
                graph[(tx, after.value)].add((tx, before.value))
        for link in self.model.psd_links:
            src = (link.source.transaction, link.source.step.value)
            dst = (link.target.transaction, link.target.step.value)
            graph[dst].add(src)
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            cycle = " -> ".join(f"{t}/{s}" for t, s in reversed(exc.args[1]))
            raise SimulationError(f"process structure contains a cycle: {cycle}") from None

    def actor_for(self, tx: str, step: StepKind) -> str:
        t = self.model.transaction(tx)
        return t.initiators[0] if step in _INITIATOR_STEPS else t.executor

    def can_spawn(self, tx: str, remaining: tuple[StepKind, ...], target: str) -> bool:
        for step in remaining:
            for child in self.causal_out.get((tx, step), ()):
                if child == target or target in self.descendants[child]:
                    return True
        return False


class _Instance:
    __slots__ = ("tx", "path", "pos", "state", "index", "bundle")

    def __init__(self, tx: str, path: tuple[StepKind, ...], index: int, bundle: list) -> None:
        self.tx = tx
        self.path = path
        self.pos = 0
        self.state = TransactionState.INITIAL
        self.index = index
        self.bundle = bundle

    @property
    def remaining(self) -> tuple[StepKind, ...]:
        return self.path[self.pos :]


class _Bundle:
    """A root instance plus every instance its causal links spawn."""

    __slots__ = ("live", "blocked")

    def __init__(self) -> None:
        self.live: list[_Instance] = []
        self.blocked: list[_Instance] = []


class _Day:
    def __init__(self, plan: _Plan, rng: np.random.Generator) -> None:
        self.plan = plan
        self.rng = rng
        self.poisson = plan.cfg.arrival_model == "poisson"
        self.heap: list = []
        self.seq = itertools.count()
        self.spawned: Counter[str] = Counter()
        self.time: dict[str, Decimal] = defaultdict(lambda: ZERO)
        self.cost: dict[str, Decimal] = defaultdict(lambda: ZERO)
        self.busy: dict[str, Decimal] = defaultdict(lambda: ZERO)
        self.paths: set[tuple[str, ...]] = set()

    def run(self) -> None:
        plan = self.plan
        minutes = plan.cfg.day_minutes
        for tx in plan.roots:
            if self.poisson:
                n = int(self.rng.poisson(float(plan.rate[tx]))) if plan.rate[tx] > 0 else 0
                starts = np.sort(self.rng.uniform(0.0, minutes, n)).tolist()
            else:
                n = plan.planned[tx]
                starts = [i * minutes / n for i in range(n)]
            for at in starts:
                self.spawn(tx, _Bundle(), at)
        while self.heap:
            now, _, inst = heapq.heappop(self.heap)
            self.complete(inst, now)

    def draw_path(self, tx: str) -> tuple[StepKind, ...]:
        p_dc = self.plan.cfg.decline_probability.get(tx, 0.0)
        p_rj = self.plan.cfg.reject_probability.get(tx, 0.0)
        if p_dc > 0 and self.rng.random() < p_dc:
            return DECLINE_PATH
        if p_rj > 0 and self.rng.random() < p_rj:
            return REJECT_PATH
        return HAPPY_PATH

    def spawn(self, tx: str, bundle: _Bundle, at: float) -> None:
        inst = _Instance(tx, self.draw_path(tx), self.spawned[tx], bundle)
        self.spawned[tx] += 1
        bundle.live.append(inst)
        self.try_start(inst, at)

    def performances(self, inst: _Instance, m: StepMetrics) -> int:
        """How many times this instance performs a metrics-bearing step."""
        step = m.step.step
        if step not in HAPPY_PATH:
            return 1
        if self.poisson:
            rate = self.plan.rate[inst.tx]
            if rate == 0:
                return 0
            ratio = m.daily_frequency / rate
            return 1 if ratio == 1 else int(self.rng.poisson(float(ratio)))
        # spread round(freq) performances evenly over the day's planned instances
        n = self.plan.planned[inst.tx]
        k = inst.index
        if k >= n:
            return 0
        total = int(round_half_up(m.daily_frequency))
        return (k + 1) * total // n - k * total // n

    def blocked(self, inst: _Instance, step: StepKind) -> bool:
        for source_tx, source_step in self.plan.wait_in.get((inst.tx, step), ()):
            for other in inst.bundle.live:
                if other is inst:
                    continue
                if other.tx == source_tx and source_step in other.remaining:
                    return True
                if self.plan.can_spawn(other.tx, other.remaining, source_tx):
                    return True
        return False

    def try_start(self, inst: _Instance, now: float) -> None:
        step = inst.path[inst.pos]
        if self.blocked(inst, step):
            inst.bundle.blocked.append(inst)
            return
        m = self.plan.metrics.get((inst.tx, step))
        duration = ZERO
        if m is not None:
            times = self.performances(inst, m)
            if times:
                duration = m.duration * times
                self.time[m.label] += duration
                self.cost[m.label] += m.cost * times
                self.busy[self.plan.actor_for(inst.tx, step)] += duration
        heapq.heappush(self.heap, (now + float(duration), next(self.seq), inst))

    def complete(self, inst: _Instance, now: float) -> None:
        step = inst.path[inst.pos]
        inst.state = pattern_next(inst.state, step)
        inst.pos += 1
        for child in self.plan.causal_out.get((inst.tx, step), ()):
            self.spawn(child, inst.bundle, now)
        bundle = inst.bundle
        if inst.pos == len(inst.path):
            bundle.live.remove(inst)
            self.paths.add(tuple(s.value for s in inst.path))
        else:
            self.try_start(inst, now)
        if bundle.blocked:
            waiting, bundle.blocked = bundle.blocked, []
            for other in waiting:
                self.try_start(other, now)


@dataclass
class _ReplicationTotals:
    time: dict[str, Decimal] = field(default_factory=lambda: defaultdict(lambda: ZERO))
    cost: dict[str, Decimal] = field(default_factory=lambda: defaultdict(lambda: ZERO))
    instances: Counter[str] = field(default_factory=Counter)
    peak_busy: dict[str, Decimal] = field(default_factory=lambda: defaultdict(lambda: ZERO))
    day_totals: list[tuple[Decimal, Decimal]] = field(default_factory=list)
    paths: set[tuple[str, ...]] = field(default_factory=set)


def _run_replication(plan: _Plan, config: SimConfig, replication: int) -> _ReplicationTotals:
    # each replication owns a generator derived from (seed, replication index)
    rng = np.random.default_rng([config.seed, replication])
    out = _ReplicationTotals()
    for _ in range(config.workdays):
        day = _Day(plan, rng)
        day.run()
        for label, value in day.time.items():
            out.time[label] += value
        for label, value in day.cost.items():
            out.cost[label] += value
        out.instances.update(day.spawned)
        for actor, minutes in day.busy.items():
            out.peak_busy[actor] = max(out.peak_busy[actor], minutes)
        out.day_totals.append((sum(day.time.values(), ZERO), sum(day.cost.values(), ZERO)))
        out.paths |= day.paths
    return out


def simulate(
    model: EnterpriseModel, config: SimConfig = SimConfig(), *, workers: int = 1
) -> ScenarioResult:
    """Run ``config.replications`` independent replications of
    ``config.workdays`` workdays each and average per label.

    Root transactions (never the target of a causal link) start
    ``round(freq)`` evenly spaced instances a day in deterministic mode, or a
    Poisson-distributed number at uniform times. Every instance walks
    rq, pm, ex, st, ac unless a configured decline or reject branch is drawn,
    spawning a child instance whenever a causal link fires and holding a
    step while a wait-link source in the same bundle is still outstanding.
    Daily capacity is not enforced; actors busier than ``hours_per_day`` are
    reported in ``warnings``.

    With ``workers > 1`` replications run on a thread pool. Results are
    merged in replication order, so they do not depend on ``workers``.
    """
    require_valid(model)
    if not model.metrics:
        raise EmptyResultError(f"model {model.name!r} has no metrics")
    if int(workers) != workers or workers < 1:
        raise ValueError(f"workers must be an integer >= 1, got {workers!r}")
    plan = _Plan(model, config)
    reps = range(config.replications)
    if workers == 1:
        parts = [_run_replication(plan, config, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _run_replication(plan, config, r), reps))

    time: dict[str, Decimal] = defaultdict(lambda: ZERO)
    cost: dict[str, Decimal] = defaultdict(lambda: ZERO)
    instances: Counter[str] = Counter()
    peak_busy: dict[str, Decimal] = defaultdict(lambda: ZERO)
    day_totals: list[tuple[Decimal, Decimal]] = []
    paths: set[tuple[str, ...]] = set()
    for part in parts:
        for label, value in part.time.items():
            time[label] += value
        for label, value in part.cost.items():
            cost[label] += value
        instances.update(part.instances)
        for actor, minutes in part.peak_busy.items():
            peak_busy[actor] = max(peak_busy[actor], minutes)
        day_totals.extend(part.day_totals)
        paths |= part.paths

    samples = Decimal(config.workdays * config.replications)
    labels = {m.label for m in model.metrics}
    rows = tuple(
        ScenarioRow(label, time[label] / samples, cost[label] / samples) for label in labels
    )
    capacity = Decimal(config.day_minutes)
    warnings = list(plan.warnings)
    for actor in sorted(peak_busy):
        if peak_busy[actor] > capacity:
            warnings.append(
                f"actor {actor} busy up to {peak_busy[actor]} min on a workday "
                f"(capacity {capacity} min)"
            )
    return ScenarioResult(
        rows=rows,
        replication_count=config.replications,
        mode=f"des-{config.arrival_model}",
        config=config,
        instance_means=tuple((tx, instances[tx] / samples) for tx in model.transaction_ids),
        day_totals=tuple(day_totals),
        paths=tuple(sorted(paths)),
        warnings=tuple(warnings),
    )


# -- comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    asis: ScenarioRow | None
    tobe: ScenarioRow | None

    @property
    def delta_time(self) -> Decimal | None:
        if self.asis is None or self.tobe is None:
            return None
        return self.tobe.time - self.asis.time

    @property
    def delta_cost(self) -> Decimal | None:
        if self.asis is None or self.tobe is None:
            return None
        return self.tobe.cost - self.asis.cost


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...] = ()
    asis_time: Decimal = ZERO
    asis_cost: Decimal = ZERO
    tobe_time: Decimal = ZERO
    tobe_cost: Decimal = ZERO
    cost_reduction_pct: Decimal | None = None
    time_reduction_pct: Decimal | None = None


def reduction_pct(before: Decimal, after: Decimal) -> Decimal:
    if before <= 0:
        raise UndefinedReductionError("reduction is undefined for a zero AS-IS total")
    return 100 * (1 - after / before)


def compare(asis: ScenarioResult, tobe: ScenarioResult) -> ComparisonReport:
    """Match rows by label and compute the AS-IS to TO-BE reductions (exact)."""
    if not asis.rows or not tobe.rows:
        raise EmptyResultError("both scenarios need at least one row")
    a = {r.label: r for r in asis.rows}
    b = {r.label: r for r in tobe.rows}
    labels = sorted(a.keys() | b.keys(), key=_label_key)
    return ComparisonReport(
        rows=tuple(ComparisonRow(label, a.get(label), b.get(label)) for label in labels),
        asis_time=asis.sum_time,
        asis_cost=asis.sum_cost,
        tobe_time=tobe.sum_time,
        tobe_cost=tobe.sum_cost,
        cost_reduction_pct=reduction_pct(asis.sum_cost, tobe.sum_cost),
        time_reduction_pct=reduction_pct(asis.sum_time, tobe.sum_time),
    )
