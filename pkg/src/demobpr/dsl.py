"""Line-oriented ``.demo`` format for enterprise models.

One declaration per line, ``#`` starts a comment, names are double-quoted::

    model "Barez Pakhsh"
    actor A01 "Customer" environmental
    fact B-R02 "[Selling] begins / [Selling] ends"
    transaction B-T05 "Selling" result B-R02 executor A02 initiators A01
    bank PB01 production "Sales bank" contains B-R02,B-R05
    access A02 PB01
    trigger B-T05/pm -> B-T01/rq
    wait B-T08/ac -> B-T05/ex
    use B-R05 at B-T05/rq
    metrics B-T05/rq time 100 cost 50 freq 1 label "Phone Order Recorded"

Identifiers are case-insensitive and stored uppercase; step codes lowercase.
Declarations may reference ids declared further down the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from pathlib import Path

from demobpr.model import (
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
    StepMetrics,
    StepRef,
    TransactionKind,
    canonical_id,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class DiagnosticKind(str, Enum):
    SYNTAX = "syntax"
    REFERENCE = "reference"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class ParseDiagnostic:
    span: SourceSpan
    kind: DiagnosticKind
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.kind.value} error: {self.message}"


class ParseError(Exception):
    """Raised by :func:`parse` with every diagnostic found in the source."""

    def __init__(self, diagnostics: list[ParseDiagnostic]) -> None:
        self.diagnostics = sorted(
            diagnostics, key=lambda d: (d.span.line, d.span.column, d.kind.value, d.message)
        )
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# -- lexing -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<unterminated>"(?:[^"\\]|\\.)*$)
  | (?P<comment>\#.*$)
  | (?P<arrow>->)
  | (?P<comma>,)
  | (?P<word>(?:(?!->)[^\s,"#])+)
  | (?P<space>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int

    @property
    def value(self) -> str:
        if self.kind == "string":
            return re.sub(r"\\(.)", r"\1", self.text[1:-1])
        return self.text


_ID_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.-]*")


class _LineSyntaxError(Exception):
    def __init__(self, column: int, message: str) -> None:
        super().__init__(message)
        self.column = column
        self.message = message


def _tokenize(line: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        kind = m.lastgroup
        if kind == "unterminated":
            raise _LineSyntaxError(pos + 1, "unterminated string")
        if kind == "comment":
            break
        if kind == "bad":
            raise _LineSyntaxError(pos + 1, f"unexpected character {m.group()!r}")
        if kind != "space":
            tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token], line_length: int) -> None:
        self.tokens = tokens
        self.pos = 0
        self.end_column = line_length + 1

    def _column(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].column
        return self.end_column

    def fail(self, message: str) -> _LineSyntaxError:
        return _LineSyntaxError(self._column(), message)

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = "end of line" if tok is None else repr(tok.text)
            raise self.fail(f"expected {what}, found {found}")
        self.pos += 1
        return tok

    def keyword(self, word: str) -> None:
        tok = self.peek()
        if tok is None or tok.kind != "word" or tok.text.lower() != word:
            found = "end of line" if tok is None else repr(tok.text)
            raise self.fail(f"expected keyword {word!r}, found {found}")
        self.pos += 1

    def ident(self, what: str) -> Token:
        tok = self.next("word", what)
        if not _ID_RE.fullmatch(tok.text):
            raise _LineSyntaxError(tok.column, f"invalid {what} {tok.text!r}")
        return tok

    def string(self, what: str) -> str:
        return self.next("string", f"quoted {what}").value

    def id_list(self, what: str) -> list[Token]:
        items = [self.ident(what)]
        while self.peek() is not None and self.peek().kind == "comma":
            self.pos += 1
            items.append(self.ident(what))
        return items

    def step_ref(self) -> tuple[StepRef, Token]:
        tok = self.next("word", "step reference <transaction>/<step>")
        try:
            ref = StepRef.parse(tok.text)
        except ValueError:
            ref = None
        if ref is None or not _ID_RE.fullmatch(ref.transaction):
            raise _LineSyntaxError(tok.column, f"malformed step reference {tok.text!r}")
        return ref, tok

    def decimal(self, what: str) -> Decimal:
        tok = self.next("word", what)
        if not re.fullmatch(r"\d+(\.\d+)?", tok.text):
            raise _LineSyntaxError(tok.column, f"{what} must be a non-negative decimal, got {tok.text!r}")
        try:
            return Decimal(tok.text)
        except InvalidOperation:  # pragma: no cover - regex already filters
            raise _LineSyntaxError(tok.column, f"bad decimal {tok.text!r}") from None

    def done(self) -> None:
        if self.peek() is not None:
            raise self.fail(f"unexpected {self.peek().text!r}")


# -- parsing ------------------------------------------------------------------


@dataclass
class _Decl:
    """A syntactically valid declaration awaiting reference resolution."""

    keyword: str
    line: int
    value: object
    refs: list[tuple[str, str, int]] = field(default_factory=list)  # (kind, id, column)
    key: object = None
    key_column: int = 1


def _parse_line(tokens: list[Token], line_length: int, lineno: int) -> _Decl:
    cur = _Cursor(tokens, line_length)
    head = cur.next("word", "declaration keyword")
    kw = head.text.lower()
    decl = _Decl(kw, lineno, None, key_column=head.column)

    if kw == "model":
        decl.value = cur.string("model name")
        decl.key = "model"
    elif kw == "actor":
        tok = cur.ident("actor id")
        name = cur.string("actor name")
        locus_tok = cur.ident("locus (internal, environmental, composite)")
        try:
            locus = Locus(locus_tok.text.lower())
        except ValueError:
            raise _LineSyntaxError(locus_tok.column, f"unknown locus {locus_tok.text!r}") from None
        decl.value = ActorRole(tok.text, name, locus)
        decl.key, decl.key_column = ("actor", canonical_id(tok.text)), tok.column
    elif kw == "fact":
        tok = cur.ident("fact id")
        decl.value = FactKind(tok.text, cur.string("fact statement"))
        decl.key, decl.key_column = ("fact", canonical_id(tok.text)), tok.column
    elif kw == "transaction":
        tok = cur.ident("transaction id")
        name = cur.string("transaction name")
        cur.keyword("result")
        result = cur.ident("result fact id")
        cur.keyword("executor")
        executor = cur.ident("executor actor id")
        cur.keyword("initiators")
        initiators = cur.id_list("initiator actor id")
        decl.value = TransactionKind(
            tok.text, name, result.text, executor.text, tuple(i.text for i in initiators)
        )
        decl.key, decl.key_column = ("transaction", canonical_id(tok.text)), tok.column
        decl.refs.append(("fact", result.text, result.column))
        decl.refs.append(("actor", executor.text, executor.column))
        decl.refs.extend(("actor", i.text, i.column) for i in initiators)
    elif kw == "bank":
        tok = cur.ident("bank id")
        kind_tok = cur.ident("bank kind (production, coordination)")
        try:
            kind = BankKind(kind_tok.text.lower())
        except ValueError:
            raise _LineSyntaxError(kind_tok.column, f"unknown bank kind {kind_tok.text!r}") from None
        name = cur.string("bank name")
        contents: list[Token] = []
        if cur.peek() is not None:
            cur.keyword("contains")
            contents = cur.id_list("fact id")
        decl.value = Bank(tok.text, kind, name, tuple(c.text for c in contents))
        decl.key, decl.key_column = ("bank", canonical_id(tok.text)), tok.column
        decl.refs.extend(("fact", c.text, c.column) for c in contents)
    elif kw == "access":
        actor = cur.ident("actor id")
        bank = cur.ident("bank id")
        decl.value = InfoLink(actor.text, bank.text)
        decl.key = ("access", decl.value)
        decl.refs += [("actor", actor.text, actor.column), ("bank", bank.text, bank.column)]
    elif kw in ("trigger", "wait"):
        source, stok = cur.step_ref()
        cur.next("arrow", "'->'")
        target, ttok = cur.step_ref()
        kind = LinkKind.CAUSAL if kw == "trigger" else LinkKind.WAIT
        decl.value = PsdLink(kind, source, target)
        decl.key = ("psd", decl.value)
        decl.refs += [
            ("transaction", source.transaction, stok.column),
            ("transaction", target.transaction, ttok.column),
        ]
    elif kw == "use":
        fact = cur.ident("fact id")
        cur.keyword("at")
        step, stok = cur.step_ref()
        decl.value = IutEntry(fact.text, step)
        decl.key = ("use", decl.value)
        decl.refs += [
            ("fact", fact.text, fact.column),
            ("transaction", step.transaction, stok.column),
        ]
    elif kw == "metrics":
        step, stok = cur.step_ref()
        cur.keyword("time")
        duration = cur.decimal("time")
        cur.keyword("cost")
        cost = cur.decimal("cost")
        cur.keyword("freq")
        freq = cur.decimal("freq")
        label = ""
        if cur.peek() is not None:
            cur.keyword("label")
            label = cur.string("label")
        decl.value = StepMetrics(step, duration, cost, freq, label)
        decl.key, decl.key_column = ("metrics", step), stok.column
        decl.refs.append(("transaction", step.transaction, stok.column))
    else:
        raise _LineSyntaxError(head.column, f"unknown declaration keyword {head.text!r}")
    cur.done()
    return decl


def parse(text: str, file: str = "<string>") -> EnterpriseModel:
    """Parse ``.demo`` source into a model.

    Raises ParseError carrying every syntax, reference and duplicate
    diagnostic; no other exception escapes for any input string.
    """
    diagnostics: list[ParseDiagnostic] = []
    decls: list[_Decl] = []

    def diag(line: int, column: int, kind: DiagnosticKind, message: str) -> None:
        diagnostics.append(ParseDiagnostic(SourceSpan(file, line, column), kind, message))

    if text.startswith("﻿"):
        text = text[1:]
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        try:
            tokens = _tokenize(line)
            if tokens:
                decls.append(_parse_line(tokens, len(line), lineno))
        except _LineSyntaxError as exc:
            diag(lineno, exc.column, DiagnosticKind.SYNTAX, exc.message)

    declared: dict[tuple[str, object], _Decl] = {}
    kept: list[_Decl] = []
    for d in decls:
        if d.key in declared:
            first = declared[d.key]
            what = d.key[0] if isinstance(d.key, tuple) else d.key
            diag(
                d.line,
                d.key_column,
                DiagnosticKind.DUPLICATE,
                f"{what} already declared on line {first.line}",
            )
            continue
        declared[d.key] = d
        kept.append(d)

    names = {
        kind: {key[1] for key in declared if isinstance(key, tuple) and key[0] == kind}
        for kind in ("actor", "fact", "transaction", "bank")
    }
    results: dict[str, _Decl] = {}
    for d in kept:
        for kind, ident, column in d.refs:
            if canonical_id(ident) not in names[kind]:
                diag(d.line, column, DiagnosticKind.REFERENCE, f"undeclared {kind} {canonical_id(ident)}")
        if d.keyword == "transaction":
            t: TransactionKind = d.value
            if t.result in results:
                diag(
                    d.line,
                    d.key_column,
                    DiagnosticKind.DUPLICATE,
                    f"result {t.result} already used by transaction on line {results[t.result].line}",
                )
            results[t.result] = d

    if diagnostics:
        raise ParseError(diagnostics)

    by_kw: dict[str, list] = {}
    for d in kept:
        by_kw.setdefault(d.keyword, []).append(d.value)
    return EnterpriseModel(
        name=by_kw.get("model", ["unnamed"])[0],
        actors=tuple(by_kw.get("actor", ())),
        facts=tuple(by_kw.get("fact", ())),
        transactions=tuple(by_kw.get("transaction", ())),
        banks=tuple(by_kw.get("bank", ())),
        info_links=tuple(by_kw.get("access", ())),
        psd_links=(*by_kw.get("trigger", ()), *by_kw.get("wait", ())),
        iut_entries=tuple(by_kw.get("use", ())),
        metrics=tuple(by_kw.get("metrics", ())),
    )


def parse_file(path: str | Path) -> EnterpriseModel:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), file=str(path))


# -- serialization ------------------------------------------------------------


def format_decimal(value: Decimal) -> str:
    """Plain notation, trailing zeros trimmed: 100, 0.332, 4566.8."""
    if value == value.to_integral_value():
        return format(value.quantize(Decimal(1)), "f")
    return format(value.normalize(), "f")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize(model: EnterpriseModel) -> str:
    """Canonical text: fixed block order, each block sorted by key."""
    blocks: list[list[str]] = [
        [f"actor {a.id} {_quote(a.name)} {a.locus.value}" for a in model.actors],
        [f"fact {f.id} {_quote(f.statement)}" for f in model.facts],
        [
            f"transaction {t.id} {_quote(t.name)} result {t.result} "
            f"executor {t.executor} initiators {','.join(t.initiators)}"
            for t in model.transactions
        ],
        [
            f"bank {b.id} {b.kind.value} {_quote(b.name)}"
            + (f" contains {','.join(b.contents)}" if b.contents else "")
            for b in model.banks
        ],
        [f"access {l.actor} {l.bank}" for l in model.info_links],
        [
            f"trigger {l.source} -> {l.target}"
            for l in model.psd_links
            if l.kind is LinkKind.CAUSAL
        ],
        [f"wait {l.source} -> {l.target}" for l in model.psd_links if l.kind is LinkKind.WAIT],
        [f"use {e.fact} at {e.step}" for e in model.iut_entries],
        [
            f"metrics {m.step} time {format_decimal(m.duration)} cost {format_decimal(m.cost)} "
            f"freq {format_decimal(m.daily_frequency)} label {_quote(m.label)}"
            for m in model.metrics
        ],
    ]
    out = [f"model {_quote(model.name)}"]
    for block in blocks:
        if block:
            out.append("")
            out.extend(block)
    return "\n".join(out) + "\n"


# -- diff ---------------------------------------------------------------------


@dataclass(frozen=True)
class DiffEntry:
    kind: str
    key: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} {self.key}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class MetricDelta:
    step: StepRef
    label: str
    duration: tuple[Decimal, Decimal]
    cost: tuple[Decimal, Decimal]
    daily_frequency: tuple[Decimal, Decimal]

    def swapped(self) -> MetricDelta:
        return MetricDelta(
            self.step,
            self.label,
            self.duration[::-1],
            self.cost[::-1],
            self.daily_frequency[::-1],
        )


@dataclass(frozen=True)
class DiffReport:
    added: tuple[DiffEntry, ...] = ()
    removed: tuple[DiffEntry, ...] = ()
    changed: tuple[DiffEntry, ...] = ()
    metric_deltas: tuple[MetricDelta, ...] = ()

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed or self.metric_deltas)


def _entities(model: EnterpriseModel) -> dict[tuple[str, str], object]:
    out: dict[tuple[str, str], object] = {}
    for a in model.actors:
        out[("actor", a.id)] = a
    for f in model.facts:
        out[("fact", f.id)] = f
    for t in model.transactions:
        out[("transaction", t.id)] = t
    for b in model.banks:
        out[("bank", b.id)] = b
    for l in model.info_links:
        out[("access", f"{l.actor} {l.bank}")] = l
    for l in model.psd_links:
        out[("trigger" if l.kind is LinkKind.CAUSAL else "wait", f"{l.source} -> {l.target}")] = l
    for e in model.iut_entries:
        out[("use", f"{e.fact} at {e.step}")] = e
    for m in model.metrics:
        out[("metrics", str(m.step))] = m
    return out


_KIND_ORDER = ["actor", "fact", "transaction", "bank", "access", "trigger", "wait", "use", "metrics"]


def _entity_sort(key: tuple[str, str]) -> tuple[int, str]:
    return (_KIND_ORDER.index(key[0]), key[1])


def model_diff(a: EnterpriseModel, b: EnterpriseModel) -> DiffReport:
    """Entities added in ``b``, removed from ``a``, changed between them, and
    the before/after values of every metrics record present in both."""
    ea, eb = _entities(a), _entities(b)
    added = [DiffEntry(*k) for k in sorted(eb.keys() - ea.keys(), key=_entity_sort)]
    removed = [DiffEntry(*k) for k in sorted(ea.keys() - eb.keys(), key=_entity_sort)]
    changed: list[DiffEntry] = []
    deltas: list[MetricDelta] = []
    if a.name != b.name:
        changed.append(DiffEntry("model", "name", f"{a.name!r} -> {b.name!r}"))
    for key in sorted(ea.keys() & eb.keys(), key=_entity_sort):
        old, new = ea[key], eb[key]
        if old == new:
            continue
        if isinstance(old, StepMetrics):
            numbers = lambda m: (m.duration, m.cost, m.daily_frequency)  # noqa: E731
            if numbers(old) != numbers(new):
                deltas.append(
                    MetricDelta(
                        old.step,
                        new.label,
                        (old.duration, new.duration),
                        (old.cost, new.cost),
                        (old.daily_frequency, new.daily_frequency),
                    )
                )
            if old.label != new.label:
                changed.append(DiffEntry(*key, f"label {old.label!r} -> {new.label!r}"))
        else:
            changed.append(DiffEntry(*key, f"{old} -> {new}"))
    return DiffReport(tuple(added), tuple(removed), tuple(changed), tuple(deltas))
