"""``demobpr`` command line: parse, validate, analyze, select, simulate, compare.

Exit codes: 0 success, 1 validation (or simulation) errors, 2 parse failure,
3 usage error. Requested output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Sequence

from demobpr import __version__
from demobpr.dsl import ParseError, model_diff, parse_file
from demobpr.graph import (
    POLICIES,
    WeightConfig,
    actor_load,
    build_atd,
    build_ocd,
    expand_selection,
)
from demobpr.model import (
    EnterpriseModel,
    ModelError,
    boundary,
    transaction_result_table,
    validate_model,
)
from demobpr.report import (
    comparison_json,
    dump_json,
    fmt_number,
    graph_json,
    render_comparison,
    render_graph,
    render_rows,
)
from demobpr.sim import (
    ARRIVAL_MODELS,
    ScenarioResult,
    SimConfig,
    UndefinedReductionError,
    analytic_totals,
    compare,
    load_sim_config,
    simulate,
)

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3

FIXTURE_ENV = "DEMOBPR_FIXTURE_DIR"

SUBCOMMANDS = ("validate", "trt", "boundary", "graph", "load", "select", "simulate", "compare", "diff")


class UsageError(Exception):
    pass


class _Failure(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


def _packaged_fixtures() -> Path:
    return Path(str(resources.files("demobpr") / "fixtures"))


def resolve_input(raw: str) -> Path:
    """Find an input file: as given, then under $DEMOBPR_FIXTURE_DIR, then
    (for ``fixtures/...`` paths) among the packaged fixtures."""
    path = Path(raw)
    if path.is_file():
        return path
    candidates = []
    if os.environ.get(FIXTURE_ENV):
        base = Path(os.environ[FIXTURE_ENV])
        candidates += [base / path, base / path.name]
    if path.parts and path.parts[0] == "fixtures":
        candidates.append(_packaged_fixtures().joinpath(*path.parts[1:]))
    for c in candidates:
        if c.is_file():
            return c
    raise UsageError(f"input file not found: {raw}")


def _load(raw: str, err) -> EnterpriseModel:
    path = resolve_input(raw)
    try:
        return parse_file(path)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d, file=err)
        raise _Failure(EXIT_PARSE, f"{raw}: {len(exc.diagnostics)} parse diagnostics") from None
    except UnicodeDecodeError as exc:
        raise _Failure(EXIT_PARSE, f"{raw}: not UTF-8 ({exc.reason})") from None


def _load_valid(raw: str, err) -> EnterpriseModel:
    model = _load(raw, err)
    report = validate_model(model)
    for issue in report.issues:
        print(issue, file=err)
    if not report.ok:
        raise _Failure(EXIT_INVALID, f"{raw}: {report.summary()}")
    return model


def _decimal_arg(text: str) -> Decimal:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("analytic", "des"), default="analytic")
    p.add_argument("--config", help="INI file with [simulation], [decline], [reject] sections")
    p.add_argument("--arrival", dest="arrival_model", choices=ARRIVAL_MODELS)
    p.add_argument("--months", type=int)
    p.add_argument("--workdays-per-week", type=int)
    p.add_argument("--hours-per-day", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int, help="random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="demobpr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"demobpr {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name: str, help: str, formats=("table", "csv", "json", "markdown"), default="table"):
        p = sub.add_parser(name, help=help)
        p.add_argument("--format", choices=formats, default=default)
        return p

    add("validate", "check structural rules").add_argument("model")
    add("trt", "transaction result table").add_argument("model")
    add("boundary", "internal/environmental split").add_argument("model")
    p = add("graph", "ATD or OCD graph", formats=("dot", "json"), default="dot")
    p.add_argument("model")
    p.add_argument("--kind", choices=("atd", "ocd"), default="ocd")
    add("load", "executed/initiated transactions per actor").add_argument("model")

    p = add("select", "expand a reengineering selection by connectivity")
    p.add_argument("model")
    p.add_argument("--seed", required=True, help="comma-separated transaction ids")
    p.add_argument("--policy", choices=POLICIES, default="argmax")
    p.add_argument("--k", type=int)
    p.add_argument("--threshold", type=_decimal_arg)
    p.add_argument("--w-actor", type=_decimal_arg, default=Decimal(1))
    p.add_argument("--w-psd", type=_decimal_arg, default=Decimal(1))
    p.add_argument("--w-bank", type=_decimal_arg, default=Decimal(1))
    p.add_argument("--internal-only", action="store_true", help="skip environment-executed candidates")

    p = add("simulate", "daily time/cost of one scenario")
    p.add_argument("model")
    _add_sim_flags(p)
    p.add_argument("--trace", action="store_true", help="include per-day totals (json only)")

    p = add("compare", "AS-IS vs TO-BE time/cost")
    p.add_argument("asis")
    p.add_argument("tobe")
    _add_sim_flags(p)

    p = add("diff", "entity and metric differences between two models")
    p.add_argument("a")
    p.add_argument("b")
    return parser


def _sim_config(args: argparse.Namespace) -> SimConfig:
    overrides = {
        name: getattr(args, name)
        for name in ("months", "workdays_per_week", "hours_per_day", "replications", "arrival_model", "seed")
    }
    if args.config:
        return load_sim_config(resolve_input(args.config), **overrides)
    return SimConfig(**{k: v for k, v in overrides.items() if v is not None})


def _scenario(model: EnterpriseModel, args: argparse.Namespace, err) -> ScenarioResult:
    if args.mode == "analytic":
        return analytic_totals(model)
    result = simulate(model, _sim_config(args))
    for w in result.warnings:
        print(f"warning: {w}", file=err)
    return result


def _envelope(subcommand: str, data) -> str:
    return dump_json({"tool_version": __version__, "subcommand": subcommand, "data": data})


def _run(args: argparse.Namespace, out, err) -> int:
    cmd, fmt = args.subcommand, args.format

    def table(headers, rows, data=None) -> None:
        if fmt == "json":
            payload = data if data is not None else [dict(zip(headers, r)) for r in rows]
            out.write(_envelope(cmd, payload))
        else:
            out.write(render_rows(headers, rows, fmt))

    if cmd == "validate":
        model = _load(args.model, err)
        report = validate_model(model)
        if fmt == "json":
            out.write(
                _envelope(
                    cmd,
                    {
                        "errors": len(report.errors),
                        "warnings": len(report.warnings),
                        "issues": [
                            {"code": i.code, "severity": i.severity.value, "location": i.location, "message": i.message}
                            for i in report.issues
                        ],
                    },
                )
            )
        else:
            rows = [(i.severity.value, i.location, i.code, i.message) for i in report.issues]
            if rows:
                out.write(render_rows(("severity", "location", "code", "message"), rows, fmt))
            if fmt in ("table", "markdown"):
                out.write(report.summary() + "\n")
        return EXIT_OK if report.ok else EXIT_INVALID

    if cmd == "trt":
        model = _load_valid(args.model, err)
        rows = [(r.transaction, r.name, r.result, r.statement) for r in transaction_result_table(model)]
        table(("transaction", "name", "result", "statement"), rows)
    elif cmd == "boundary":
        model = _load_valid(args.model, err)
        b = boundary(model)
        crossing = set(b.boundary_transactions)
        rows = [("actor", a, "internal") for a in b.internal_actors]
        rows += [("actor", a, "environmental") for a in b.environmental_actors]
        rows += [
            ("transaction", t.id, "boundary" if t.id in crossing else "internal")
            for t in model.transactions
        ]
        table(
            ("kind", "id", "side"),
            rows,
            {
                "internal_actors": list(b.internal_actors),
                "environmental_actors": list(b.environmental_actors),
                "boundary_transactions": list(b.boundary_transactions),
            },
        )
    elif cmd == "graph":
        model = _load_valid(args.model, err)
        graph = build_atd(model) if args.kind == "atd" else build_ocd(model)
        out.write(render_graph(graph, "dot") if fmt == "dot" else _envelope(cmd, graph_json(graph)))
    elif cmd == "load":
        model = _load_valid(args.model, err)
        table(("actor", "executes", "initiates"), [(r.actor, r.executes, r.initiates) for r in actor_load(model)])
    elif cmd == "select":
        model = _load_valid(args.model, err)
        seed = [s for s in args.seed.split(",") if s.strip()]
        try:
            cfg = WeightConfig(args.w_actor, args.w_psd, args.w_bank)
            result = expand_selection(
                model,
                seed,
                args.policy,
                k=args.k,
                threshold=args.threshold,
                cfg=cfg,
                internal_only=args.internal_only,
            )
        except ModelError:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        added = set(result.added)
        rows = []
        for t in model.transactions:
            status = "seed" if t.id in result.seed else "added" if t.id in added else ""
            w = next((r for r in result.weight_table if r.transaction == t.id), None)
            rows.append(
                (
                    t.id,
                    t.name,
                    t.executor,
                    model.actor(t.executor).name,
                    w.weight if w else None,
                    w.shared_actors if w else None,
                    w.psd_links if w else None,
                    w.shared_banks if w else None,
                    status,
                )
            )
        headers = ("transaction", "name", "executor", "executor_name", "weight", "shared_actors", "psd_links", "shared_banks", "status")
        table(
            headers,
            rows,
            {"seed": list(result.seed), "added": list(result.added), "candidates": [dict(zip(headers, r)) for r in rows]},
        )
        if fmt in ("table", "markdown"):
            names = ", ".join(
                f"{t} ({model.transaction(t).name}, executed by {model.actor(model.transaction(t).executor).name})"
                for t in result.added
            )
            out.write(f"added: {names or 'none'}\n")
    elif cmd == "simulate":
        model = _load_valid(args.model, err)
        result = _scenario(model, args, err)
        if fmt == "json":
            data = {
                "mode": result.mode,
                "replications": result.replication_count,
                "config": _config_json(result.config),
                "rows": [{"function": r.label, "time_min": r.time, "cost_eur": r.cost} for r in result.rows],
                "sum": {"time_min": result.sum_time, "cost_eur": result.sum_cost},
                "instance_means": dict(result.instance_means),
                "warnings": list(result.warnings),
            }
            if args.trace:
                data["day_totals"] = [{"time_min": t, "cost_eur": c} for t, c in result.day_totals]
            out.write(_envelope(cmd, data))
        else:
            rows = [(r.label, r.time, r.cost) for r in result.rows]
            rows.append(("Sum", result.sum_time, result.sum_cost))
            out.write(render_rows(("function", "time_min", "cost_eur"), rows, fmt))
    elif cmd == "compare":
        asis_model = _load_valid(args.asis, err)
        tobe_model = _load_valid(args.tobe, err)
        report = compare(_scenario(asis_model, args, err), _scenario(tobe_model, args, err))
        out.write(_envelope(cmd, comparison_json(report)) if fmt == "json" else render_comparison(report, fmt))
    elif cmd == "diff":
        a = _load_valid(args.a, err)
        b = _load_valid(args.b, err)
        diff = model_diff(a, b)
        rows = [("added", e.kind, e.key, e.detail) for e in diff.added]
        rows += [("removed", e.kind, e.key, e.detail) for e in diff.removed]
        rows += [("changed", e.kind, e.key, e.detail) for e in diff.changed]
        for d in diff.metric_deltas:
            parts = [
                f"{name} {fmt_number(old)}->{fmt_number(new)}"
                for name, (old, new) in (("time", d.duration), ("cost", d.cost), ("freq", d.daily_frequency))
                if old != new
            ]
            rows.append(("metric", "metrics", str(d.step), f"{d.label}: " + ", ".join(parts)))
        table(("change", "kind", "key", "detail"), rows)
    return EXIT_OK


def _config_json(cfg: SimConfig | None):
    if cfg is None:
        return None
    return {
        "months": cfg.months,
        "workdays_per_week": cfg.workdays_per_week,
        "hours_per_day": cfg.hours_per_day,
        "replications": cfg.replications,
        "arrival_model": cfg.arrival_model,
        "seed": cfg.seed,
        "workdays": cfg.workdays,
        "decline_probability": dict(cfg.decline_probability),
        "reject_probability": dict(cfg.reject_probability),
    }


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = build_parser().parse_args(argv)
        return _run(args, out, err)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except _Failure as exc:
        print(f"error: {exc}", file=err)
        return exc.code
    except (ModelError, UndefinedReductionError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
