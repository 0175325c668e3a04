"""DEMO enterprise-ontology toolkit for business process reengineering.

Model an enterprise as actors, transactions, banks and process structure;
expand a reengineering selection by connectivity; and compare AS-IS and
TO-BE scenarios by daily time and cost.
"""

__version__ = "0.1.0"

from demobpr.dsl import ParseDiagnostic, ParseError, SourceSpan, model_diff, parse, parse_file, serialize
from demobpr.graph import (
    OntologyGraph,
    SelectionResult,
    WeightConfig,
    actor_load,
    build_atd,
    build_ocd,
    connection_weight,
    expand_selection,
)
from demobpr.model import (
    ActorRole,
    Bank,
    EnterpriseModel,
    FactKind,
    InfoLink,
    IutEntry,
    PsdLink,
    StepKind,
    StepMetrics,
    StepRef,
    TransactionKind,
    ValidationReport,
    boundary,
    transaction_result_table,
    validate_model,
)
from demobpr.pattern import TransactionState, pattern_next, trace_valid
from demobpr.report import render_comparison, render_graph
from demobpr.sim import ComparisonReport, ScenarioResult, SimConfig, analytic_totals, compare, simulate


def fixture_path(name: str):
    """Path of a packaged ``.demo`` fixture, e.g. ``fixture_path("barez-asis.demo")``."""
    from importlib import resources
    from pathlib import Path

    return Path(str(resources.files("demobpr") / "fixtures" / name))
