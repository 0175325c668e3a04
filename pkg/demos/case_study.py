"""Walk through the distribution-company case study.

Loads the AS-IS and TO-BE models, shows the transaction result table and
the enterprise boundary, expands a reengineering selection that starts
from the selling and storing work, and compares daily time and cost.

Run with ``python demos/case_study.py``.
"""

from __future__ import annotations

from demobpr import (
    analytic_totals,
    boundary,
    compare,
    expand_selection,
    fixture_path,
    parse_file,
    render_comparison,
    transaction_result_table,
)

asis = parse_file(fixture_path("barez-asis.demo"))
tobe = parse_file(fixture_path("barez-tobe.demo"))

print("Transaction result table")
for row in transaction_result_table(asis):
    print(f"  {row.transaction:6} {row.name:13} {row.result:6} {row.statement}")

split = boundary(asis)
print("\nEnvironmental actors:", ", ".join(asis.actor(a).name for a in split.environmental_actors))
print("Boundary transactions:", ", ".join(split.boundary_transactions))

# Start from the transactions executed by the Seller and the Storekeeper.
roles = {a.id: a.name for a in asis.actors}
seed = [t.id for t in asis.transactions if roles[t.executor] in ("Seller", "Storekeeper")]
selection = expand_selection(asis, seed)
print(f"\nSeed {seed}")
for row in sorted(selection.weight_table, key=lambda r: -r.weight):
    executor = roles[asis.transaction(row.transaction).executor]
    print(f"  {row.transaction} ({executor:10}) weight {row.weight}")
print("Added by argmax:", ", ".join(selection.added))

print("\nDaily time and cost, AS-IS vs TO-BE")
print(render_comparison(compare(analytic_totals(asis), analytic_totals(tobe)), "table"))
