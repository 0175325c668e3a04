"""The published function table, transcribed row by row.

Columns: label, AS-IS cost (EUR), AS-IS time (min), TO-BE cost (EUR),
TO-BE time (min). Used as an oracle for the shipped fixtures.
"""

from __future__ import annotations

from decimal import Decimal

_ROWS = """\
Accountant approved|0.21|4.98|0.07|0.7
Checking the Customer|20|200|10|20
Checking with manager and accountant|0.332|60|0.083|0.083
Customer Invoice matched|20|50|10|1
Delivering the Order|225|900|200|1600
Invoice is Delivered|30|75|15|5
Invoice Paid|30|150|15|15
Invoice Recieved|0.166|0.415|0.083|30
Manager approved|0.166|0.83|0.083|0.415
matching Orders and invoices|60|900|10|25
Order Calculated|60|100|20|25
Order Created|30|75|0|15
Order is paid|50|600|50|50
Order Prepared|20|300|10|200
Order Recieved|0.166|0.83|0.083|0.249
Order sent|100|300|90|100
Ordering For Store|100|10|100|5
Phone Order Recorded|50|100|0|15
Previous Orders and accounts checked|75|150|0|15
Putting orders in store|0.581|29.88|0.581|29.5
Store Suply Checked|60|60|0|30
Storing|3.32|34.86|1.245|33.2
Van is loaded|25|300|25|275
Verbal Order Recorded|60|150|60|150
Well account history?|30|75|0|15
"""

ROWS: dict[str, tuple[Decimal, Decimal, Decimal, Decimal]] = {
    label: tuple(Decimal(x) for x in rest)
    for label, *rest in (line.split("|") for line in _ROWS.splitlines())
}

# the printed "Sum" row
PRINTED_SUM = (Decimal("1049.941"), Decimal("4566.8"), Decimal("617.23"), Decimal("2654.4"))


def column_sum(index: int) -> Decimal:
    return sum((row[index] for row in ROWS.values()), Decimal(0))
