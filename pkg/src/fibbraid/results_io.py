"""CSV tables for search results and the g-space point cloud.

Numbers are written with 17 significant digits so doubles round-trip exactly;
files are UTF-8 with LF line endings and identical input gives identical bytes.
The ``Index`` column is the 1-based rank, assigned at write time.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .braid_search import SearchRecord

__all__ = [
    "ResultRow",
    "SCHEMAS",
    "TableKind",
    "TableParseError",
    "emit_weyl_points",
    "read_table",
    "rows_from_records",
    "write_table",
]


class TableKind(str, enum.Enum):
    GATE_SEARCH = "gate_search"
    CLASS_SEARCH = "class_search"
    SURVEY_INVARIANTS = "survey_invariants"
    CLOSEST_CLASS = "closest_class"


SCHEMAS: dict[TableKind, tuple[str, ...]] = {
    TableKind.GATE_SEARCH: ("Index", "Length", "Operator", "Distance", "Norm11", "UnitaryMeasure"),
    TableKind.CLASS_SEARCH: ("Index", "Length", "Operator", "Distance", "Norm11", "UnitaryMeasure"),
    TableKind.SURVEY_INVARIANTS: ("Index", "Length", "Operator", "g1", "g2", "g3Re", "g3Im"),
    TableKind.CLOSEST_CLASS: ("Index", "Length", "Operator", "Distance", "Class", "Norm11", "UnitaryMeasure"),
}

WEYL_COLUMNS = ("g1", "g2", "g3Re")

# column -> ResultRow attribute
_ATTR = {
    "Index": "index", "Length": "length", "Operator": "operator", "Distance": "distance",
    "Norm11": "norm11", "UnitaryMeasure": "unitary_measure", "Class": "cls",
    "g1": "g1", "g2": "g2", "g3Re": "g3re", "g3Im": "g3im",
}
_INT_COLS = {"Index", "Length"}
_STR_COLS = {"Operator", "Class"}


class TableParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ResultRow:
    """One table row; columns absent from the schema stay ``None``."""

    index: int
    length: int
    operator: str
    distance: float | None = None
    norm11: float | None = None
    unitary_measure: float | None = None
    cls: str | None = None
    g1: float | None = None
    g2: float | None = None
    g3re: float | None = None
    g3im: float | None = None


def fmt_float(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def rows_from_records(records: Iterable[SearchRecord], kind: TableKind | str) -> list[ResultRow]:
    kind = TableKind(kind)
    rows = []
    for i, r in enumerate(records, start=1):
        base = dict(index=i, length=r.length, operator=r.operator)
        if kind in (TableKind.GATE_SEARCH, TableKind.CLASS_SEARCH):
            rows.append(ResultRow(**base, distance=r.objective_distance, norm11=r.m11_norm,
                                  unitary_measure=r.d_unitary))
        elif kind is TableKind.CLOSEST_CLASS:
            if r.closest is None:
                raise ValueError(f"record {r.operator!r} has no closest class")
            rows.append(ResultRow(**base, distance=r.closest_distance, cls=r.closest,
                                  norm11=r.m11_norm, unitary_measure=r.d_unitary))
        else:
            if r.invariants is None:
                raise ValueError(f"record {r.operator!r} carries no invariants")
            g = r.invariants
            rows.append(ResultRow(**base, g1=g.g1, g2=g.g2, g3re=g.g3, g3im=g.g3_imag_residual))
    return rows


def _cell(row: ResultRow, col: str) -> str:
    v = getattr(row, _ATTR[col])
    if col in _INT_COLS:
        return str(int(v))
    if col in _STR_COLS:
        return str(v)
    return fmt_float(v)


def render_table(rows: Sequence[ResultRow], kind: TableKind | str) -> str:
    cols = SCHEMAS[TableKind(kind)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row, c) for c in cols])
    return buf.getvalue()


def write_table(records: Iterable[SearchRecord | ResultRow], kind: TableKind | str,
                destination: str | Path) -> Path:
    """Write records (ranked already) as CSV; Index is re-assigned 1..n."""
    kind = TableKind(kind)
    items = list(records)
    if items and isinstance(items[0], SearchRecord):
        rows = rows_from_records(items, kind)
    else:
        rows = [ResultRow(**{**r.__dict__, "index": i}) for i, r in enumerate(items, start=1)]
    destination = Path(destination)
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_table(rows, kind))
    return destination


def read_table(source: str | Path, kind: TableKind | str) -> list[ResultRow]:
    kind = TableKind(kind)
    cols = SCHEMAS[kind]
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError("empty file, expected a header row", 1) from None
        if tuple(header) != cols:
            raise TableParseError(f"header {header} does not match {kind.value} columns {list(cols)}", 1)
        rows = []
        for values in reader:
            line = reader.line_num
            if not values:
                continue
            if len(values) != len(cols):
                raise TableParseError(f"expected {len(cols)} fields, found {len(values)}", line)
            fields = {}
            for col, raw in zip(cols, values):
                try:
                    if col in _INT_COLS:
                        fields[_ATTR[col]] = int(raw)
                    elif col in _STR_COLS:
                        fields[_ATTR[col]] = raw
                    else:
                        fields[_ATTR[col]] = float(raw)
                except ValueError:
                    raise TableParseError(f"bad value {raw!r} in column {col}", line) from None
            rows.append(ResultRow(**fields))
    return rows


def emit_weyl_points(records: Iterable[SearchRecord], destination: str | Path) -> Path:
    """Three-column (g1, g2, Re g3) CSV, one row per record, for external plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(WEYL_COLUMNS)
    for r in records:
        if r.invariants is None:
            raise ValueError(f"record {r.operator!r} carries no invariants")
        g = r.invariants
        w.writerow([fmt_float(g.g1), fmt_float(g.g2), fmt_float(g.g3)])
    destination = Path(destination)
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return destination


def read_weyl_points(source: str | Path) -> list[tuple[float, float, float]]:
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != WEYL_COLUMNS:
            raise TableParseError(f"expected header {list(WEYL_COLUMNS)}", 1)
        out = []
        for values in reader:
            if len(values) != 3:
                raise TableParseError("expected 3 fields", reader.line_num)
            g = tuple(float(v) for v in values)
            if not all(math.isfinite(x) for x in g):
                raise TableParseError("non-finite coordinate", reader.line_num)
            out.append(g)
    return out
