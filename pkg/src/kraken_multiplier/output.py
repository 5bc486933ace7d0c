"""Tabular command output in csv, json and a rounded human-readable form."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Sequence

FORMATS = ("csv", "json", "human")

Cell = float | int | str


def fixed(x: float) -> str:
    """Shortest round-tripping decimal for ``x`` without exponent notation."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return repr(x)
    text = repr(x)
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
        if "." not in text:
            text += ".0"
    return text


def human(x: Cell) -> str:
    if isinstance(x, str) or isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return f"{x:,}"
    if not math.isfinite(x):
        return str(x)
    if abs(x) >= 100:
        return f"{round(x):,}"
    return f"{x:.4g}"


def _parse_cell(text: str) -> Cell:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class OutputTable:
    """A rectangular table: a label column followed by value columns."""

    caption: str
    columns: tuple[str, ...]
    rows: list[tuple[str, tuple[Cell, ...]]] = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for label, values in self.rows:
            self._check_arity(values)

    def _check_arity(self, values: Sequence[Cell]) -> None:
        if len(values) != len(self.columns) - 1:
            raise ValueError(
                f"row has {len(values)} values, table {self.caption!r} expects "
                f"{len(self.columns) - 1}"
            )

    def add(self, label, *values: Cell) -> None:
        self._check_arity(values)
        self.rows.append((str(label), tuple(values)))

    def column(self, name: str) -> list[Cell]:
        i = self.columns.index(name)
        if i == 0:
            return [label for label, _ in self.rows]
        return [values[i - 1] for _, values in self.rows]

    def records(self) -> list[dict]:
        out = []
        for label, values in self.rows:
            rec = {self.columns[0]: _parse_cell(label)}
            rec.update(zip(self.columns[1:], values))
            out.append(rec)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for label, values in self.rows:
            writer.writerow([label, *(v if isinstance(v, str) else fixed(v) for v in values)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.records())

    def to_human(self) -> str:
        cells = [list(self.columns)] + [
            [label, *(human(v) for v in values)] for label, values in self.rows
        ]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = [self.caption] if self.caption else []
        for row in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        if fmt == "human":
            return self.to_human()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")

    @classmethod
    def from_csv(cls, text: str, caption: str = "") -> "OutputTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        table = cls(caption, tuple(header))
        for row in reader:
            if row:
                table.add(row[0], *(_parse_cell(c) for c in row[1:]))
        return table

    @classmethod
    def from_json(cls, text: str, caption: str = "") -> "OutputTable":
        records = json.loads(text)
        if not records:
            raise ValueError("cannot infer columns from an empty JSON table")
        columns = tuple(records[0])
        table = cls(caption, columns)
        for rec in records:
            table.add(rec[columns[0]], *(rec[c] for c in columns[1:]))
        return table


def render_many(tables: Sequence[OutputTable], fmt: str) -> str:
    """Several tables in one stream: csv blocks split by ``# caption`` lines,
    a JSON array of ``{"caption", "rows"}`` objects, or stacked human tables."""
    if fmt == "json":
        return json.dumps([{"caption": t.caption, "rows": t.records()} for t in tables])
    if fmt == "csv":
        return "\n".join(f"# {t.caption}\n{t.to_csv()}" for t in tables)
    return "\n".join(t.render(fmt) for t in tables)
