"""Load extensional relations from delimited files and export results.

CSV uses RFC-4180 quoting; TSV is plain tab-separated (embedded tabs are
rejected on export). Fields that look like integers parse as ints unless
the column is listed in `string_columns`. JSON export carries a column
header and full value fidelity, so load(export(r)) == r.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Iterable

from .errors import FunctionalValueConflict, IoError, ParseError
from .relation import Relation
from .values import TAG_LIST, display, type_tag

_INT_RE = re.compile(r"-?\d+$")


def _parse_field(text: str, as_string: bool):
    if not as_string and _INT_RE.match(text):
        return int(text)
    return text


def _read_rows(path, fmt: str, has_header: bool) -> list:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from None
    if fmt == "csv":
        rows = list(csv.reader(text.splitlines()))
    elif fmt == "tsv":
        rows = [line.split("\t") for line in text.splitlines()]
    else:
        raise IoError(f"unknown format {fmt!r}")
    rows = [r for r in rows if r and not (len(r) == 1 and r[0] == "")]
    return rows[1:] if has_header and rows else rows


def load_edges(path, fmt: str = "csv", name: str = "E", has_header: bool = False,
               string_columns: Iterable[int] = ()) -> Relation:
    """Load an n-ary positional relation (2 columns for plain edges, 4 for
    interval-labelled temporal edges, ...)."""
    rows = _read_rows(path, fmt, has_header)
    string_columns = set(string_columns)
    if not rows:
        return Relation(name, 2)
    width = len(rows[0])
    parsed = []
    for lineno, row in enumerate(rows, start=2 if has_header else 1):
        if len(row) != width:
            raise ParseError(f"expected {width} columns, got {len(row)}", lineno)
        parsed.append(tuple(_parse_field(f, i in string_columns)
                            for i, f in enumerate(row)))
    return Relation(name, width, rows=parsed)


def load_triples(path, name: str = "T") -> Relation:
    """Subject/predicate/object TSV into a ternary relation."""
    rows = _read_rows(path, "tsv", has_header=False)
    parsed = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", lineno)
        parsed.append(tuple(row))
    return Relation(name, 3, rows=parsed)


def load_labels(path, name: str = "L") -> Relation:
    """id -> label TSV into a functional relation; duplicate ids must agree."""
    rows = _read_rows(path, "tsv", has_header=False)
    seen: dict = {}
    parsed = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", lineno)
        key, label = row[0], row[1]
        if key in seen and seen[key] != label:
            raise FunctionalValueConflict(name, (key,), (seen[key], label))
        seen[key] = label
        parsed.append((key, label))
    return Relation(name, 1, has_value=True, rows=parsed)


def _json_value(v):
    if type_tag(v) == TAG_LIST:
        return [_json_value(x) for x in v]
    return v


def _from_json_value(v):
    if isinstance(v, list):
        return tuple(_from_json_value(x) for x in v)
    return v


def export_relation(relation: Relation, path, fmt: str = "csv",
                    header: bool = False) -> None:
    """Write a relation with deterministic (sorted) row order."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                if header:
                    writer.writerow(relation.columns())
                for row in relation.rows:
                    writer.writerow([display(v) for v in row])
        elif fmt == "tsv":
            with path.open("w", encoding="utf-8", newline="") as fh:
                for row in relation.rows:
                    fields = [display(v) for v in row]
                    if any("\t" in f for f in fields):
                        raise IoError("TSV cannot carry embedded tabs")
                    fh.write("\t".join(fields) + "\n")
        elif fmt == "json":
            doc = {
                "name": relation.name,
                "columns": relation.columns(),
                "num_positional": relation.num_positional,
                "named_attrs": list(relation.named_attrs),
                "has_value": relation.has_value,
                "rows": [[_json_value(v) for v in row] for row in relation.rows],
            }
            path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
        else:
            raise IoError(f"unknown format {fmt!r}")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from None


def load_relation_json(path) -> Relation:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno) from None
    return Relation(doc.get("name", path.stem), doc["num_positional"],
                    tuple(doc.get("named_attrs", ())), doc.get("has_value", False),
                    [tuple(_from_json_value(v) for v in row) for row in doc["rows"]])
