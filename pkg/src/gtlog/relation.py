"""Relations (named sets of tuples) and immutable evaluation snapshots."""

from __future__ import annotations

import gc
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import KeyAbsent
from .values import row_key, value_key

VALUE_COLUMN = "value"


@contextmanager
def paused_gc():
    """Suspend generational GC around allocation-heavy phases; everything the
    engine builds is acyclic, and collector sweeps over millions of live
    tuples dominate large runs otherwise."""
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


class Relation:
    """A set of rows over positional columns, sorted named attributes and an
    optional trailing functional-value column.

    Rows are deduplicated with type-tagged keys (1, 1.0 and true stay
    distinct) and kept in a canonical sorted order, so identical contents
    always produce identical iteration, export and hashing behavior.
    Treat instances as immutable once constructed; scan and join caches
    attach to them lazily.
    """

    __slots__ = ("name", "num_positional", "named_attrs", "has_value", "rows",
                 "_indexes", "_value_map", "_scan_cache")

    def __init__(self, name: str, num_positional: int, named_attrs=(),
                 has_value: bool = False, rows: Iterable[tuple] = ()):
        self.name = name
        self.num_positional = num_positional
        self.named_attrs = tuple(named_attrs)
        assert self.named_attrs == tuple(sorted(self.named_attrs))
        self.has_value = has_value
        width = self.width
        seen = {}
        for row in rows:
            row = tuple(row)
            if len(row) != width:
                raise ValueError(
                    f"relation {name} expects rows of width {width}, got {row!r}")
            seen.setdefault(row_key(row), row)
        self.rows = tuple(seen[k] for k in sorted(seen))
        self._indexes: dict = {}
        self._value_map = None
        self._scan_cache: dict = {}

    # ------------------------------------------------------------- shape

    @property
    def width(self) -> int:
        return self.num_positional + len(self.named_attrs) + (1 if self.has_value else 0)

    @property
    def key_width(self) -> int:
        return self.width - (1 if self.has_value else 0)

    def columns(self) -> list:
        cols = [f"c{i}" for i in range(self.num_positional)]
        cols.extend(self.named_attrs)
        if self.has_value:
            cols.append(VALUE_COLUMN)
        return cols

    def named_index(self, attr: str) -> int:
        return self.num_positional + self.named_attrs.index(attr)

    # ------------------------------------------------------------- access

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return (isinstance(other, Relation)
                and self.num_positional == other.num_positional
                and self.named_attrs == other.named_attrs
                and self.has_value == other.has_value
                and self.rows == other.rows)

    def __hash__(self):  # pragma: no cover - relations rarely hashed
        return hash((self.num_positional, self.named_attrs, self.has_value,
                     tuple(row_key(r) for r in self.rows)))

    def __repr__(self):
        return f"Relation({self.name!r}, rows={len(self.rows)})"

    def index(self, cols: tuple) -> dict:
        """Hash index keyed by the type-tagged values of `cols`."""
        idx = self._indexes.get(cols)
        if idx is None:
            idx = {}
            for row in self.rows:
                key = tuple(value_key(row[c]) for c in cols)
                idx.setdefault(key, []).append(row)
            self._indexes[cols] = idx
        return idx

    def value_map(self) -> dict:
        if self._value_map is None:
            if not self.has_value:
                raise KeyAbsent(f"relation {self.name} has no functional value")
            self._value_map = {row_key(row[:-1]): row[-1] for row in self.rows}
        return self._value_map


def lookup_functional(relation: Relation, key_values) -> object:
    """The unique functional value stored under a key; KeyAbsent if missing."""
    key = row_key(tuple(key_values))
    try:
        return relation.value_map()[key]
    except KeyError:
        raise KeyAbsent(
            f"{relation.name} has no value for key {tuple(key_values)!r}") from None


def relation_from_tuples(name: str, tuples, num_positional: Optional[int] = None,
                         has_value: bool = False) -> Relation:
    rows = [tuple(t) for t in tuples]
    if num_positional is None:
        if not rows:
            raise ValueError(f"cannot infer the shape of empty relation {name}")
        num_positional = len(rows[0]) - (1 if has_value else 0)
    return Relation(name, num_positional, (), has_value, rows)


@dataclass(frozen=True)
class Snapshot:
    """One fixpoint iteration's state: an immutable name -> Relation map."""
    iteration: int
    relations: dict = field(default_factory=dict)

    def get(self, name: str) -> Optional[Relation]:
        return self.relations.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.relations
