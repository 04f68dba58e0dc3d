"""Relational-algebra plan nodes and their printable form.

Plans are immutable trees; every node carries `schema`, the ordered column
names of the rows it emits. Column names are source variable names,
internal `$v`/`$a` temporaries, or the output columns `c0..`, attribute
names and `value`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

# ------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Col:
    name: str


@dataclass(frozen=True)
class ConstE:
    value: object


@dataclass(frozen=True)
class BuiltinE:
    op: str
    args: tuple

    def __init__(self, op, args):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class ListE:
    items: tuple

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))


def fmt_expr(e) -> str:
    if isinstance(e, Col):
        return e.name
    if isinstance(e, ConstE):
        from .ast_nodes import _fmt_const
        return _fmt_const(e.value)
    if isinstance(e, BuiltinE):
        if e.op == "neg":
            return f"-({fmt_expr(e.args[0])})"
        if e.op in ("+", "-", "*", "/", "++"):
            return f"({fmt_expr(e.args[0])} {e.op} {fmt_expr(e.args[1])})"
        return f"{e.op}({', '.join(fmt_expr(a) for a in e.args)})"
    if isinstance(e, ListE):
        return "[" + ", ".join(fmt_expr(i) for i in e.items) + "]"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------- conditions


@dataclass(frozen=True)
class CmpCond:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class InCond:
    item: object
    list: object


@dataclass(frozen=True)
class NilCond:
    predicate: str


def fmt_cond(c) -> str:
    if isinstance(c, CmpCond):
        return f"{fmt_expr(c.left)} {c.op} {fmt_expr(c.right)}"
    if isinstance(c, InCond):
        return f"{fmt_expr(c.item)} in {fmt_expr(c.list)}"
    if isinstance(c, NilCond):
        return f"{c.predicate} = nil"
    raise TypeError(f"not a condition: {c!r}")


# -------------------------------------------------------------- plan nodes


@dataclass(frozen=True)
class Unit:
    schema: tuple = ()


@dataclass(frozen=True)
class Scan:
    """Read one relation under a binding pattern.

    `positional` is a tuple of patterns for a prefix of the positional
    columns; `named` maps attribute names to patterns; `value_pattern`
    binds the functional-value column when present.  A pattern is
    ("var", name) or ("const", value); columns without a pattern are
    unconstrained and unprojected.
    """
    predicate: str
    positional: tuple
    named: tuple = ()
    value_pattern: Optional[tuple] = None
    schema: tuple = ()


@dataclass(frozen=True)
class Join:
    left: object
    right: Scan
    on: tuple  # shared column names
    schema: tuple = ()


@dataclass(frozen=True)
class AntiJoin:
    left: object
    inner: object
    correlated: tuple
    seed: str  # reserved relation name the inner plan's seed Scan reads
    schema: tuple = ()


@dataclass(frozen=True)
class Select:
    input: object
    cond: object
    schema: tuple = ()
    span: Optional[tuple] = field(default=None, compare=False)


@dataclass(frozen=True)
class Compute:
    input: object
    column: str
    expr: object
    schema: tuple = ()
    span: Optional[tuple] = field(default=None, compare=False)


@dataclass(frozen=True)
class Project:
    input: object
    columns: tuple
    schema: tuple = ()


@dataclass(frozen=True)
class Distinct:
    input: object
    schema: tuple = ()


@dataclass(frozen=True)
class UnionAll:
    inputs: tuple
    schema: tuple = ()

    def __init__(self, inputs, schema=()):
        object.__setattr__(self, "inputs", tuple(inputs))
        object.__setattr__(self, "schema", tuple(schema))


@dataclass(frozen=True)
class GroupAggregate:
    input: object
    keys: tuple
    aggregations: tuple  # ((column, Min|Max|Sum|Unique), ...)
    predicate: str = ""  # for conflict error messages
    schema: tuple = ()
    span: Optional[tuple] = field(default=None, compare=False)


def _pattern_text(p) -> str:
    kind, v = p
    if kind == "var":
        return v
    from .ast_nodes import _fmt_const
    return _fmt_const(v)


def explain(plan, indent: int = 0) -> str:
    """Deterministic, indented rendering of a plan tree."""
    pad = "  " * indent
    if isinstance(plan, Unit):
        return f"{pad}unit"
    if isinstance(plan, Scan):
        parts = [_pattern_text(p) for p in plan.positional]
        parts += [f"{n}: {_pattern_text(p)}" for n, p in plan.named]
        if plan.value_pattern is not None:
            parts.append(f"value: {_pattern_text(plan.value_pattern)}")
        return f"{pad}scan {plan.predicate}({', '.join(parts)})"
    if isinstance(plan, Join):
        on = ", ".join(plan.on)
        return (f"{pad}join on [{on}]\n"
                f"{explain(plan.left, indent + 1)}\n"
                f"{explain(plan.right, indent + 1)}")
    if isinstance(plan, AntiJoin):
        corr = ", ".join(plan.correlated)
        return (f"{pad}antijoin on [{corr}]\n"
                f"{explain(plan.left, indent + 1)}\n"
                f"{explain(plan.inner, indent + 1)}")
    if isinstance(plan, Select):
        return f"{pad}select {fmt_cond(plan.cond)}\n{explain(plan.input, indent + 1)}"
    if isinstance(plan, Compute):
        return (f"{pad}compute {plan.column} <- {fmt_expr(plan.expr)}\n"
                f"{explain(plan.input, indent + 1)}")
    if isinstance(plan, Project):
        return (f"{pad}project [{', '.join(plan.columns)}]\n"
                f"{explain(plan.input, indent + 1)}")
    if isinstance(plan, Distinct):
        return f"{pad}distinct\n{explain(plan.input, indent + 1)}"
    if isinstance(plan, UnionAll):
        parts = [f"{pad}union"]
        parts += [explain(p, indent + 1) for p in plan.inputs]
        return "\n".join(parts)
    if isinstance(plan, GroupAggregate):
        aggs = ", ".join(f"{kind}({col})" for col, kind in plan.aggregations)
        keys = ", ".join(plan.keys)
        return (f"{pad}aggregate keys=[{keys}] [{aggs}]\n"
                f"{explain(plan.input, indent + 1)}")
    raise TypeError(f"not a plan node: {plan!r}")
