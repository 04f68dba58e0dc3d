"""AST for the gtlog rule language, plus the canonical pretty-printer.

Source positions live in `span` fields excluded from equality, so two
parses of equivalent text compare equal node-for-node. Implications
(`a => b`) never appear here: the parser rewrites them to
``NegatedConj([a, NegatedConj([b])])`` while reading the text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .values import Value, display, type_tag, TAG_STR, TAG_BOOL, TAG_NIL

# ---------------------------------------------------------------- terms

BUILTIN_NAMES = ("Greatest", "ToString", "ToInt64")
OPERATOR_BUILTINS = ("+", "-", "*", "/", "++", "neg")


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True, eq=False)
class Constant:
    value: Value

    def __eq__(self, other):
        from .values import value_key
        return isinstance(other, Constant) and value_key(self.value) == value_key(other.value)

    def __hash__(self):
        from .values import value_key
        return hash(value_key(self.value))


@dataclass(frozen=True)
class FunctionalCall:
    """A predicate used in expression position, e.g. ``D(x)`` or ``Start()``."""
    predicate: str
    args: tuple

    def __init__(self, predicate: str, args):
        object.__setattr__(self, "predicate", predicate)
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class BuiltinCall:
    """Builtin application: named builtins and arithmetic/concat operators."""
    op: str
    args: tuple

    def __init__(self, op: str, args):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class ListLiteral:
    items: tuple

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))


Term = Union[Variable, Constant, FunctionalCall, BuiltinCall, ListLiteral]

# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Literal:
    predicate: str
    positional_args: tuple
    named_args: tuple  # sorted tuple of (name, Term)
    negated: bool = False

    def __init__(self, predicate, positional_args=(), named_args=(), negated=False):
        object.__setattr__(self, "predicate", predicate)
        object.__setattr__(self, "positional_args", tuple(positional_args))
        if isinstance(named_args, dict):
            named_args = tuple(sorted(named_args.items()))
        object.__setattr__(self, "named_args", tuple(named_args))
        object.__setattr__(self, "negated", negated)


@dataclass(frozen=True)
class Compare:
    left: Term
    op: str  # one of = != < <= > >=
    right: Term


@dataclass(frozen=True)
class In:
    var: Term
    list: Term


@dataclass(frozen=True)
class NegatedConj:
    conjuncts: tuple

    def __init__(self, conjuncts):
        object.__setattr__(self, "conjuncts", tuple(conjuncts))


@dataclass(frozen=True)
class Disjunction:
    branches: tuple

    def __init__(self, branches):
        object.__setattr__(self, "branches", tuple(branches))


@dataclass(frozen=True)
class NilCheck:
    """Surface form ``P = nil``: true only before P's first iteration."""
    predicate: str


BodyFormula = Union[Literal, Compare, In, NegatedConj, Disjunction, NilCheck]

# ---------------------------------------------------------------- rules

MIN = "Min"
MAX = "Max"
SUM = "Sum"
UNIQUE = "Unique"


@dataclass(frozen=True)
class HeadArg:
    name: Union[int, str]  # positional index or attribute name
    expr: Term
    agg: Optional[str] = None
    optional_marker: bool = False  # the `?` suffix


@dataclass
class Rule:
    head_predicate: str
    head_args: list
    head_value: Optional[HeadArg] = None
    distinct: bool = False
    body: list = field(default_factory=list)
    multi_head: Optional[tuple] = None  # (predicate, [HeadArg])
    span: Optional[tuple] = field(default=None, compare=False, repr=False)

    @property
    def is_fact(self) -> bool:
        return not self.body


@dataclass
class Directive:
    kind: str  # only "Recursive"
    target_predicate: str
    depth: int  # -1 means unbounded
    stop_predicate: Optional[str] = None
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass
class Program:
    rules: list = field(default_factory=list)
    directives: list = field(default_factory=list)

    def source_spans(self) -> dict:
        """Map id(node) -> (line, column) for nodes that carry positions."""
        spans = {}
        for node in self.rules + self.directives:
            if node.span is not None:
                spans[id(node)] = node.span
        return spans


# -------------------------------------------------------- pretty-printer

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _fmt_const(v: Value) -> str:
    tag = type_tag(v)
    if tag == TAG_NIL:
        return "nil"
    if tag == TAG_BOOL:
        return "true" if v else "false"
    if tag == TAG_STR:
        out = v.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
        return f'"{out}"'
    return display(v)


def fmt_term(t: Term) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, Constant):
        return _fmt_const(t.value)
    if isinstance(t, FunctionalCall):
        return f"{t.predicate}({', '.join(fmt_term(a) for a in t.args)})"
    if isinstance(t, BuiltinCall):
        if t.op == "neg":
            return f"-{_fmt_operand(t.args[0])}"
        if t.op in OPERATOR_BUILTINS:
            return f"{_fmt_operand(t.args[0])} {t.op} {_fmt_operand(t.args[1])}"
        return f"{t.op}({', '.join(fmt_term(a) for a in t.args)})"
    if isinstance(t, ListLiteral):
        return "[" + ", ".join(fmt_term(i) for i in t.items) + "]"
    raise TypeError(f"not a term: {t!r}")


def _fmt_operand(t: Term) -> str:
    # Parenthesize nested operator applications so the printout reparses
    # to the identical tree regardless of associativity.
    if isinstance(t, BuiltinCall) and t.op in OPERATOR_BUILTINS and t.op != "neg":
        return f"({fmt_term(t)})"
    return fmt_term(t)


def fmt_formula(f: BodyFormula) -> str:
    if isinstance(f, Literal):
        parts = [fmt_term(a) for a in f.positional_args]
        parts += [f"{k}: {fmt_term(v)}" for k, v in f.named_args]
        text = f"{f.predicate}({', '.join(parts)})"
        return f"~{text}" if f.negated else text
    if isinstance(f, Compare):
        return f"{fmt_term(f.left)} {f.op} {fmt_term(f.right)}"
    if isinstance(f, In):
        return f"{fmt_term(f.var)} in {fmt_term(f.list)}"
    if isinstance(f, NegatedConj):
        if len(f.conjuncts) == 1 and isinstance(f.conjuncts[0], Literal) \
                and not f.conjuncts[0].negated:
            return "~" + fmt_formula(f.conjuncts[0])
        return "~(" + ", ".join(fmt_formula(c) for c in f.conjuncts) + ")"
    if isinstance(f, Disjunction):
        return " | ".join(_fmt_branch(b) for b in f.branches)
    if isinstance(f, NilCheck):
        return f"{f.predicate} = nil"
    raise TypeError(f"not a formula: {f!r}")


def _fmt_branch(b: BodyFormula) -> str:
    if isinstance(b, Disjunction):
        return "(" + fmt_formula(b) + ")"
    return fmt_formula(b)


_AGG_SUFFIX = {MIN: "Min= ", MAX: "Max= ", SUM: "+= ", UNIQUE: "= "}


def _fmt_head_arg(a: HeadArg) -> str:
    if isinstance(a.name, int):
        return fmt_term(a.expr)
    if a.agg is not None:
        return f"{a.name}? {_AGG_SUFFIX[a.agg]}{fmt_term(a.expr)}"
    return f"{a.name}: {fmt_term(a.expr)}"


def _fmt_head(predicate: str, args) -> str:
    return f"{predicate}({', '.join(_fmt_head_arg(a) for a in args)})"


def fmt_rule(r: Rule) -> str:
    out = _fmt_head(r.head_predicate, r.head_args)
    if r.multi_head is not None:
        out += ", " + _fmt_head(r.multi_head[0], r.multi_head[1])
    if r.distinct:
        out += " distinct"
    if r.head_value is not None:
        out += f" {_AGG_SUFFIX[r.head_value.agg]}{fmt_term(r.head_value.expr)}"
    if r.body:
        out += " :- " + ", ".join(fmt_formula(f) for f in r.body)
    return out + ";"


def fmt_directive(d: Directive) -> str:
    out = f"@{d.kind}({d.target_predicate}, {d.depth}"
    if d.stop_predicate is not None:
        out += f", stop: {d.stop_predicate}"
    return out + ");"


def pretty_print(program: Program) -> str:
    """Canonical text whose reparse is structurally identical to `program`."""
    lines = [fmt_directive(d) for d in program.directives]
    lines += [fmt_rule(r) for r in program.rules]
    return "\n".join(lines)
