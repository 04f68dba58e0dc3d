"""Scalar value semantics: dynamic typing, ordering, arithmetic, builtins.

Values travelling through relations are plain Python objects: None (nil),
bool, int, float, str and tuple (list values). Because Python considers
True == 1 and 1 == 1.0, relations key tuples through `row_key`, which tags
every cell with its type so that set semantics keeps e.g. 1 and true apart.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import ConversionError, TypeMismatch

Value = object  # nil | bool | int | float | str | tuple

TAG_NIL = 0
TAG_BOOL = 1
TAG_INT = 2
TAG_FLOAT = 3
TAG_STR = 4
TAG_LIST = 5

_TAG_NAMES = {TAG_NIL: "nil", TAG_BOOL: "bool", TAG_INT: "int",
              TAG_FLOAT: "float", TAG_STR: "string", TAG_LIST: "list"}


# Exact-type dispatch: bool is looked up before its int base class ever
# matters, so 1, 1.0 and true all land on distinct tags.
_TAGS = {type(None): TAG_NIL, bool: TAG_BOOL, int: TAG_INT,
         float: TAG_FLOAT, str: TAG_STR, tuple: TAG_LIST}


def type_tag(v: Value) -> int:
    tag = _TAGS.get(type(v))
    if tag is None:
        raise TypeMismatch(f"unsupported value {v!r} of type {type(v).__name__}")
    return tag


def type_name(v: Value) -> str:
    return _TAG_NAMES[type_tag(v)]


def value_key(v: Value):
    """Type-tagged key for hashing/dedup; nested lists are tagged recursively."""
    tag = type_tag(v)
    if tag == TAG_LIST:
        return (tag, tuple(value_key(x) for x in v))
    return (tag, v)


def row_key(row: Sequence[Value]):
    """Hashable, totally-ordered dedup key: tags and cells interleaved in one
    tuple, so a row allocates a single key object."""
    out = []
    for v in row:
        tag = _TAGS.get(type(v))
        if tag == TAG_LIST:
            out.append(tag)
            out.append(tuple(value_key(x) for x in v))
        elif tag is None:
            raise TypeMismatch(f"unsupported value {v!r} of type {type(v).__name__}")
        else:
            out.append(tag)
            out.append(v)
    return tuple(out)


def values_equal(a: Value, b: Value) -> bool:
    """Equality for `=` / `!=` / `in`: type-aware, except int/float compare by value."""
    ta, tb = _TAGS.get(type(a)), _TAGS.get(type(b))
    if ta is None or tb is None:
        raise TypeMismatch(f"unsupported value of type {type(a).__name__}")
    if ta == tb:
        if ta == TAG_LIST:
            return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
        return a == b
    if ta in (TAG_INT, TAG_FLOAT) and tb in (TAG_INT, TAG_FLOAT):
        return a == b
    return False


def compare_values(a: Value, b: Value) -> int:
    """Three-way comparison for ordering operators and Min/Max.

    Orderable families: numbers (int and float together, ties broken int <
    float so folds stay deterministic), strings (codepoint order), booleans
    (false < true). Anything else, or a cross-family pair, is a TypeMismatch.
    """
    ta, tb = type_tag(a), type_tag(b)
    numeric = (TAG_INT, TAG_FLOAT)
    if ta in numeric and tb in numeric:
        if a < b:
            return -1
        if a > b:
            return 1
        return -1 if ta < tb else (1 if ta > tb else 0)
    if ta == tb and ta in (TAG_STR, TAG_BOOL):
        return -1 if a < b else (1 if a > b else 0)
    raise TypeMismatch(
        f"cannot order {type_name(a)} {a!r} against {type_name(b)} {b!r}")


def greatest(a: Value, b: Value) -> Value:
    """Larger of two same-family orderable values."""
    return a if compare_values(a, b) >= 0 else b


def least(a: Value, b: Value) -> Value:
    return a if compare_values(a, b) <= 0 else b


def _require_number(v: Value, op: str) -> None:
    if type_tag(v) not in (TAG_INT, TAG_FLOAT):
        raise TypeMismatch(f"{op} requires numbers, got {type_name(v)} {v!r}")


def arith(op: str, a: Value, b: Value) -> Value:
    if op == "++":
        if type_tag(a) != TAG_STR or type_tag(b) != TAG_STR:
            raise TypeMismatch(f"++ requires strings, got {type_name(a)} and {type_name(b)}")
        return a + b
    _require_number(a, op)
    _require_number(b, op)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise TypeMismatch("division by zero")
        if type_tag(a) == TAG_INT and type_tag(b) == TAG_INT:
            # int/int truncates toward zero
            q = abs(a) // abs(b)
            return q if (a >= 0) == (b >= 0) else -q
        return a / b
    raise TypeMismatch(f"unknown arithmetic operator {op!r}")


def negate(v: Value) -> Value:
    _require_number(v, "unary -")
    return -v


def to_string(v: Value) -> str:
    tag = type_tag(v)
    if tag == TAG_STR:
        return v
    if tag == TAG_INT:
        return str(v)
    if tag == TAG_FLOAT:
        return repr(v)
    if tag == TAG_BOOL:
        return "true" if v else "false"
    raise TypeMismatch(f"ToString does not accept {type_name(v)}")


def to_int64(v: Value) -> int:
    tag = type_tag(v)
    if tag == TAG_INT:
        return v
    if tag == TAG_FLOAT:
        return math.trunc(v)
    if tag == TAG_STR:
        try:
            return int(v, 10)
        except ValueError:
            try:
                return math.trunc(float(v))
            except ValueError:
                raise ConversionError(f"ToInt64 cannot convert {v!r}") from None
    raise ConversionError(f"ToInt64 does not accept {type_name(v)}")


def concat(a: Value, b: Value) -> str:
    return arith("++", a, b)


MIN = "Min"
MAX = "Max"
SUM = "Sum"
UNIQUE = "Unique"  # plain `=` functional value: all contributions must agree


def fold_aggregate(kind: str, values: Iterable[Value]) -> Value:
    """Combine a nonempty group of values; permutation-invariant by construction."""
    it = iter(values)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("fold_aggregate requires a nonempty group") from None
    if kind == MIN:
        for v in it:
            acc = least(acc, v)
        return acc
    if kind == MAX:
        for v in it:
            acc = greatest(acc, v)
        return acc
    if kind == SUM:
        _require_number(acc, "Sum")
        for v in it:
            _require_number(v, "Sum")
            acc = acc + v
        return acc
    raise ValueError(f"unknown aggregator {kind!r}")


def display(v: Value) -> str:
    """Text form used by CSV export and graph rendering."""
    tag = type_tag(v)
    if tag == TAG_NIL:
        return ""
    if tag == TAG_BOOL:
        return "true" if v else "false"
    if tag == TAG_STR:
        return v
    if tag == TAG_LIST:
        return "[" + ", ".join(display(x) for x in v) + "]"
    return repr(v) if tag == TAG_FLOAT else str(v)
