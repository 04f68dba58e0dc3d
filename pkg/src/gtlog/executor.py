"""Evaluate compiled plans against a snapshot's relations.

Scans materialize (and cache, per relation instance) the pattern-filtered
projection of their relation; joins probe a hash index built once per
(relation, scan) pair, so repeated fixpoint iterations over unchanged
relations pay for indexing only once.
"""

from __future__ import annotations

from . import plan as P
from . import values as V
from .errors import FunctionalValueConflict, GtlogError, RuntimeTypeError
from .relation import Relation
from .values import row_key, value_key


class ExecContext:
    def __init__(self, relations, allowed_absent=frozenset(), nil_true=frozenset()):
        self.relations = relations
        self.allowed_absent = set(allowed_absent)
        self.nil_true = set(nil_true)
        self.overlays: list = []

    def relation(self, name: str):
        for ov in reversed(self.overlays):
            if name in ov:
                return ov[name]
        return self.relations.get(name)


def eval_plan(plan, ctx: ExecContext) -> list:
    if isinstance(plan, P.Unit):
        return [()]
    if isinstance(plan, P.Scan):
        return _eval_scan(plan, ctx)
    if isinstance(plan, P.Join):
        return _eval_join(plan, ctx)
    if isinstance(plan, P.AntiJoin):
        return _eval_antijoin(plan, ctx)
    if isinstance(plan, P.Select):
        return _eval_select(plan, ctx)
    if isinstance(plan, P.Compute):
        idx = _index_map(plan.input.schema)
        return [row + (_eval_expr(plan.expr, row, idx, plan.span),)
                for row in eval_plan(plan.input, ctx)]
    if isinstance(plan, P.Project):
        idx = _index_map(plan.input.schema)
        cols = [idx[c] for c in plan.columns]
        rows = eval_plan(plan.input, ctx)
        if cols == list(range(len(plan.input.schema))):
            return rows  # identity projection, relabel only
        return [tuple(row[c] for c in cols) for row in rows]
    if isinstance(plan, P.Distinct):
        seen = set()
        out = []
        for row in eval_plan(plan.input, ctx):
            k = row_key(row)
            if k not in seen:
                seen.add(k)
                out.append(row)
        return out
    if isinstance(plan, P.UnionAll):
        out = []
        for sub in plan.inputs:
            out.extend(eval_plan(sub, ctx))
        return out
    if isinstance(plan, P.GroupAggregate):
        return _eval_aggregate(plan, ctx)
    raise TypeError(f"not a plan node: {plan!r}")


def _index_map(schema) -> dict:
    return {name: i for i, name in enumerate(schema)}


def _resolve(scan: P.Scan, ctx: ExecContext):
    rel = ctx.relation(scan.predicate)
    if rel is None and scan.predicate not in ctx.allowed_absent:
        raise GtlogError(
            f"internal: relation {scan.predicate} read before its stratum completed")
    return rel


def _scan_shape(scan: P.Scan):
    """Structural cache key: scans differing only in variable names emit the
    same rows, so they share one materialization and one join index."""
    def pat(p):
        return ("c", value_key(p[1])) if p[0] == "const" else "v"

    return (scan.predicate,
            tuple(pat(p) for p in scan.positional),
            tuple((n, pat(p)) for n, p in scan.named),
            pat(scan.value_pattern) if scan.value_pattern is not None else None)


def _scan_columns(scan: P.Scan, rel: Relation) -> list:
    cols = []
    for i, pat in enumerate(scan.positional):
        cols.append((i, pat))
    for attr, pat in scan.named:
        cols.append((rel.named_index(attr), pat))
    if scan.value_pattern is not None:
        cols.append((rel.width - 1, scan.value_pattern))
    return cols


def _eval_scan(scan: P.Scan, ctx: ExecContext) -> list:
    rel = _resolve(scan, ctx)
    if rel is None:
        return []
    shape = _scan_shape(scan)
    cached = rel._scan_cache.get(shape)
    if cached is not None:
        return cached
    cols = _scan_columns(scan, rel)
    var_cols = [ci for ci, pat in cols if pat[0] == "var"]
    const_checks = [(ci, pat[1]) for ci, pat in cols if pat[0] == "const"]
    if not const_checks and len(var_cols) == rel.width:
        # full-width projection in column order: the relation's rows verbatim
        out = rel.rows
    else:
        seen = set()
        out = []
        for row in rel.rows:
            ok = True
            for ci, c in const_checks:
                if not V.values_equal(row[ci], c):
                    ok = False
                    break
            if not ok:
                continue
            projected = tuple(row[ci] for ci in var_cols)
            k = row_key(projected)
            if k not in seen:
                seen.add(k)
                out.append(projected)
    rel._scan_cache[shape] = out
    return out


def _eval_join(join: P.Join, ctx: ExecContext) -> list:
    left_rows = eval_plan(join.left, ctx)
    if not left_rows:
        return []
    scan = join.right
    rel = _resolve(scan, ctx)
    right_rows = _eval_scan(scan, ctx) if rel is not None else []
    r_idx = _index_map(scan.schema)
    on_positions = [r_idx[c] for c in join.on]
    new_positions = [r_idx[c] for c in scan.schema if c not in join.on]
    if rel is not None:
        index_key = ("join", _scan_shape(scan), tuple(on_positions))
        index = rel._scan_cache.get(index_key)
        if index is None:
            index = {}
            for row in right_rows:
                k = row_key([row[p] for p in on_positions])
                index.setdefault(k, []).append(tuple(row[p] for p in new_positions))
            rel._scan_cache[index_key] = index
    else:
        index = {}
    l_idx = _index_map(join.left.schema)
    l_positions = [l_idx[c] for c in join.on]
    out = []
    for lrow in left_rows:
        k = row_key([lrow[p] for p in l_positions])
        for extra in index.get(k, ()):
            out.append(lrow + extra)
    return out


def _eval_antijoin(aj: P.AntiJoin, ctx: ExecContext) -> list:
    left_rows = eval_plan(aj.left, ctx)
    if not left_rows:
        return []
    l_idx = _index_map(aj.left.schema)
    corr_positions = [l_idx[c] for c in aj.correlated]
    seed_rows = []
    seen = set()
    for row in left_rows:
        t = tuple(row[p] for p in corr_positions)
        k = row_key(t)
        if k not in seen:
            seen.add(k)
            seed_rows.append(t)
    seed_rel = Relation(aj.seed, len(aj.correlated), rows=seed_rows)
    ctx.overlays.append({aj.seed: seed_rel})
    try:
        inner_rows = eval_plan(aj.inner, ctx)
    finally:
        ctx.overlays.pop()
    matched = {row_key(r) for r in inner_rows}
    return [row for row in left_rows
            if row_key(tuple(row[p] for p in corr_positions)) not in matched]


def _eval_select(sel: P.Select, ctx: ExecContext) -> list:
    rows = eval_plan(sel.input, ctx)
    cond = sel.cond
    if isinstance(cond, P.NilCond):
        return rows if cond.predicate in ctx.nil_true else []
    idx = _index_map(sel.input.schema)
    out = []
    if isinstance(cond, P.CmpCond):
        for row in rows:
            left = _eval_expr(cond.left, row, idx, sel.span)
            right = _eval_expr(cond.right, row, idx, sel.span)
            if _compare(cond.op, left, right, sel.span):
                out.append(row)
        return out
    if isinstance(cond, P.InCond):
        for row in rows:
            item = _eval_expr(cond.item, row, idx, sel.span)
            lst = _eval_expr(cond.list, row, idx, sel.span)
            if not isinstance(lst, tuple):
                raise RuntimeTypeError(
                    f"'in' requires a list, got {V.type_name(lst)}", sel.span)
            if any(V.values_equal(item, x) for x in lst):
                out.append(row)
        return out
    raise TypeError(f"not a condition: {cond!r}")


def _compare(op, left, right, span) -> bool:
    if op == "=":
        return V.values_equal(left, right)
    if op == "!=":
        return not V.values_equal(left, right)
    try:
        c = V.compare_values(left, right)
    except V.TypeMismatch as e:
        raise RuntimeTypeError(str(e), span) from None
    return {"<": c < 0, "<=": c <= 0, ">": c > 0, ">=": c >= 0}[op]


def _eval_expr(e, row, idx, span):
    if isinstance(e, P.Col):
        return row[idx[e.name]]
    if isinstance(e, P.ConstE):
        return e.value
    if isinstance(e, P.BuiltinE):
        args = [_eval_expr(a, row, idx, span) for a in e.args]
        try:
            if e.op in ("+", "-", "*", "/", "++"):
                return V.arith(e.op, args[0], args[1])
            if e.op == "neg":
                return V.negate(args[0])
            if e.op == "Greatest":
                return V.greatest(args[0], args[1])
            if e.op == "ToString":
                return V.to_string(args[0])
            if e.op == "ToInt64":
                return V.to_int64(args[0])
        except (V.TypeMismatch, V.ConversionError) as err:
            raise RuntimeTypeError(str(err), span) from None
        raise TypeError(f"unknown builtin {e.op!r}")
    if isinstance(e, P.ListE):
        return tuple(_eval_expr(i, row, idx, span) for i in e.items)
    raise TypeError(f"not an expression: {e!r}")


def _eval_aggregate(agg: P.GroupAggregate, ctx: ExecContext) -> list:
    rows = eval_plan(agg.input, ctx)
    idx = _index_map(agg.input.schema)
    key_positions = [idx[c] for c in agg.keys]
    agg_positions = [(idx[c], kind) for c, kind in agg.aggregations]
    groups: dict = {}
    order: list = []
    for row in rows:
        key_vals = tuple(row[p] for p in key_positions)
        k = row_key(key_vals)
        slot = groups.get(k)
        if slot is None:
            slot = (key_vals, [[] for _ in agg_positions])
            groups[k] = slot
            order.append(k)
        for i, (p, _) in enumerate(agg_positions):
            slot[1][i].append(row[p])
    out = []
    for k in order:
        key_vals, columns = groups[k]
        folded = []
        for (p, kind), vals in zip(agg_positions, columns):
            if kind == V.UNIQUE:
                distinct = {}
                for v in vals:
                    distinct.setdefault(value_key(v), v)
                if len(distinct) > 1:
                    raise FunctionalValueConflict(
                        agg.predicate, key_vals, tuple(distinct.values()))
                folded.append(vals[0])
            else:
                try:
                    folded.append(V.fold_aggregate(kind, vals))
                except V.TypeMismatch as err:
                    raise RuntimeTypeError(str(err), agg.span) from None
        out.append(key_vals + tuple(folded))
    return out
