"""Lower analyzed rules to relational-algebra plans.

Each rule body compiles to a left-deep pipeline: generators (positive
literals, list bindings, binding equalities) are picked greedily so joins
always share a bound variable when one is available, while filters and
antijoins fire as soon as their variables are bound. Negation compiles to
an AntiJoin whose inner pipeline starts from a seed scan over the distinct
correlated tuples of the outer rows, so arbitrarily nested negation
decorrelates into plain set differences.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast_nodes as A
from . import plan as P
from .analyzer import (VALUE_COL, AnalysisResult, NormRule, bindable_vars,
                       formula_vars, term_vars)
from .errors import CompileError

DELTA_PREFIX = "$delta:"
EXT_PREFIX = "$ext:"


@dataclass
class PredicatePlan:
    predicate: str
    plan: object
    columns: tuple
    rule_plans: tuple


def canonical_columns(sig) -> tuple:
    cols = [f"$k{i}" for i in range(sig.positional_arity)]
    cols += [f"$n:{a}" for a in sig.named_attributes]
    if sig.has_functional_value:
        cols.append("$val")
    return tuple(cols)


def compile_term(t) -> object:
    if isinstance(t, A.Variable):
        return P.Col(t.name)
    if isinstance(t, A.Constant):
        return P.ConstE(t.value)
    if isinstance(t, A.BuiltinCall):
        return P.BuiltinE(t.op, [compile_term(a) for a in t.args])
    if isinstance(t, A.ListLiteral):
        return P.ListE([compile_term(a) for a in t.items])
    raise CompileError(f"unexpected term in compiled rule: {t!r}")


class _Ctx:
    def __init__(self, span):
        self.span = span
        self.temp = 0
        self.seed = 0

    def fresh_temp(self) -> str:
        self.temp += 1
        return f"$a{self.temp}"

    def fresh_seed(self) -> str:
        self.seed += 1
        return f"$seed{self.seed}"


def _base_predicate(name: str) -> str:
    return name[len(DELTA_PREFIX):] if name.startswith(DELTA_PREFIX) else name


def _scan_for_literal(lit: A.Literal, ctx: _Ctx, sig_of):
    sig = sig_of(_base_predicate(lit.predicate))
    seen: dict = {}
    pending = []
    positional = []
    for t in lit.positional_args:
        positional.append(_pattern(t, seen, pending, ctx))
    named = []
    value_pattern = None
    for attr, t in lit.named_args:
        pat = _pattern(t, seen, pending, ctx)
        if attr == VALUE_COL:
            value_pattern = pat
        else:
            named.append((attr, pat))
    named.sort(key=lambda np: np[0])
    schema = tuple(seen)
    scan = P.Scan(lit.predicate, tuple(positional), tuple(named), value_pattern, schema)
    return scan, pending


def _pattern(t, seen, pending, ctx):
    if isinstance(t, A.Variable):
        if t.name in seen:
            tmp = ctx.fresh_temp()
            seen[tmp] = True
            pending.append((frozenset((t.name, tmp)),
                            P.CmpCond("=", P.Col(tmp), P.Col(t.name))))
            return ("var", tmp)
        seen[t.name] = True
        return ("var", t.name)
    if isinstance(t, A.Constant):
        return ("const", t.value)
    tmp = ctx.fresh_temp()
    seen[tmp] = True
    pending.append((frozenset(term_vars(t)) | {tmp},
                    P.CmpCond("=", P.Col(tmp), compile_term(t))))
    return ("var", tmp)


def _compile_conj(formulas, init_plan, init_schema, ctx: _Ctx, sig_of):
    plan = init_plan
    bound = list(init_schema)
    bound_set = set(bound)
    total = bindable_vars(list(formulas), frozenset(init_schema), ctx.span)
    pending_formulas = list(formulas)
    pending_conds: list = []

    def emit_select(cond):
        nonlocal plan
        plan = P.Select(plan, cond, tuple(bound), span=ctx.span)

    def drain():
        nonlocal plan
        progress = True
        while progress:
            progress = False
            for needs, cond in pending_conds[:]:
                if needs <= bound_set:
                    emit_select(cond)
                    pending_conds.remove((needs, cond))
                    progress = True
            for f in pending_formulas[:]:
                if isinstance(f, A.NilCheck):
                    emit_select(P.NilCond(f.predicate))
                    pending_formulas.remove(f)
                    progress = True
                elif isinstance(f, A.Compare):
                    handled = _try_compare(f)
                    if handled:
                        pending_formulas.remove(f)
                        progress = True
                elif isinstance(f, A.In):
                    if _in_is_filter(f) and set(formula_vars(f)) <= bound_set:
                        emit_select(P.InCond(compile_term(f.var), compile_term(f.list)))
                        pending_formulas.remove(f)
                        progress = True
                elif isinstance(f, A.NegatedConj):
                    corr = set(formula_vars(f)) & total
                    if corr <= bound_set:
                        _emit_antijoin(f, sorted(corr))
                        pending_formulas.remove(f)
                        progress = True

    def _try_compare(f: A.Compare) -> bool:
        nonlocal plan
        lvars = set(term_vars(f.left))
        rvars = set(term_vars(f.right))
        if lvars | rvars <= bound_set:
            emit_select(P.CmpCond(f.op, compile_term(f.left), compile_term(f.right)))
            return True
        if f.op == "=":
            if isinstance(f.left, A.Variable) and f.left.name not in bound_set \
                    and rvars <= bound_set:
                _emit_compute(f.left.name, compile_term(f.right))
                return True
            if isinstance(f.right, A.Variable) and f.right.name not in bound_set \
                    and lvars <= bound_set:
                _emit_compute(f.right.name, compile_term(f.left))
                return True
        return False

    def _in_is_filter(f: A.In) -> bool:
        return not (isinstance(f.var, A.Variable) and f.var.name not in bound_set)

    def _emit_compute(name, expr):
        nonlocal plan
        bound.append(name)
        bound_set.add(name)
        plan = P.Compute(plan, name, expr, tuple(bound), span=ctx.span)

    def _emit_antijoin(f: A.NegatedConj, corr):
        nonlocal plan
        seed_name = ctx.fresh_seed()
        seed = P.Scan(seed_name, tuple(("var", v) for v in corr), schema=tuple(corr))
        inner, inner_schema = _compile_conj(f.conjuncts, seed, corr, ctx, sig_of)
        inner = P.Project(inner, tuple(corr), tuple(corr))
        inner = P.Distinct(inner, tuple(corr))
        plan = P.AntiJoin(plan, inner, tuple(corr), seed_name, tuple(bound))

    def _generator_ready(f) -> bool:
        if isinstance(f, A.Literal) and not f.negated:
            return True
        if isinstance(f, A.In) and not _in_is_filter(f):
            return set(term_vars(f.list)) <= bound_set
        return False

    def _generator_key(pos, f):
        if isinstance(f, A.Literal):
            n_bound = 0
            n_new = 0
            for t in list(f.positional_args) + [t for _, t in f.named_args]:
                if isinstance(t, A.Variable):
                    if t.name in bound_set:
                        n_bound += 1
                    else:
                        n_new += 1
                else:
                    n_bound += 1
            return (-n_bound, n_new, pos)
        return (0, 1, pos)

    def _emit_generator(f):
        nonlocal plan
        if isinstance(f, A.Literal):
            scan, pending = _scan_for_literal(f, ctx, sig_of)
            pending_conds.extend(pending)
            new_vars = [v for v in scan.schema if v not in bound_set]
            if isinstance(plan, P.Unit):
                plan = scan
            else:
                shared = tuple(v for v in scan.schema if v in bound_set)
                plan = P.Join(plan, scan, shared, tuple(bound) + tuple(new_vars))
            bound.extend(new_vars)
            bound_set.update(new_vars)
            return
        # In-generator over a literal list: union of per-item bindings.
        if not isinstance(f.list, A.ListLiteral):
            raise CompileError(
                "binding membership requires a literal list on the right of 'in'")
        var = f.var.name
        schema = tuple(bound) + (var,)
        branches = [P.Compute(plan, var, compile_term(item), schema, span=ctx.span)
                    for item in f.list.items]
        plan = P.Distinct(P.UnionAll(branches, schema), schema)
        bound.append(var)
        bound_set.add(var)

    while True:
        drain()
        gens = [(i, f) for i, f in enumerate(pending_formulas) if _generator_ready(f)]
        if not gens:
            break
        _, best = min(gens, key=lambda pair: _generator_key(pair[0], pair[1]))
        pending_formulas.remove(best)
        _emit_generator(best)
    drain()
    if pending_formulas or pending_conds:
        raise CompileError(
            f"rule cannot be ordered for evaluation: {pending_formulas or pending_conds}")
    return plan, tuple(bound)


def compile_rule(nr: NormRule, signatures) -> object:
    """Plan producing this rule's head-row bag over the predicate's columns."""

    def sig_of(name):
        try:
            return signatures[name]
        except KeyError:
            raise CompileError(f"unknown predicate {name}") from None

    ctx = _Ctx(nr.span)
    pipes = []
    for branch in nr.branches:
        pl, schema = _compile_conj(branch, P.Unit(), (), ctx, sig_of)
        pipes.append((pl, schema))
    if len(pipes) == 1:
        pipe, schema = pipes[0]
    else:
        cols = tuple(nr.context_vars)
        projected = [P.Project(pl, cols, cols) for pl, _ in pipes]
        pipe = P.Distinct(P.UnionAll(projected, cols), cols)
        schema = cols
    if nr.head_literals:
        pipe, schema = _compile_conj(nr.head_literals, pipe, schema, ctx, sig_of)

    sig = signatures[nr.pred]
    out_cols = canonical_columns(sig)
    exprs = list(nr.key_exprs)
    named = dict(nr.named_exprs)
    exprs += [named[a] for a in sig.named_attributes]
    if sig.has_functional_value:
        exprs.append(nr.value_expr)
    working = list(schema)
    sources = []
    for col, term in zip(out_cols, exprs):
        compiled = compile_term(term)
        if isinstance(compiled, P.Col):
            sources.append(compiled.name)  # plain variable: project, don't copy
        else:
            working.append(col)
            pipe = P.Compute(pipe, col, compiled, tuple(working), span=nr.span)
            sources.append(col)
    return P.Project(pipe, tuple(sources), out_cols)


def compile_predicate(pred: str, norm_rules, signatures,
                      extensional: bool = False) -> PredicatePlan:
    """Union the per-rule plans, then aggregate or deduplicate per the
    predicate's declared structure."""
    sig = signatures[pred]
    cols = canonical_columns(sig)
    rule_plans = tuple(compile_rule(nr, signatures) for nr in norm_rules)
    inputs = list(rule_plans)
    if extensional:
        positional = tuple(("var", c) for c in cols[:sig.positional_arity])
        named = tuple((a, ("var", f"$n:{a}")) for a in sig.named_attributes)
        value_pattern = ("var", "$val") if sig.has_functional_value else None
        inputs.append(P.Scan(EXT_PREFIX + pred, positional, named, value_pattern, cols))
    plan = inputs[0] if len(inputs) == 1 else P.UnionAll(inputs, cols)
    if sig.value_agg is not None or sig.attr_aggs:
        agg_attrs = dict(sig.attr_aggs)
        keys = [f"$k{i}" for i in range(sig.positional_arity)]
        keys += [f"$n:{a}" for a in sig.named_attributes if a not in agg_attrs]
        aggs = [(f"$n:{a}", agg_attrs[a]) for a in sig.named_attributes if a in agg_attrs]
        if sig.value_agg is not None:
            aggs.append(("$val", sig.value_agg))
        plan = P.GroupAggregate(plan, tuple(keys), tuple(aggs), pred,
                                tuple(keys) + tuple(c for c, _ in aggs),
                                span=norm_rules[0].span if norm_rules else None)
        plan = P.Project(plan, cols, cols)
    elif len(inputs) > 1:
        plan = P.Distinct(plan, cols)
    return PredicatePlan(pred, plan, cols, rule_plans)


def delta_rules(nr: NormRule, members) -> list:
    """Semi-naive variants: one single-branch rule per positive occurrence of
    a clique predicate, with that occurrence reading the delta relation."""
    out = []
    for branch in nr.branches:
        for fi, f in enumerate(branch):
            if isinstance(f, A.Literal) and not f.negated and f.predicate in members:
                nb = list(branch)
                nb[fi] = A.Literal(DELTA_PREFIX + f.predicate,
                                   f.positional_args, f.named_args)
                out.append(NormRule(nr.pred, nr.key_exprs, nr.named_exprs,
                                    nr.value_expr, nr.value_agg, nr.distinct,
                                    (tuple(nb),), nr.head_literals,
                                    nr.context_vars, nr.span, nr.index, nr.source))
    return out


def compile_program(analysis: AnalysisResult) -> dict:
    plans = {}
    for pred, norm_rules in analysis.rules.items():
        plans[pred] = compile_predicate(
            pred, norm_rules, analysis.signatures,
            extensional=analysis.signatures[pred].is_extensional)
    return plans


def explain_plan(plan) -> str:
    return P.explain(plan.plan if isinstance(plan, PredicatePlan) else plan)
