"""Semantic analysis: signatures, safety, dependency graph, strata, cliques.

Analysis also normalizes rules for the compiler:

* multi-head rules are split into one rule per head;
* function-style definitions (``Name(x) = expr;`` with an otherwise unsafe
  head) are treated as inline functions and substituted at use sites;
* disjunctions are eliminated by expanding each rule into alternative
  branch conjunctions (`~` distributes: ``~(a, b|c)`` becomes
  ``~(a,b), ~(a,c)``);
* every predicate used in expression position is rewritten to a fresh
  variable plus an implicit body literal binding that predicate's
  functional-value column (named ``$value`` internally).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from . import ast_nodes as A
from .errors import (AggregationConflict, AnalysisError, ArityMismatch,
                     DirectiveError, NilCheckError, NotFunctional,
                     UnknownPredicate, UnsafeVariable)

VALUE_COL = "$value"

MONOTONE = "Monotone"
SNAPSHOT_ITERATE = "SnapshotIterate"


@dataclass(frozen=True)
class PredicateSignature:
    name: str
    positional_arity: int
    named_attributes: tuple = ()
    has_functional_value: bool = False
    is_extensional: bool = False
    # Aggregation structure shared by all rules of the predicate.
    value_agg: Optional[str] = None        # Min/Max/Sum/Unique
    attr_aggs: tuple = ()                  # ((attr, agg) for `?`-marked attrs)
    distinct: bool = False
    is_inline_function: bool = False

    @property
    def key_columns(self) -> int:
        return self.positional_arity + len(self.named_attributes)


@dataclass
class NormRule:
    """One analyzed head with desugared, disjunction-free body branches."""
    pred: str
    key_exprs: tuple
    named_exprs: tuple            # ((attr, Term), ...) sorted by attr
    value_expr: Optional[object]
    value_agg: Optional[str]
    distinct: bool
    branches: tuple               # tuple of tuples of BodyFormula
    head_literals: tuple          # implicit literals feeding head expressions
    context_vars: tuple           # sorted source variables of the binding set
    span: Optional[tuple]
    index: int
    source: A.Rule


@dataclass
class CliqueInfo:
    preds: tuple
    directive: Optional[A.Directive]
    mode: str
    semi_naive_ok: bool
    stop_aux: tuple = ()          # topologically ordered helper predicates


@dataclass
class StratifiedPlan:
    strata: list
    recursive_cliques: list
    negation_edges: frozenset


@dataclass
class AnalysisResult:
    program: A.Program
    signatures: dict
    plan: StratifiedPlan
    rules: dict                   # pred -> [NormRule]
    inline_functions: dict        # name -> (params, expr)
    clique_of: dict               # pred -> index into plan.recursive_cliques

    def __iter__(self):
        # allow `signatures, plan = analyze(...)`
        return iter((self.signatures, self.plan))


# ----------------------------------------------------------------- term walks

def term_vars(t) -> Iterable[str]:
    if isinstance(t, A.Variable):
        yield t.name
    elif isinstance(t, (A.FunctionalCall, A.BuiltinCall)):
        for a in t.args:
            yield from term_vars(a)
    elif isinstance(t, A.ListLiteral):
        for a in t.items:
            yield from term_vars(a)


def formula_vars(f) -> Iterable[str]:
    if isinstance(f, A.Literal):
        for t in f.positional_args:
            yield from term_vars(t)
        for _, t in f.named_args:
            yield from term_vars(t)
    elif isinstance(f, A.Compare):
        yield from term_vars(f.left)
        yield from term_vars(f.right)
    elif isinstance(f, A.In):
        yield from term_vars(f.var)
        yield from term_vars(f.list)
    elif isinstance(f, A.NegatedConj):
        for c in f.conjuncts:
            yield from formula_vars(c)
    elif isinstance(f, A.Disjunction):
        for b in f.branches:
            yield from formula_vars(b)


def occurrences(body, depth: int = 0):
    """Yield (predicate, negation_depth, kind) for every reference in a body.

    kind is 'literal', 'value' (expression position) or 'nil'. The negation
    depth counts enclosing NegatedConj layers plus `~` literal markers, so a
    reference is positive iff its depth is even.
    """
    def from_term(t, d):
        if isinstance(t, A.FunctionalCall):
            yield (t.predicate, d, "value")
            for a in t.args:
                yield from from_term(a, d)
        elif isinstance(t, A.BuiltinCall):
            for a in t.args:
                yield from from_term(a, d)
        elif isinstance(t, A.ListLiteral):
            for a in t.items:
                yield from from_term(a, d)

    for f in body:
        if isinstance(f, A.Literal):
            yield (f.predicate, depth + (1 if f.negated else 0), "literal")
            for t in f.positional_args:
                yield from from_term(t, depth)
            for _, t in f.named_args:
                yield from from_term(t, depth)
        elif isinstance(f, A.Compare):
            yield from from_term(f.left, depth)
            yield from from_term(f.right, depth)
        elif isinstance(f, A.In):
            yield from from_term(f.var, depth)
            yield from from_term(f.list, depth)
        elif isinstance(f, A.NilCheck):
            yield (f.predicate, depth, "nil")
        elif isinstance(f, A.NegatedConj):
            yield from occurrences(f.conjuncts, depth + 1)
        elif isinstance(f, A.Disjunction):
            yield from occurrences(f.branches, depth)


# ------------------------------------------------------------ head splitting

@dataclass
class _Head:
    pred: str
    args: list
    value: Optional[A.HeadArg]
    distinct: bool
    body: list
    span: Optional[tuple]
    source: A.Rule


def _split_heads(program: A.Program) -> list:
    heads = []
    for rule in program.rules:
        heads.append(_Head(rule.head_predicate, rule.head_args, rule.head_value,
                           rule.distinct, rule.body, rule.span, rule))
        if rule.multi_head is not None:
            pred2, args2 = rule.multi_head
            heads.append(_Head(pred2, args2, None, rule.distinct, rule.body,
                               rule.span, rule))
    return heads


# --------------------------------------------------------- inline functions

def _find_inline_functions(heads, extensional) -> dict:
    by_pred: dict = {}
    for h in heads:
        by_pred.setdefault(h.pred, []).append(h)
    fns = {}
    for pred, hs in by_pred.items():
        if len(hs) != 1 or pred in extensional:
            continue
        h = hs[0]
        if h.body or h.value is None or h.value.agg != A.UNIQUE:
            continue
        params = []
        ok = all(isinstance(a.name, int) and isinstance(a.expr, A.Variable)
                 for a in h.args)
        if not ok:
            continue
        params = [a.expr.name for a in h.args]
        if len(set(params)) != len(params):
            continue
        free = set(term_vars(h.value.expr))
        if not free <= set(params):
            raise UnsafeVariable(sorted(free - set(params))[0], h.span)
        fns[pred] = (tuple(params), h.value.expr)
    return fns


def _expand_term(t, fns, depth=0):
    if depth > 64:
        raise AnalysisError("inline function definitions are recursive")
    if isinstance(t, A.FunctionalCall):
        args = [_expand_term(a, fns, depth) for a in t.args]
        if t.predicate in fns:
            params, expr = fns[t.predicate]
            if len(args) != len(params):
                raise ArityMismatch(
                    f"{t.predicate} takes {len(params)} arguments, got {len(args)}")
            return _expand_term(_substitute(expr, dict(zip(params, args))),
                                fns, depth + 1)
        return A.FunctionalCall(t.predicate, args)
    if isinstance(t, A.BuiltinCall):
        return A.BuiltinCall(t.op, [_expand_term(a, fns, depth) for a in t.args])
    if isinstance(t, A.ListLiteral):
        return A.ListLiteral([_expand_term(a, fns, depth) for a in t.items])
    return t


def _substitute(t, mapping):
    if isinstance(t, A.Variable):
        return mapping.get(t.name, t)
    if isinstance(t, A.FunctionalCall):
        return A.FunctionalCall(t.predicate, [_substitute(a, mapping) for a in t.args])
    if isinstance(t, A.BuiltinCall):
        return A.BuiltinCall(t.op, [_substitute(a, mapping) for a in t.args])
    if isinstance(t, A.ListLiteral):
        return A.ListLiteral([_substitute(a, mapping) for a in t.items])
    return t


def _expand_formula(f, fns):
    if isinstance(f, A.Literal):
        if f.predicate in fns:
            raise AnalysisError(f"function {f.predicate} cannot be used as a relation")
        return A.Literal(f.predicate,
                         [_expand_term(t, fns) for t in f.positional_args],
                         [(n, _expand_term(t, fns)) for n, t in f.named_args],
                         f.negated)
    if isinstance(f, A.Compare):
        return A.Compare(_expand_term(f.left, fns), f.op, _expand_term(f.right, fns))
    if isinstance(f, A.In):
        return A.In(_expand_term(f.var, fns), _expand_term(f.list, fns))
    if isinstance(f, A.NegatedConj):
        return A.NegatedConj([_expand_formula(c, fns) for c in f.conjuncts])
    if isinstance(f, A.Disjunction):
        return A.Disjunction([_expand_formula(b, fns) for b in f.branches])
    return f


# ------------------------------------------------- disjunction elimination

def _alternatives(f) -> list:
    """Alternative conjunction fragments for one formula."""
    if isinstance(f, A.Disjunction):
        out = []
        for b in f.branches:
            out.extend(_alternatives(b))
        return out
    if isinstance(f, A.NegatedConj):
        inner = _expand_disjunctions(f.conjuncts)
        return [[A.NegatedConj(alt) for alt in inner]]
    if isinstance(f, A.Literal) and f.negated:
        # normalize `~P(...)` to a negated conjunction of one positive literal
        pos = A.Literal(f.predicate, f.positional_args, f.named_args, False)
        return [[A.NegatedConj([pos])]]
    return [[f]]


def _expand_disjunctions(formulas) -> list:
    branches = [[]]
    for f in formulas:
        alts = _alternatives(f)
        branches = [b + frag for b in branches for frag in alts]
    return [tuple(b) for b in branches]


# ------------------------------------------------ functional-call desugaring

class _Desugar:
    def __init__(self, sig_of, span):
        self.sig_of = sig_of
        self.span = span
        self.counter = 0

    def fresh(self) -> A.Variable:
        v = A.Variable(f"$v{self.counter}")
        self.counter += 1
        return v

    def conj(self, formulas) -> list:
        memo: dict = {}
        out: list = []
        for f in formulas:
            out.extend(self.formula(f, memo))
        return out

    def formula(self, f, memo) -> list:
        acc: list = []
        if isinstance(f, A.Literal):
            pos = [self.term(t, memo, acc) for t in f.positional_args]
            named = [(n, self.term(t, memo, acc)) for n, t in f.named_args]
            return acc + [A.Literal(f.predicate, pos, named, f.negated)]
        if isinstance(f, A.Compare):
            left = self.term(f.left, memo, acc)
            right = self.term(f.right, memo, acc)
            return acc + [A.Compare(left, f.op, right)]
        if isinstance(f, A.In):
            var = self.term(f.var, memo, acc)
            lst = self.term(f.list, memo, acc)
            return acc + [A.In(var, lst)]
        if isinstance(f, A.NegatedConj):
            return [A.NegatedConj(self.conj(f.conjuncts))]
        return [f]

    def term(self, t, memo, acc):
        if isinstance(t, A.FunctionalCall):
            args = [self.term(a, memo, acc) for a in t.args]
            sig = self.sig_of(t.predicate, self.span)
            if not sig.has_functional_value:
                raise NotFunctional(
                    f"{t.predicate} has no functional value but is used as one",
                    self.span)
            if len(args) != sig.positional_arity:
                raise ArityMismatch(
                    f"{t.predicate} expects {sig.positional_arity} arguments, "
                    f"got {len(args)}", self.span)
            key = (t.predicate, tuple(args))
            if key in memo:
                return memo[key]
            v = self.fresh()
            acc.append(A.Literal(t.predicate, args, [(VALUE_COL, v)]))
            memo[key] = v
            return v
        if isinstance(t, A.BuiltinCall):
            return A.BuiltinCall(t.op, [self.term(a, memo, acc) for a in t.args])
        if isinstance(t, A.ListLiteral):
            return A.ListLiteral([self.term(a, memo, acc) for a in t.items])
        return t


# -------------------------------------------------------- binding analysis

def _literal_binds(lit: A.Literal):
    """(bound variable names, requirement variable names) of a positive literal."""
    binds, needs = set(), set()
    for t in list(lit.positional_args) + [t for _, t in lit.named_args]:
        if isinstance(t, A.Variable):
            binds.add(t.name)
        else:
            needs.update(term_vars(t))
    return binds, needs


def bindable_vars(formulas, outer: frozenset, span) -> set:
    """Fixpoint of variables bound by generators; raises UnsafeVariable on
    filters or negation contents that can never be grounded."""
    bound = set(outer)
    pending = list(formulas)
    progress = True
    while progress:
        progress = False
        for f in pending[:]:
            if isinstance(f, A.Literal) and not f.negated:
                binds, needs = _literal_binds(f)
                if needs <= bound:
                    bound |= binds
                    pending.remove(f)
                    progress = True
            elif isinstance(f, A.In) and isinstance(f.var, A.Variable):
                if set(term_vars(f.list)) <= bound:
                    bound.add(f.var.name)
                    pending.remove(f)
                    progress = True
            elif isinstance(f, A.Compare) and f.op == "=":
                lv = isinstance(f.left, A.Variable) and f.left.name not in bound
                rv = isinstance(f.right, A.Variable) and f.right.name not in bound
                if lv and set(term_vars(f.right)) <= bound:
                    bound.add(f.left.name)
                    pending.remove(f)
                    progress = True
                elif rv and not lv and set(term_vars(f.left)) <= bound:
                    bound.add(f.right.name)
                    pending.remove(f)
                    progress = True
    for f in pending:
        if isinstance(f, A.NegatedConj):
            continue  # validated below with correlation
        if isinstance(f, (A.Compare, A.In, A.Literal)):
            missing = set(formula_vars(f)) - bound
            if missing:
                raise UnsafeVariable(sorted(missing)[0], span)
    for f in formulas:
        if isinstance(f, A.NegatedConj):
            corr = set(formula_vars(f)) & bound
            bindable_vars(f.conjuncts, frozenset(corr), span)
    return bound


# ---------------------------------------------------------------- analysis

def _as_signature(name: str, ext) -> PredicateSignature:
    if isinstance(ext, PredicateSignature):
        return ext
    if isinstance(ext, tuple):
        arity, has_value = ext
        return PredicateSignature(name, arity, has_functional_value=has_value,
                                  is_extensional=True)
    # duck-typed Relation
    return PredicateSignature(name, ext.num_positional,
                              tuple(ext.named_attrs),
                              has_functional_value=ext.has_value,
                              is_extensional=True)


def analyze(program: A.Program, extensional: Optional[Mapping] = None,
            infer_extensional: bool = False) -> AnalysisResult:
    """Validate a parsed program and produce signatures plus a stratified plan.

    `extensional` maps relation names loaded from data to Relations,
    PredicateSignatures or (arity, has_value) pairs.  With
    `infer_extensional` enabled, predicates that are used but never defined
    are assumed extensional with the shape implied by their uses.
    """
    ext_sigs = {name: _as_signature(name, e) for name, e in (extensional or {}).items()}
    heads = _split_heads(program)
    fns = _find_inline_functions(heads, ext_sigs)
    heads = [h for h in heads if h.pred not in fns]

    # Expand inline functions everywhere before any further analysis.
    for h in heads:
        h.args = [A.HeadArg(a.name, _expand_term(a.expr, fns), a.agg, a.optional_marker)
                  for a in h.args]
        if h.value is not None:
            h.value = A.HeadArg(h.value.name, _expand_term(h.value.expr, fns),
                                h.value.agg, h.value.optional_marker)
        h.body = [_expand_formula(f, fns) for f in h.body]

    signatures = _build_signatures(heads, ext_sigs, fns, program,
                                   infer_extensional)

    def sig_of(name: str, span) -> PredicateSignature:
        try:
            return signatures[name]
        except KeyError:
            raise UnknownPredicate(f"unknown predicate {name}", span) from None

    rules: dict = {}
    norm_index = 0
    for h in heads:
        sig = signatures[h.pred]
        _check_usage_against_signatures(h, sig_of)
        branches = _expand_disjunctions(h.body)
        des = _Desugar(sig_of, h.span)
        dbranches = tuple(tuple(des.conj(list(b))) for b in branches)
        head_memo: dict = {}
        head_acc: list = []
        key_exprs = []
        named_exprs = []
        for a in h.args:
            expr = des.term(a.expr, head_memo, head_acc)
            if isinstance(a.name, int):
                key_exprs.append(expr)
            else:
                named_exprs.append((a.name, expr))
        value_expr = None
        if h.value is not None:
            value_expr = des.term(h.value.expr, head_memo, head_acc)
        named_exprs.sort(key=lambda kv: kv[0])

        bounds = [bindable_vars(b, frozenset(), h.span) for b in dbranches]
        context = set.intersection(*bounds) if bounds else set()
        context = {v for v in context if not v.startswith("$")}
        # Implicit head literals may bind further variables (a functional
        # call in the head ranges over that predicate's keys).
        head_bound = bindable_vars(list(head_acc), frozenset(context), h.span)
        needed = set()
        for e in key_exprs + [e for _, e in named_exprs]:
            needed |= set(term_vars(e))
        if value_expr is not None:
            needed |= set(term_vars(value_expr))
        missing = needed - head_bound
        if missing:
            raise UnsafeVariable(sorted(missing)[0], h.span)

        rules.setdefault(h.pred, []).append(NormRule(
            h.pred, tuple(key_exprs), tuple(named_exprs), value_expr,
            h.value.agg if h.value is not None else None,
            h.distinct, dbranches, tuple(head_acc),
            tuple(sorted(context)), h.span, norm_index, h.source))
        norm_index += 1

    plan, clique_of = _stratify(rules, signatures, program.directives)
    _check_nil_checks(rules, plan, clique_of)
    return AnalysisResult(program, signatures, plan, rules, fns, clique_of)


def _build_signatures(heads, ext_sigs, fns, program, infer_extensional) -> dict:
    signatures = dict(ext_sigs)
    shapes: dict = {}
    for h in heads:
        positional = [a for a in h.args if isinstance(a.name, int)]
        named = [a for a in h.args if isinstance(a.name, str)]
        shape = shapes.setdefault(h.pred, {
            "arity": len(positional), "named": None, "value_agg": [],
            "distinct": False, "spans": h.span})
        if shape["arity"] != len(positional):
            raise ArityMismatch(
                f"{h.pred} is defined with both {shape['arity']} and "
                f"{len(positional)} positional arguments", h.span)
        named_here = {}
        for a in named:
            named_here[a.name] = a.agg if a.optional_marker else None
        if shape["named"] is None:
            shape["named"] = dict(named_here)
        elif set(shape["named"]) != set(named_here):
            raise ArityMismatch(
                f"rules for {h.pred} disagree on named attributes", h.span)
        for name, agg in named_here.items():
            if name in shape["named"] and shape["named"][name] != agg:
                raise AggregationConflict(
                    f"attribute {name} of {h.pred} has conflicting aggregators",
                    h.span)
            shape["named"][name] = agg
        shape["value_agg"].append(h.value.agg if h.value is not None else None)
        shape["distinct"] = shape["distinct"] or h.distinct

    for pred, shape in shapes.items():
        aggs = set(shape["value_agg"])
        if len(aggs) > 1:
            if None in aggs:
                raise ArityMismatch(
                    f"some rules of {pred} define a functional value and some do not",
                    shape["spans"])
            raise AggregationConflict(
                f"rules for {pred} use different value aggregators", shape["spans"])
        value_agg = aggs.pop()
        attr_aggs = tuple(sorted((n, a) for n, a in shape["named"].items()
                                 if a is not None))
        ext = ext_sigs.get(pred)
        if ext is not None:
            if ext.positional_arity != shape["arity"] or \
                    ext.has_functional_value != (value_agg is not None):
                raise ArityMismatch(
                    f"loaded relation {pred} does not match the shape of its rules")
        signatures[pred] = PredicateSignature(
            pred, shape["arity"], tuple(sorted(shape["named"])),
            has_functional_value=value_agg is not None,
            is_extensional=ext is not None,
            value_agg=value_agg, attr_aggs=attr_aggs,
            distinct=shape["distinct"])

    for name, (params, _) in fns.items():
        signatures[name] = PredicateSignature(
            name, len(params), has_functional_value=True, value_agg=A.UNIQUE,
            is_inline_function=True)

    if infer_extensional:
        for h in heads:
            used = {pred for pred, _, _ in occurrences(h.body)}
            used |= {t.predicate for t in _walk_terms(h)
                     if isinstance(t, A.FunctionalCall)}
            for pred in sorted(used):
                if pred in signatures:
                    continue
                arity, has_value = _infer_shape(pred, heads)
                signatures[pred] = PredicateSignature(
                    pred, arity, has_functional_value=has_value,
                    is_extensional=True)
    return signatures


def _infer_shape(pred, heads):
    arity = 0
    has_value = False
    for h in heads:
        for f in _walk_formulas(h.body):
            if isinstance(f, A.Literal) and f.predicate == pred:
                arity = max(arity, len(f.positional_args))
        for t in _walk_terms(h):
            if isinstance(t, A.FunctionalCall) and t.predicate == pred:
                arity = max(arity, len(t.args))
                has_value = True
    return arity, has_value


def _walk_formulas(body):
    for f in body:
        yield f
        if isinstance(f, A.NegatedConj):
            yield from _walk_formulas(f.conjuncts)
        elif isinstance(f, A.Disjunction):
            yield from _walk_formulas(f.branches)


def _walk_terms(h):
    def from_term(t):
        yield t
        if isinstance(t, (A.FunctionalCall, A.BuiltinCall)):
            for a in t.args:
                yield from from_term(a)
        elif isinstance(t, A.ListLiteral):
            for a in t.items:
                yield from from_term(a)

    for a in h.args:
        yield from from_term(a.expr)
    if h.value is not None:
        yield from from_term(h.value.expr)
    for f in _walk_formulas(h.body):
        if isinstance(f, A.Literal):
            for t in list(f.positional_args) + [t for _, t in f.named_args]:
                yield from from_term(t)
        elif isinstance(f, A.Compare):
            yield from from_term(f.left)
            yield from from_term(f.right)
        elif isinstance(f, A.In):
            yield from from_term(f.var)
            yield from from_term(f.list)


def _check_usage_against_signatures(h, sig_of):
    for f in _walk_formulas(h.body):
        if isinstance(f, A.Literal):
            sig = sig_of(f.predicate, h.span)
            if sig.is_inline_function:
                raise AnalysisError(
                    f"function {f.predicate} cannot be used as a relation", h.span)
            if len(f.positional_args) > sig.positional_arity:
                raise ArityMismatch(
                    f"{f.predicate} has {sig.positional_arity} positional columns, "
                    f"got {len(f.positional_args)} arguments", h.span)
            for name, _ in f.named_args:
                if name != VALUE_COL and name not in sig.named_attributes:
                    raise ArityMismatch(
                        f"{f.predicate} has no attribute {name!r}", h.span)
        elif isinstance(f, A.NilCheck):
            sig_of(f.predicate, h.span)


# ------------------------------------------------------------ stratification

def _dependencies(rules) -> tuple:
    deps: dict = {}
    neg_edges = set()
    for pred, norm_rules in rules.items():
        deps.setdefault(pred, set())
        for nr in norm_rules:
            for branch in nr.branches:
                for used, depth, kind in occurrences(list(branch)):
                    if kind == "nil":
                        # a nil-check reads presence only; it never makes a
                        # predicate recursive by itself
                        neg_edges.add((pred, used))
                        continue
                    deps[pred].add(used)
                    if depth % 2 == 1:
                        neg_edges.add((pred, used))
            for lit in nr.head_literals:
                deps[pred].add(lit.predicate)
    return deps, neg_edges


def _tarjan_sccs(nodes, deps) -> list:
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list = []
    counter = [0]

    def strongconnect(v):
        work = [(v, iter(sorted(deps.get(v, ()))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in nodes:
                    continue
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(deps.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                sccs.append(tuple(sorted(scc)))

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)
    return sccs


def _stratify(rules, signatures, directives):
    deps, neg_edges = _dependencies(rules)
    nodes = set(deps)
    for pred, sig in signatures.items():
        if not sig.is_inline_function:
            nodes.add(pred)
            deps.setdefault(pred, set())
    sccs = _tarjan_sccs(nodes, deps)
    scc_of = {p: i for i, scc in enumerate(sccs) for p in scc}

    recursive = []
    for scc in sccs:
        self_loop = len(scc) > 1 or scc[0] in deps.get(scc[0], ())
        if self_loop and any(p in rules for p in scc):
            recursive.append(scc)

    cliques: list = []
    clique_of: dict = {}
    used_directives: set = set()
    for scc in recursive:
        directive = None
        for d in directives:
            if d.target_predicate in scc:
                if directive is not None:
                    raise DirectiveError(
                        f"multiple directives target the clique of {scc[0]}", d.span)
                directive = d
                used_directives.add(id(d))
        mode = check_clique_semantics(scc, rules)
        cliques.append(CliqueInfo(scc, directive, mode,
                                  _semi_naive_ok(scc, rules, signatures, mode)))
        for p in scc:
            clique_of[p] = len(cliques) - 1

    for d in directives:
        if id(d) in used_directives:
            continue
        if d.target_predicate not in nodes:
            raise UnknownPredicate(f"unknown predicate {d.target_predicate}", d.span)
        raise DirectiveError(
            f"@Recursive targets {d.target_predicate}, which is not recursive", d.span)

    extra_order_edges = _attach_stop_predicates(cliques, deps, nodes, rules, signatures)

    strata = _order_sccs(sccs, deps, scc_of, extra_order_edges)
    plan = StratifiedPlan(strata, cliques, frozenset(neg_edges))
    return plan, clique_of


def _attach_stop_predicates(cliques, deps, nodes, rules, signatures) -> list:
    extra_edges = []
    for ci, clique in enumerate(cliques):
        if clique.directive is None or clique.directive.stop_predicate is None:
            continue
        stop = clique.directive.stop_predicate
        if stop not in nodes:
            raise UnknownPredicate(f"unknown stop predicate {stop}",
                                   clique.directive.span)
        members = set(clique.preds)
        reach = set()
        work = [stop]
        while work:
            p = work.pop()
            if p in reach or p in members:
                continue
            reach.add(p)
            work.extend(deps.get(p, ()))
        depends_on_clique = set()
        for p in reach:
            seen = set()
            stack = list(deps.get(p, ()))
            while stack:
                q = stack.pop()
                if q in seen:
                    continue
                seen.add(q)
                if q in members:
                    depends_on_clique.add(p)
                    break
                stack.extend(deps.get(q, ()))
        aux = {p for p in reach if p == stop or p in depends_on_clique}
        for p in sorted(aux):
            if p in rules and any(p in c.preds for c in cliques):
                raise DirectiveError(
                    f"stop predicate dependency {p} is itself recursive")
        for p in sorted(reach - aux):
            for member in clique.preds:
                extra_edges.append((member, p))
        ordered = _topo_order_aux(aux, deps)
        cliques[ci] = CliqueInfo(clique.preds, clique.directive, clique.mode,
                                 clique.semi_naive_ok, tuple(ordered))
    return extra_edges


def _topo_order_aux(aux, deps):
    remaining = set(aux)
    ordered = []
    while remaining:
        ready = sorted(p for p in remaining
                       if not (deps.get(p, set()) & remaining - {p}))
        if not ready:
            raise DirectiveError("stop predicate dependencies are cyclic")
        ordered.append(ready[0])
        remaining.remove(ready[0])
    return ordered


def _order_sccs(sccs, deps, scc_of, extra_edges) -> list:
    import heapq
    n = len(sccs)
    succ = [set() for _ in range(n)]   # succ[i] = SCCs that depend on i
    indeg = [0] * n
    edges = set()
    for p, targets in deps.items():
        for q in targets:
            if q not in scc_of:
                continue
            i, j = scc_of[p], scc_of[q]
            if i != j:
                edges.add((i, j))
    for p, q in extra_edges:
        i, j = scc_of[p], scc_of[q]
        if i != j:
            edges.add((i, j))
    for i, j in edges:
        succ[j].add(i)
        indeg[i] += 1
    heap = [(scc[0], i) for i, scc in enumerate(sccs) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, i = heapq.heappop(heap)
        out.append(sccs[i])
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (sccs[j][0], j))
    if len(out) != n:
        raise AnalysisError("dependency ordering is cyclic")  # pragma: no cover
    return out


def check_clique_semantics(clique, rules) -> str:
    """Monotone when every recursive reference is positive (even negation
    depth) and no nil-check touches the clique; SnapshotIterate otherwise."""
    members = set(clique)
    for pred in clique:
        for nr in rules.get(pred, ()):
            for branch in nr.branches:
                for used, depth, kind in occurrences(list(branch)):
                    if used not in members:
                        continue
                    if kind == "nil" or depth % 2 == 1:
                        return SNAPSHOT_ITERATE
    return MONOTONE


def _semi_naive_ok(clique, rules, signatures, mode) -> bool:
    if mode != MONOTONE:
        return False
    members = set(clique)
    for pred in clique:
        sig = signatures[pred]
        if sig.value_agg is not None or sig.attr_aggs:
            return False
        for nr in rules.get(pred, ()):
            for branch in nr.branches:
                for used, depth, kind in occurrences(list(branch)):
                    if used in members and depth != 0:
                        return False
            for lit in nr.head_literals:
                if lit.predicate in members:
                    return False
    return True


def _check_nil_checks(rules, plan, clique_of):
    for pred, norm_rules in rules.items():
        for nr in norm_rules:
            for branch in nr.branches:
                for f in _walk_formulas(list(branch)):
                    if not isinstance(f, A.NilCheck):
                        continue
                    target = f.predicate
                    if target not in clique_of or clique_of.get(pred) != clique_of[target]:
                        raise NilCheckError(
                            f"{target} = nil is only allowed in rules of "
                            f"{target}'s own recursive clique", nr.span)
