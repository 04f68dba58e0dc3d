import pytest

from gtlog import plan as P
from gtlog.analyzer import analyze
from gtlog.compiler import compile_program, compile_rule, compile_predicate
from gtlog.executor import ExecContext, eval_plan
from gtlog.errors import CompileError
from gtlog.parser import parse_program
from gtlog.plan import explain
from gtlog.relation import Relation

from conftest import CORPUS_NAMES, corpus_text


def _plan_nodes(plan):
    yield plan
    for attr in ("input", "left", "right", "inner"):
        child = getattr(plan, attr, None)
        if child is not None:
            yield from _plan_nodes(child)
    for child in getattr(plan, "inputs", ()):
        yield from _plan_nodes(child)


def _analyzed(text, ext):
    analysis = analyze(parse_program(text), extensional=ext)
    return analysis


def test_two_hop_plan_shape():
    analysis = _analyzed("E2(x, z) :- E(x, y), E(y, z);", {"E": (2, False)})
    plan = compile_rule(analysis.rules["E2"][0], analysis.signatures)
    kinds = [type(n).__name__ for n in _plan_nodes(plan)]
    assert kinds.count("Join") == 1
    assert kinds.count("Scan") == 2
    join = next(n for n in _plan_nodes(plan) if isinstance(n, P.Join))
    assert join.on == ("y",)


def test_drawn_rule_compiles_to_two_antijoins():
    text = corpus_text("win_move")
    analysis = _analyzed(text, {"Move": (2, False)})
    plan = compile_rule(analysis.rules["Drawn"][0], analysis.signatures)
    antis = [n for n in _plan_nodes(plan) if isinstance(n, P.AntiJoin)]
    assert len(antis) == 2
    assert all(a.correlated == ("x",) for a in antis)


def test_min_distance_rule_plan():
    analysis = _analyzed(corpus_text("distances"),
                         {"E": (2, False), "Start": (0, True)})
    pred_plan = compile_predicate("D", analysis.rules["D"], analysis.signatures)
    kinds = [type(n).__name__ for n in _plan_nodes(pred_plan.plan)]
    assert "GroupAggregate" in kinds and "UnionAll" in kinds
    agg = next(n for n in _plan_nodes(pred_plan.plan)
               if isinstance(n, P.GroupAggregate))
    assert agg.aggregations == (("$val", "Min"),)
    assert agg.keys == ("$k0",)


def test_nested_negation_depth_two_compiles():
    analysis = _analyzed(corpus_text("win_move"), {"Move": (2, False)})
    plan = compile_rule(analysis.rules["W"][0], analysis.signatures)
    outer = [n for n in _plan_nodes(plan) if isinstance(n, P.AntiJoin)]
    assert len(outer) == 2  # one nested inside the other
    top = outer[0]
    inner = [n for n in _plan_nodes(top.inner) if isinstance(n, P.AntiJoin)]
    assert len(inner) == 1


def test_sum_counts_bindings():
    analysis = _analyzed("NumRoots() += 1 :- E(x, y), ~E(z, x);", {"E": (2, False)})
    pred_plan = compile_predicate("NumRoots", analysis.rules["NumRoots"],
                                  analysis.signatures)
    agg = next(n for n in _plan_nodes(pred_plan.plan)
               if isinstance(n, P.GroupAggregate))
    assert agg.keys == ()
    assert agg.aggregations == (("$val", "Sum"),)
    rels = {"E": Relation("E", 2, rows=[(1, 2), (1, 3), (2, 3)])}
    rows = eval_plan(pred_plan.plan, ExecContext(rels))
    assert rows == [(2,)]  # bindings (1,2) and (1,3); node 2 has an incoming edge


def test_single_rule_predicate_plan_is_rule_plan():
    analysis = _analyzed("P(x) :- E(x, y);", {"E": (2, False)})
    pred_plan = compile_predicate("P", analysis.rules["P"], analysis.signatures)
    assert pred_plan.plan == pred_plan.rule_plans[0]


def test_cross_rule_attr_aggregation():
    analysis = _analyzed(corpus_text("two_hop"), {"E": (2, False)})
    # corpus fidelity for compilation: every corpus program compiles
    for name in CORPUS_NAMES:
        ext = {"E": (4 if name == "taxonomy" else 2, False)}
        full = analyze(parse_program(corpus_text(name)), infer_extensional=True)
        compile_program(full)


def test_aggregation_neutrality_single_tuple_group():
    text = "Best(x) Min= y :- E(x, y);"
    analysis = _analyzed(text, {"E": (2, False)})
    plan = compile_predicate("Best", analysis.rules["Best"], analysis.signatures).plan
    rels = {"E": Relation("E", 2, rows=[(1, 7)])}
    assert eval_plan(plan, ExecContext(rels)) == [(1, 7)]
    for agg in ("Max=", "+="):
        text2 = f"Best(x) {agg} y :- E(x, y);"
        a2 = _analyzed(text2, {"E": (2, False)})
        p2 = compile_predicate("Best", a2.rules["Best"], a2.signatures).plan
        assert eval_plan(p2, ExecContext(rels)) == [(1, 7)]


def test_dynamic_list_binding_rejected():
    text = "P(x) :- Lists(l), x in l;"
    analysis = _analyzed(text, {"Lists": (1, False)})
    with pytest.raises(CompileError):
        compile_rule(analysis.rules["P"][0], analysis.signatures)


def test_membership_filter_on_bound_variable_allowed():
    text = "P(x) :- E(x, l), x in l;"
    analysis = _analyzed(text, {"E": (2, False)})
    plan = compile_rule(analysis.rules["P"][0], analysis.signatures)
    rels = {"E": Relation("E", 2, rows=[(1, (1, 5)), (2, (3,))])}
    rows = eval_plan(plan, ExecContext(rels))
    assert rows == [(1,)]


def test_explain_single_scan_is_one_line():
    analysis = _analyzed("P(x) :- E(x);", {"E": (1, False)})
    scan = compile_rule(analysis.rules["P"][0], analysis.signatures)
    # the rule plan is project-over-scan; the scan itself is one line
    inner = next(n for n in _plan_nodes(scan) if isinstance(n, P.Scan))
    assert explain(inner) == "scan E(x)"


def test_explain_tr_rule_shows_antijoin_over_join():
    analysis = _analyzed(corpus_text("transitive_reduction"), {"E": (2, False)})
    plan = compile_rule(analysis.rules["TR"][0], analysis.signatures)
    text = explain(plan)
    anti_at = text.index("antijoin")
    join_at = text.index("join", anti_at)
    assert anti_at < join_at
    assert "scan TC(z, y)" in text


def test_explain_injective_on_corpus():
    plans = []
    for name in CORPUS_NAMES:
        analysis = analyze(parse_program(corpus_text(name)), infer_extensional=True)
        for pred, rules in sorted(analysis.rules.items()):
            plans.append(compile_predicate(pred, rules, analysis.signatures).plan)
    texts = [explain(p) for p in plans]
    for i in range(len(plans)):
        for j in range(i + 1, len(plans)):
            if plans[i] != plans[j]:
                assert texts[i] != texts[j]


def _check_columns_resolve(plan):
    """Every column a node consumes must exist in its input's schema."""
    from gtlog.plan import (AntiJoin, Col, CmpCond, Compute, Distinct,
                            GroupAggregate, InCond, Join, Project, Select,
                            UnionAll)

    def expr_cols(e):
        if isinstance(e, Col):
            yield e.name
        for a in getattr(e, "args", ()) or ():
            yield from expr_cols(a)
        for a in getattr(e, "items", ()) or ():
            yield from expr_cols(a)

    def walk(node):
        if isinstance(node, Select):
            cond = node.cond
            cols = []
            if isinstance(cond, CmpCond):
                cols = list(expr_cols(cond.left)) + list(expr_cols(cond.right))
            elif isinstance(cond, InCond):
                cols = list(expr_cols(cond.item)) + list(expr_cols(cond.list))
            assert set(cols) <= set(node.input.schema), (cols, node.input.schema)
            walk(node.input)
        elif isinstance(node, Compute):
            assert set(expr_cols(node.expr)) <= set(node.input.schema)
            walk(node.input)
        elif isinstance(node, Project):
            assert set(node.columns) <= set(node.input.schema)
            walk(node.input)
        elif isinstance(node, Distinct):
            walk(node.input)
        elif isinstance(node, GroupAggregate):
            assert set(node.keys) <= set(node.input.schema)
            assert {c for c, _ in node.aggregations} <= set(node.input.schema)
            walk(node.input)
        elif isinstance(node, Join):
            assert set(node.on) <= set(node.left.schema)
            assert set(node.on) <= set(node.right.schema)
            walk(node.left)
            walk(node.right)
        elif isinstance(node, AntiJoin):
            assert set(node.correlated) <= set(node.left.schema)
            walk(node.left)
            walk(node.inner)
        elif isinstance(node, UnionAll):
            for sub in node.inputs:
                assert sub.schema == node.schema or len(sub.schema) == len(node.schema)
                walk(sub)

    walk(plan)


def test_all_corpus_plans_have_resolvable_columns():
    for name in CORPUS_NAMES:
        analysis = analyze(parse_program(corpus_text(name)), infer_extensional=True)
        for pred, rules in analysis.rules.items():
            _check_columns_resolve(
                compile_predicate(pred, rules, analysis.signatures).plan)
