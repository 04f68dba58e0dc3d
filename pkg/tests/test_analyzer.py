import pytest

from gtlog import ast_nodes as A
from gtlog.analyzer import (MONOTONE, SNAPSHOT_ITERATE, analyze,
                            check_clique_semantics, occurrences)
from gtlog.errors import (AggregationConflict, AnalysisError, ArityMismatch,
                          DirectiveError, NilCheckError, NotFunctional,
                          UnknownPredicate, UnsafeVariable)
from gtlog.parser import parse_program

from conftest import corpus_text


def test_two_hop_strata():
    analysis = analyze(parse_program(corpus_text("two_hop")),
                       extensional={"E": (2, False)})
    assert analysis.plan.strata == [("E",), ("E2",)]
    assert analysis.plan.recursive_cliques == []


def test_distance_clique_is_monotone_min():
    analysis = analyze(parse_program(corpus_text("distances")),
                       extensional={"E": (2, False), "Start": (0, True)})
    (clique,) = analysis.plan.recursive_cliques
    assert clique.preds == ("D",)
    assert clique.mode == MONOTONE
    assert analysis.signatures["D"].value_agg == "Min"
    assert not clique.semi_naive_ok  # aggregated head


def test_message_passing_clique_snapshot_mode():
    analysis = analyze(parse_program(corpus_text("message_passing")),
                       extensional={"E": (2, False)})
    (clique,) = analysis.plan.recursive_cliques
    assert clique.preds == ("M",)
    assert clique.mode == SNAPSHOT_ITERATE
    assert ("M", "M") in analysis.plan.negation_edges


def test_win_move_clique_positive_through_double_negation():
    analysis = analyze(parse_program(corpus_text("win_move")),
                       extensional={"Move": (2, False)})
    (clique,) = analysis.plan.recursive_cliques
    assert clique.preds == ("W",)
    assert clique.mode == MONOTONE
    assert not clique.semi_naive_ok  # reference sits under double negation


def test_polarity_of_w_is_even():
    prog = parse_program(corpus_text("win_move"))
    w_rule = prog.rules[0]
    depths = [d for pred, d, kind in occurrences(w_rule.body) if pred == "W"]
    assert depths and all(d % 2 == 0 for d in depths)


def test_tc_clique_semi_naive():
    analysis = analyze(parse_program(corpus_text("transitive_reduction")),
                       extensional={"E": (2, False)})
    (clique,) = analysis.plan.recursive_cliques
    assert clique.preds == ("TC",)
    assert clique.mode == MONOTONE and clique.semi_naive_ok
    assert check_clique_semantics(("TC",), analysis.rules) == MONOTONE


def test_taxonomy_analysis():
    analysis = analyze(parse_program(corpus_text("taxonomy")),
                       extensional={"T": (3, False), "L": (1, True),
                                    "ItemOfInterest": (1, False)})
    (clique,) = analysis.plan.recursive_cliques
    assert clique.preds == ("E",)
    assert clique.directive is not None and clique.directive.depth == -1
    assert clique.stop_aux == ("NumRoots", "FoundCommonAncestor")
    assert clique.semi_naive_ok
    assert "TaxonLabel" in analysis.inline_functions
    assert analysis.signatures["E"].positional_arity == 4


def test_strata_order_deterministic_ties_lexicographic():
    text = "B(x) :- Src(x);\nA(x) :- Src(x);\nC(x) :- A(x), B(x);"
    analysis = analyze(parse_program(text), extensional={"Src": (1, False)})
    assert analysis.plan.strata == [("Src",), ("A",), ("B",), ("C",)]
    again = analyze(parse_program(text), extensional={"Src": (1, False)})
    assert again.plan.strata == analysis.plan.strata


def test_unsafe_negation_only_binding():
    with pytest.raises(UnsafeVariable) as exc:
        analyze(parse_program("Bad(y) :- ~E(x, y);"),
                extensional={"E": (2, False)})
    assert exc.value.variable == "y"


def test_unsafe_head_variable():
    with pytest.raises(UnsafeVariable):
        analyze(parse_program("P(x, y) :- E(x);"), extensional={"E": (1, False)})


def test_unknown_predicate():
    with pytest.raises(UnknownPredicate):
        analyze(parse_program("P(x) :- Mystery(x);"))


def test_arity_mismatch_on_overlong_use():
    with pytest.raises(ArityMismatch):
        analyze(parse_program("P(x) :- E(x, y, z);"), extensional={"E": (2, False)})


def test_arity_mismatch_across_rules():
    with pytest.raises(ArityMismatch):
        analyze(parse_program("P(x) :- E(x, y);\nP(x, y) :- E(x, y);"),
                extensional={"E": (2, False)})


def test_partial_application_is_allowed():
    analysis = analyze(parse_program("Seen(x) :- E(x);"),
                       extensional={"E": (4, False)})
    assert analysis.signatures["Seen"].positional_arity == 1


def test_aggregation_conflict_between_rules():
    text = ('R(x, color? Max= "a") distinct :- E(x, y);\n'
            'R(x, color? Min= "b") distinct :- E(x, y);')
    with pytest.raises(AggregationConflict):
        analyze(parse_program(text), extensional={"E": (2, False)})


def test_value_aggregator_conflict():
    text = "D(x) Min= 1 :- E(x, y);\nD(x) Max= 2 :- E(x, y);"
    with pytest.raises(AggregationConflict):
        analyze(parse_program(text), extensional={"E": (2, False)})


def test_value_presence_mismatch():
    text = "D(x) Min= 1 :- E(x, y);\nD(x) :- E(x, y);"
    with pytest.raises(ArityMismatch):
        analyze(parse_program(text), extensional={"E": (2, False)})


def test_non_functional_used_as_function():
    with pytest.raises(NotFunctional):
        analyze(parse_program("P(x) :- E(x), x = Q(x);"),
                extensional={"E": (1, False), "Q": (1, False)})


def test_nil_check_outside_own_clique_rejected():
    text = "P(x) :- Q = nil, E(x);\nQ(x) :- Q(x);"
    with pytest.raises(NilCheckError):
        analyze(parse_program(text), extensional={"E": (1, False)})


def test_nil_check_on_nonrecursive_rejected():
    with pytest.raises(NilCheckError):
        analyze(parse_program("P(x) :- P = nil, E(x);"),
                extensional={"E": (1, False)})


def test_directive_on_nonrecursive_predicate_rejected():
    text = "@Recursive(P, 4);\nP(x) :- E(x);"
    with pytest.raises(DirectiveError):
        analyze(parse_program(text), extensional={"E": (1, False)})


def test_inline_function_not_usable_as_relation():
    text = "F(x) = x + 1;\nP(y) :- F(y);"
    with pytest.raises(AnalysisError):
        analyze(parse_program(text))


def test_extensional_and_intensional_union_allowed():
    analysis = analyze(parse_program("E2(x, y) :- E(x, y);"),
                       extensional={"E": (2, False), "E2": (2, False)})
    assert analysis.signatures["E2"].is_extensional


def test_infer_extensional_shapes():
    analysis = analyze(parse_program(corpus_text("distances")),
                       infer_extensional=True)
    assert analysis.signatures["E"].positional_arity == 2
    assert analysis.signatures["Start"].has_functional_value
