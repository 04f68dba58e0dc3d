import random

import pytest

from gtlog.engine import FIXPOINT, OSCILLATION, STOP_PREDICATE, evaluate
from gtlog.errors import InvalidInterval, NotADag
from gtlog.parser import parse_program
from gtlog.relation import Relation
from gtlog.stdlib import (condense, earliest_arrival, extract_taxonomy,
                          message_passing, program_text, shortest_distances,
                          solve_win_move, transitive_closure,
                          transitive_reduction, two_hop_extend)

import oracles


def random_digraph(rng, n, p):
    return [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < p]


# ------------------------------------------------------------------ two-hop

def test_two_hop_examples():
    assert set(two_hop_extend([(1, 2), (2, 3)]).rows) == {(1, 2), (2, 3), (1, 3)}
    assert two_hop_extend(Relation("E", 2)).rows == ()
    assert set(two_hop_extend([(1, 1)]).rows) == {(1, 1)}


# ----------------------------------------------------------- message passing

def test_message_passing_examples():
    final, trace, term = message_passing([(0, 1), (1, 2)], [0])
    assert set(r[0] for r in final.rows) == {2} and term == FIXPOINT
    final, trace, term = message_passing(Relation("E", 2), [0])
    assert set(r[0] for r in final.rows) == {0} and term == FIXPOINT
    final, trace, term = message_passing([(0, 1), (1, 0)], [0])
    assert term == OSCILLATION


# ---------------------------------------------------------------- distances

def test_distance_examples():
    assert dict(shortest_distances([("a", "b")], "a").rows) == {"a": 0, "b": 1}
    diamond = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    assert dict(shortest_distances(diamond, "a").rows)["d"] == 2
    assert dict(shortest_distances(Relation("E", 2), "s").rows) == {"s": 0}


def test_distances_match_bfs_on_random_graphs():
    rng = random.Random(42)
    for _ in range(40):
        edges = random_digraph(rng, rng.randint(1, 8), 0.3)
        got = dict(shortest_distances(Relation("E", 2, rows=edges), 0).rows)
        assert got == oracles.bfs_distances(edges, 0)


# ----------------------------------------------------------------- win-move

def test_win_move_examples():
    gs = solve_win_move([("a", "b")])
    assert (gs.won, gs.lost, gs.drawn) == ({"a"}, {"b"}, set())
    gs = solve_win_move([(1, 2), (2, 3), (3, 1)])
    assert (gs.won, gs.lost) == (set(), set()) and gs.drawn == {1, 2, 3}
    gs = solve_win_move([("a", "b"), ("b", "c")])
    assert gs.won == {"b"} and gs.lost == {"a", "c"} and gs.drawn == set()


def check_game_invariants(moves, gs):
    succ = {}
    for x, y in moves:
        succ.setdefault(x, set()).add(y)
    positions = {x for x, _ in moves} | {y for _, y in moves}
    assert gs.won | gs.lost | gs.drawn == positions
    assert not (gs.won & gs.lost) and not (gs.won & gs.drawn) \
        and not (gs.lost & gs.drawn)
    for x in gs.lost:
        assert all(y in gs.won for y in succ.get(x, ()))
    for x in gs.won:
        assert any(y in gs.lost for y in succ.get(x, ()))
    for x in gs.drawn:
        moves_out = succ.get(x, set())
        assert moves_out
        assert any(y in gs.drawn for y in moves_out)
        assert not any(y in gs.lost for y in moves_out)
    for x, y in gs.winning_moves:
        assert x in gs.won and y in gs.lost


def test_win_move_matches_backward_induction_on_100_graphs():
    rng = random.Random(2024)
    for _ in range(100):
        moves = random_digraph(rng, rng.randint(1, 10), 0.3)
        if not moves:
            continue
        gs = solve_win_move(moves)
        won, lost, drawn = oracles.backward_induction(moves)
        assert (gs.won, gs.lost, gs.drawn) == (won, lost, drawn)
        check_game_invariants(moves, gs)


# ----------------------------------------------------------------- arrival

def test_arrival_examples():
    assert earliest_arrival([("a", "b", 0, 10), ("b", "c", 5, 6)], "a") == \
        {"a": 0, "b": 0, "c": 5}
    assert earliest_arrival([("a", "b", 3, 4)], "b") == {"b": 0}
    assert earliest_arrival([("a", "b", 0, 10), ("b", "c", 11, 20)], "a") == \
        {"a": 0, "b": 0, "c": 11}
    with pytest.raises(InvalidInterval):
        earliest_arrival([("a", "b", 5, 1)], "a")


def test_arrival_matches_exhaustive_paths_on_100_graphs():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(1, 8)
        edges = []
        for a in range(n):
            for b in range(n):
                if a != b and rng.random() < 0.3:
                    t0 = rng.randint(0, 10)
                    edges.append((a, b, t0, rng.randint(t0, 10)))
        rel = Relation("E", 4, rows=edges)
        assert earliest_arrival(rel, 0) == oracles.exhaustive_arrivals(edges, 0)


# ------------------------------------------------------ transitive reduction

def test_tr_examples():
    assert set(transitive_reduction([(1, 2), (2, 3), (1, 3)]).rows) == \
        {(1, 2), (2, 3)}
    path = [(i, i + 1) for i in range(5)]
    assert set(transitive_reduction(path).rows) == set(path)
    with pytest.raises(NotADag):
        transitive_reduction([(1, 2), (2, 1)])


def random_dag(rng, n, p):
    return [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]


def test_tr_minimality_on_100_dags():
    rng = random.Random(33)
    for _ in range(100):
        edges = random_dag(rng, rng.randint(1, 12), 0.3)
        rel = Relation("E", 2, rows=edges)
        tr = set(transitive_reduction(rel).rows)
        tc = set(transitive_closure(rel).rows)
        assert tc == oracles.reach_closure(edges)
        assert tr <= set(edges)
        assert oracles.reach_closure(tr) == tc
        for e in tr:  # minimality: no edge is removable
            assert oracles.reach_closure(tr - {e}) != tc


# -------------------------------------------------------------- condensation

def test_condense_examples():
    c = condense([(1, 2), (2, 1), (2, 3)], [1, 2, 3])
    assert c.representative == {1: 1, 2: 1, 3: 3}
    assert c.edges == {(1, 3)}
    dag = condense([(1, 2), (2, 3)], [1, 2, 3])
    assert dag.representative == {1: 1, 2: 2, 3: 3}
    lone = condense(Relation("E", 2), [9])
    assert lone.representative == {9: 9} and lone.edges == set()


def test_condense_matches_scc_oracle_on_100_graphs():
    rng = random.Random(88)
    for _ in range(100):
        n = rng.randint(1, 12)
        edges = random_digraph(rng, n, 0.3)
        nodes = list(range(n))
        c = condense(Relation("E", 2, rows=edges), nodes)
        assert c.representative == oracles.kosaraju_scc(nodes, edges)
        assert c.representative.keys() == set(nodes)
        for x, r in c.representative.items():
            assert c.representative[r] == r
        # the condensation is a DAG: no self-loops, no component on a cycle
        assert all(a != b for a, b in c.edges)
        closure = oracles.reach_closure(c.edges)
        assert all((comp, comp) not in closure
                   for comp in {a for a, _ in c.edges} | {b for _, b in c.edges})


# ----------------------------------------------------------------- taxonomy

def test_taxonomy_chain_literal_semantics():
    # one lineage: the first parent edge is already the single root edge
    res = extract_taxonomy([("Q1", "P171", "Q2"), ("Q2", "P171", "Q3")],
                           [("Q1", "one"), ("Q2", "two"), ("Q3", "three")],
                           ["Q1"])
    assert res.termination == STOP_PREDICATE
    assert res.edges.rows == (("Q2", "Q1", "two", "one"),)
    assert res.num_roots_trace == [1]


def test_taxonomy_no_supertaxon():
    res = extract_taxonomy([], [("x", "X")], ["x"])
    assert res.edges.rows == () and res.termination == FIXPOINT


def test_taxonomy_two_items_shared_parent_fixpoint():
    res = extract_taxonomy([("a", "P171", "p"), ("b", "P171", "p")],
                           [("a", "A"), ("b", "B"), ("p", "P")],
                           ["a", "b"])
    # two root edges out of p: the literal count never reaches 1
    assert res.termination == FIXPOINT
    assert res.num_roots_trace[-1] == 2
    assert set(res.edges.rows) == {("p", "a", "P", "A"), ("p", "b", "P", "B")}


def test_taxonomy_lineages_merge_then_stop():
    # two leaves under one arm of the root: chains merge below the root
    triples = [("l1", "P171", "m"), ("l2", "P171", "m"),
               ("m", "P171", "arm"), ("arm", "P171", "root")]
    labels = [(n, n.upper()) for n in ("l1", "l2", "m", "arm", "root")]
    res = extract_taxonomy(triples, labels, ["l1", "l2"])
    assert res.termination == STOP_PREDICATE
    assert ("root", "arm", "ROOT", "ARM") in set(res.edges.rows) or \
        ("arm", "m", "ARM", "M") in set(res.edges.rows)


def test_taxonomy_depth_zero():
    res = extract_taxonomy([("a", "P171", "b")], [("a", "A"), ("b", "B")],
                           ["a"], depth=0)
    assert res.edges.rows == () and res.iterations == 0


# ------------------------------------------------- wrappers are thin veneers

def test_wrappers_equal_generic_engine_runs():
    # the wrapper output equals running the shipped program text directly
    e = [(1, 2), (2, 3), (1, 3), (3, 4)]
    direct = evaluate(parse_program(program_text("transitive_reduction")),
                      {"E": e})
    assert direct.relation("TR") == transitive_reduction(e)
    assert direct.relation("TC") == transitive_closure(e)

    moves = [(1, 2), (2, 3), (3, 1), (1, 4)]
    direct = evaluate(parse_program(program_text("win_move")), {"Move": moves})
    gs = solve_win_move(moves)
    assert {r[0] for r in direct.relation("Won").rows} == gs.won
    assert {r[0] for r in direct.relation("Lost").rows} == gs.lost
    assert {r[0] for r in direct.relation("Drawn").rows} == gs.drawn
    assert {(r[0], r[1]) for r in direct.relation("W").rows} == gs.winning_moves


def test_win_move_self_loop_is_drawn():
    gs = solve_win_move([("a", "a")])
    assert gs.drawn == {"a"} and not gs.won and not gs.lost
