"""The shipped graph-transformation programs plus typed convenience wrappers.

Every wrapper is a thin veneer: it binds its arguments as extensional
relations, runs the corresponding `.gtl` asset through the generic engine
and repackages the derived relations. Nothing here computes results any
other way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Union

from .engine import EvalConfig, evaluate
from .errors import InvalidInterval, NotADag
from .parser import parse_program
from .relation import Relation

PROGRAM_DIR = Path(__file__).parent / "programs"

PROGRAMS = ("two_hop", "message_passing", "distances", "win_move",
            "earliest_arrival", "transitive_reduction", "condensation",
            "taxonomy", "tr_render", "condensation_render")


def program_text(name: str) -> str:
    if name not in PROGRAMS:
        raise KeyError(f"unknown program {name!r}; choose from {PROGRAMS}")
    return (PROGRAM_DIR / f"{name}.gtl").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _program(name: str):
    return parse_program(program_text(name))


# -------------------------------------------------------------- result types

Value = object
ArrivalMap = Dict[Value, int]


@dataclass
class GameSolution:
    won: set
    lost: set
    drawn: set
    winning_moves: set

    @property
    def positions(self) -> set:
        return self.won | self.lost | self.drawn


@dataclass
class Condensation:
    representative: dict          # node -> component id (minimal node id)
    edges: set                    # (component, component), no self loops


@dataclass
class TaxonomyResult:
    edges: Relation               # (parent, child, parent label, child label)
    termination: str
    num_roots_trace: list = field(default_factory=list)
    iterations: int = 0


# ------------------------------------------------------------------ helpers

RelationLike = Union[Relation, Iterable[tuple]]


def _relation(name: str, data: RelationLike, arity: int,
              has_value: bool = False) -> Relation:
    if isinstance(data, Relation):
        return data
    return Relation(name, arity, has_value=has_value,
                    rows=[tuple(r) for r in data])


def _unary(name: str, items) -> Relation:
    if isinstance(items, Relation):
        return items
    return Relation(name, 1, rows=[(x,) for x in items])


def _column_set(rel: Relation, col: int = 0) -> set:
    return {row[col] for row in rel.rows}


# ----------------------------------------------------------------- wrappers

def two_hop_extend(edges: RelationLike) -> Relation:
    """Edges plus one new edge per directed two-hop path."""
    result = evaluate(_program("two_hop"), {"E": _relation("E", edges, 2)})
    return result.relation("E2")


def message_passing(edges: RelationLike, start_nodes, max_iter: int = 32):
    """Run the token-passing rules; returns (final M, per-iteration trace,
    termination reason)."""
    config = EvalConfig(default_depth=max_iter, keep_history=True)
    result = evaluate(_program("message_passing"),
                      {"E": _relation("E", edges, 2), "M0": _unary("M0", start_nodes)},
                      config)
    key = result.clique_key("M")
    trace = [step["M"] for step in result.history[key]]
    return result.relation("M"), trace, result.terminations[key]


def shortest_distances(edges: RelationLike, start) -> Relation:
    """Functional relation node -> unweighted hop distance from `start`."""
    start_rel = Relation("Start", 0, has_value=True, rows=[(start,)])
    result = evaluate(_program("distances"),
                      {"E": _relation("E", edges, 2), "Start": start_rel})
    return result.relation("D")


def solve_win_move(moves: RelationLike) -> GameSolution:
    """Well-founded solution of the move graph: won/lost/drawn positions and
    the winning-move edges certifying them."""
    result = evaluate(_program("win_move"), {"Move": _relation("Move", moves, 2)})
    return GameSolution(
        won=_column_set(result.relation("Won")),
        lost=_column_set(result.relation("Lost")),
        drawn=_column_set(result.relation("Drawn")),
        winning_moves={(r[0], r[1]) for r in result.relation("W").rows})


def earliest_arrival(temporal_edges: RelationLike, start) -> ArrivalMap:
    """Earliest arrival per node over edges (x, y, t0, t1) that can only be
    crossed while they exist; departure from `start` at time 0."""
    rel = _relation("E", temporal_edges, 4)
    for x, y, t0, t1 in rel.rows:
        if t0 > t1:
            raise InvalidInterval(f"edge ({x!r}, {y!r}) has t0 {t0} > t1 {t1}")
    start_rel = Relation("Start", 0, has_value=True, rows=[(start,)])
    result = evaluate(_program("earliest_arrival"), {"E": rel, "Start": start_rel})
    return {row[0]: row[1] for row in result.relation("Arrival").rows}


def transitive_closure(edges: RelationLike) -> Relation:
    result = evaluate(_program("transitive_reduction"),
                      {"E": _relation("E", edges, 2)})
    return result.relation("TC")


def transitive_reduction(edges: RelationLike) -> Relation:
    """Minimal subgraph of a DAG with the original reachability."""
    rel = _relation("E", edges, 2)
    result = evaluate(_program("transitive_reduction"), {"E": rel})
    closure = result.relation("TC")
    for x, y in closure.rows:
        if x == y:
            raise NotADag(f"input contains a cycle through {x!r}")
    return result.relation("TR")


def condense(edges: RelationLike, nodes) -> Condensation:
    """Collapse strongly connected components to their minimal node id."""
    result = evaluate(_program("condensation"),
                      {"E": _relation("E", edges, 2), "Node": _unary("Node", nodes)})
    representative = {row[0]: row[1] for row in result.relation("CC").rows}
    edges_out = {(r[0], r[1]) for r in result.relation("ECC").rows}
    return Condensation(representative, edges_out)


def extract_taxonomy(triples: RelationLike, labels: RelationLike,
                     items_of_interest, depth: int = -1) -> TaxonomyResult:
    """Accumulate ancestor edges of the items of interest, stopping when the
    root-edge count reaches exactly one (taken literally: one edge whose
    source has no incoming edge)."""
    t_rel = _relation("T", triples, 3)
    l_rel = _relation("L", labels, 1, has_value=True)
    config = EvalConfig(keep_history=True,
                        max_iters_backstop=None if depth == -1 else depth)
    result = evaluate(_program("taxonomy"),
                      {"T": t_rel, "L": l_rel,
                       "ItemOfInterest": _unary("ItemOfInterest", items_of_interest)},
                      config)
    key = result.clique_key("E")
    trace = []
    for step in result.history[key]:
        roots = step.get("NumRoots")
        trace.append(roots.rows[0][0] if roots is not None and len(roots) else 0)
    return TaxonomyResult(result.relation("E"), result.terminations[key],
                          trace, result.iterations[key])
