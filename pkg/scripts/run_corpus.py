#!/usr/bin/env python3
"""Run every shipped transformation on small demo graphs and print results.

Usage: python scripts/run_corpus.py
"""

from gtlog import evaluate, parse_program
from gtlog.relation import Relation
from gtlog.stdlib import program_text
from gtlog.values import display

DEMOS = {
    "two_hop": {"E": [(1, 2), (2, 3), (3, 4)]},
    "message_passing": {"E": [(0, 1), (1, 2), (2, 3)], "M0": [(0,)]},
    "distances": {"E": [(0, 1), (1, 2), (0, 2), (2, 3)],
                  "Start": Relation("Start", 0, has_value=True, rows=[(0,)])},
    "win_move": {"Move": [(1, 2), (2, 3), (3, 1), (1, 4), (5, 6), (6, 5)]},
    "earliest_arrival": {"E": [("a", "b", 0, 10), ("b", "c", 5, 6),
                               ("a", "c", 8, 9)],
                         "Start": Relation("Start", 0, has_value=True,
                                           rows=[("a",)])},
    "transitive_reduction": {"E": [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)]},
    "condensation": {"E": [(1, 2), (2, 1), (2, 3), (3, 4), (4, 3)],
                     "Node": [(1,), (2,), (3,), (4,)]},
    "taxonomy": {"T": [("human", "P171", "hominid"),
                       ("pigeon", "P171", "bird"),
                       ("hominid", "P171", "mammal"),
                       ("mammal", "P171", "animal"),
                       ("bird", "P171", "animal")],
                 "L": Relation("L", 1, has_value=True, rows=[
                     (n, n.title()) for n in
                     ("human", "pigeon", "hominid", "bird", "mammal", "animal")]),
                 "ItemOfInterest": [("human",), ("pigeon",)]},
}


def main():
    for name, rels in DEMOS.items():
        print(f"== {name} ==")
        result = evaluate(parse_program(program_text(name)), rels)
        derived = sorted(n for n in result.snapshot.relations if n not in rels)
        for rel_name in derived:
            rel = result.relation(rel_name)
            rows = ", ".join("(" + ", ".join(display(v) for v in row) + ")"
                             for row in rel.rows)
            print(f"  {rel_name}: {rows if rows else '(empty)'}")
        for key, term in result.terminations.items():
            print(f"  clique {{{', '.join(key)}}}: {result.iterations[key]} "
                  f"iterations, {term}")
        print()


if __name__ == "__main__":
    main()
