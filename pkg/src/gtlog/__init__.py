"""gtlog: a Datalog-with-aggregation engine for graph transformations."""

from . import ast_nodes
from .analyzer import (MONOTONE, SNAPSHOT_ITERATE, AnalysisResult, CliqueInfo,
                       PredicateSignature, StratifiedPlan, analyze,
                       check_clique_semantics)
from .compiler import (PredicatePlan, compile_predicate, compile_program,
                       compile_rule, explain_plan)
from .engine import (DEPTH_CAP, FIXPOINT, OSCILLATION, STOP_PREDICATE,
                     EvalConfig, EvalResult, evaluate, query, run_clique)
from .errors import (AggregationConflict, AnalysisError, ArityMismatch,
                     CompileError, ConversionError, EvalError, EvalTimeout,
                     FunctionalValueConflict, GtlogError, GtlogSyntaxError,
                     InvalidInterval, IoError, KeyAbsent, MissingColumn,
                     NotADag, ParseError, RuntimeTypeError, TypeMismatch,
                     UnknownPredicate, UnsafeVariable)
from .graph_io import export_relation, load_edges, load_labels, load_relation_json, load_triples
from .parser import parse_program
from .ast_nodes import pretty_print
from .relation import Relation, Snapshot, lookup_functional, relation_from_tuples
from .render import RenderEdge, to_dot, to_json_graph, to_render_edges
from .stdlib import (ArrivalMap, Condensation, GameSolution, TaxonomyResult,
                     condense, earliest_arrival, extract_taxonomy,
                     message_passing, program_text, shortest_distances,
                     solve_win_move, transitive_closure, transitive_reduction,
                     two_hop_extend)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
