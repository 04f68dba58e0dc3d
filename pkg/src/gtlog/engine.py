"""Stratified, iterate-to-fixpoint evaluation of analyzed programs.

Strata are evaluated in dependency order; a recursive clique is iterated
with snapshot semantics: iteration k+1 of every clique predicate is
computed entirely from iteration k (nil-checks hold only at the first
step, when the clique predicates are still absent). Iteration stops on a
fixpoint, a nonempty stop predicate, a repeated snapshot (oscillation,
tracked by 64-bit content digests in SnapshotIterate mode) or the depth
cap. Monotone cliques whose recursive references are plain positive
literals are advanced semi-naively; results are identical to naive
recomputation by construction.
"""

from __future__ import annotations

import hashlib
import sys
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

from . import ast_nodes as A
from .analyzer import SNAPSHOT_ITERATE, AnalysisResult, CliqueInfo, analyze
from .compiler import DELTA_PREFIX, EXT_PREFIX, compile_program, compile_rule, delta_rules
from .errors import (ArityMismatch, EvalTimeout, FunctionalValueConflict,
                     GtlogError, UnknownPredicate)
from .executor import ExecContext, eval_plan
from .relation import Relation, Snapshot, paused_gc, relation_from_tuples
from .values import row_key

FIXPOINT = "Fixpoint"
STOP_PREDICATE = "StopPredicate"
DEPTH_CAP = "DepthCap"
OSCILLATION = "Oscillation"


@dataclass
class EvalConfig:
    default_depth: int = 32
    max_wall_time: Optional[float] = None
    trace: bool = False
    trace_sink: Optional[Callable[[str], None]] = None
    keep_history: bool = False
    max_iters_backstop: Optional[int] = None


@dataclass
class EvalResult:
    snapshot: Snapshot
    iterations: dict
    terminations: dict
    history: dict
    analysis: AnalysisResult

    def relation(self, predicate: str) -> Relation:
        rel = self.snapshot.get(predicate)
        if rel is None:
            raise UnknownPredicate(f"no relation named {predicate} in the result")
        return rel

    def clique_key(self, predicate: str) -> tuple:
        for key in self.iterations:
            if predicate in key:
                return key
        raise UnknownPredicate(f"{predicate} is not part of a recursive clique")


def query(result: EvalResult, predicate: str) -> Relation:
    return result.relation(predicate)


def _coerce_relation(name: str, value) -> Relation:
    if isinstance(value, Relation):
        return value
    rows = [tuple(r) for r in value]
    if not rows:
        raise GtlogError(
            f"cannot infer the shape of empty relation {name}; pass a Relation")
    return relation_from_tuples(name, rows)


def _digest(rels: Mapping[str, Relation]) -> bytes:
    h = hashlib.blake2b(digest_size=8)
    for name in sorted(rels):
        h.update(name.encode())
        h.update(b"\x00")
        for row in rels[name].rows:
            h.update(repr(row_key(row)).encode())
            h.update(b"\x01")
    return h.digest()


class _Engine:
    def __init__(self, analysis: AnalysisResult, extensional: dict, config: EvalConfig):
        self.analysis = analysis
        self.config = config
        self.plans = compile_program(analysis)
        self.relations: dict = {}
        self.computed: set = set()
        self.iterations: dict = {}
        self.terminations: dict = {}
        self.history: dict = {}
        self.start = time.monotonic()
        for name, rel in extensional.items():
            sig = analysis.signatures.get(name)
            if sig is not None and (sig.positional_arity != rel.num_positional
                                    or sig.has_functional_value != rel.has_value):
                raise ArityMismatch(
                    f"loaded relation {name} has shape "
                    f"{rel.num_positional}+value={rel.has_value}, the program "
                    f"expects {sig.positional_arity}+value={sig.has_functional_value}")
            if rel.has_value:
                keys = {row_key(r[:-1]) for r in rel.rows}
                if len(keys) != len(rel.rows):
                    dup = next(k for k in keys if sum(
                        1 for r in rel.rows if row_key(r[:-1]) == k) > 1)
                    vals = tuple(r[-1] for r in rel.rows if row_key(r[:-1]) == dup)
                    raise FunctionalValueConflict(name, dup, vals)
            if name in analysis.rules:
                self.relations[EXT_PREFIX + name] = rel
            else:
                self.relations[name] = rel
                self.computed.add(name)
        for name, sig in analysis.signatures.items():
            if sig.is_extensional and name not in extensional \
                    and name not in analysis.rules:
                raise UnknownPredicate(f"extensional relation {name} was not provided")

    # ------------------------------------------------------------ helpers

    def _check_time(self):
        limit = self.config.max_wall_time
        if limit is not None and time.monotonic() - self.start > limit:
            raise EvalTimeout(f"evaluation exceeded {limit} s")

    def _trace(self, line: str):
        if self.config.trace:
            sink = self.config.trace_sink or (lambda s: print(s, file=sys.stderr))
            sink(line)

    def _eval_pred(self, pred: str, ctx: ExecContext) -> Relation:
        sig = self.analysis.signatures[pred]
        rows = eval_plan(self.plans[pred].plan, ctx)
        return Relation(pred, sig.positional_arity, sig.named_attributes,
                        sig.has_functional_value, rows)

    def _empty(self, pred: str) -> Relation:
        sig = self.analysis.signatures[pred]
        return Relation(pred, sig.positional_arity, sig.named_attributes,
                        sig.has_functional_value, ())

    # -------------------------------------------------------------- driver

    def run(self) -> EvalResult:
        cliques = {c.preds: c for c in self.analysis.plan.recursive_cliques}
        for stratum in self.analysis.plan.strata:
            self._check_time()
            if all(p in self.computed for p in stratum):
                continue
            clique = cliques.get(stratum)
            if clique is not None:
                self._run_clique(clique)
            else:
                pred = stratum[0]
                if pred in self.plans:
                    ctx = ExecContext(self.relations)
                    self.relations[pred] = self._eval_pred(pred, ctx)
                self.computed.add(pred)
        final = {name: rel for name, rel in self.relations.items()
                 if not name.startswith("$")}
        return EvalResult(Snapshot(0, final), self.iterations, self.terminations,
                          self.history, self.analysis)

    # ------------------------------------------------------------- cliques

    def _effective_depth(self, clique: CliqueInfo) -> int:
        depth = (clique.directive.depth if clique.directive is not None
                 else self.config.default_depth)
        backstop = self.config.max_iters_backstop
        if backstop is not None:
            depth = backstop if depth == -1 else min(depth, backstop)
        return depth

    def _run_clique(self, clique: CliqueInfo):
        members = clique.preds
        key = members
        stop = (clique.directive.stop_predicate
                if clique.directive is not None else None)
        depth = self._effective_depth(clique)
        delta_plans = self._delta_plans(clique) if clique.semi_naive_ok else None

        history: list = []
        digests: set = set()
        prev: Optional[dict] = None
        prev_delta: Optional[dict] = None
        current: dict = {}
        aux_rels: dict = {}
        k = 0
        termination = DEPTH_CAP

        if depth == 0:
            current = {p: self._empty(p) for p in members}
            aux_rels = self._eval_aux(clique, {**self.relations, **current})
        else:
            while True:
                self._check_time()
                k += 1
                base = dict(self.relations)
                if prev is not None:
                    base.update(prev)
                first = prev is None
                ctx = ExecContext(base,
                                  allowed_absent=members if first else (),
                                  nil_true=members if first else ())
                new: dict = {}
                for p in sorted(members):
                    if delta_plans is not None and not first:
                        new[p] = self._semi_naive_step(p, prev, prev_delta,
                                                       delta_plans, ctx)
                    else:
                        new[p] = self._eval_pred(p, ctx)
                aux_rels = self._eval_aux(clique, {**self.relations, **new})
                for p in sorted(members):
                    self._trace(f"iter={k} pred={p} rows={len(new[p])}")
                for a, rel in aux_rels.items():
                    self._trace(f"iter={k} pred={a} rows={len(rel)}")
                if self.config.keep_history:
                    step = dict(new)
                    step.update(aux_rels)
                    history.append(step)
                if prev is not None and all(new[p] == prev[p] for p in members):
                    termination = FIXPOINT
                    current = new
                    break
                if stop is not None:
                    stop_rel = aux_rels.get(stop, new.get(stop))
                    if stop_rel is None:
                        stop_rel = self.relations.get(stop)
                    if stop_rel is not None and len(stop_rel) > 0:
                        termination = STOP_PREDICATE
                        current = new
                        break
                if clique.mode == SNAPSHOT_ITERATE:
                    dig = _digest(new)
                    if dig in digests:
                        termination = OSCILLATION
                        current = new
                        break
                    digests.add(dig)
                if depth != -1 and k >= depth:
                    termination = DEPTH_CAP
                    current = new
                    break
                if delta_plans is not None:
                    prev_delta = self._delta_of(new, prev)
                prev = new

        self.relations.update(current)
        self.relations.update(aux_rels)
        self.computed.update(members)
        self.computed.update(aux_rels)
        self.iterations[key] = k
        self.terminations[key] = termination
        if self.config.keep_history:
            self.history[key] = history

    def _eval_aux(self, clique: CliqueInfo, step_rels: dict) -> dict:
        out: dict = {}
        if not clique.stop_aux:
            return out
        rels = dict(step_rels)
        for a in clique.stop_aux:
            if a in self.plans:
                ctx = ExecContext(rels)
                out[a] = self._eval_pred(a, ctx)
                rels[a] = out[a]
        return out

    # ---------------------------------------------------------- semi-naive

    def _delta_plans(self, clique: CliqueInfo) -> dict:
        plans: dict = {}
        for p in clique.preds:
            variants = []
            for nr in self.analysis.rules.get(p, ()):
                for dnr in delta_rules(nr, set(clique.preds)):
                    variants.append(compile_rule(dnr, self.analysis.signatures))
            plans[p] = variants
        return plans

    def _delta_of(self, new: dict, prev: Optional[dict]) -> dict:
        out = {}
        for p, rel in new.items():
            if prev is None:
                out[p] = rel.rows
            else:
                old = {row_key(r) for r in prev[p].rows}
                out[p] = tuple(r for r in rel.rows if row_key(r) not in old)
        return out

    def _semi_naive_step(self, pred: str, prev: dict, prev_delta: dict,
                         delta_plans: dict, ctx: ExecContext) -> Relation:
        sig = self.analysis.signatures[pred]
        rows = list(prev[pred].rows)
        overlay = {}
        for m, delta in prev_delta.items():
            msig = self.analysis.signatures[m]
            overlay[DELTA_PREFIX + m] = Relation(
                DELTA_PREFIX + m, msig.positional_arity, msig.named_attributes,
                msig.has_functional_value, delta)
        ctx.overlays.append(overlay)
        try:
            for dplan in delta_plans[pred]:
                rows.extend(eval_plan(dplan, ctx))
        finally:
            ctx.overlays.pop()
        return Relation(pred, sig.positional_arity, sig.named_attributes,
                        sig.has_functional_value, rows)


def evaluate(program_or_analysis: Union[A.Program, AnalysisResult],
             extensional: Optional[Mapping] = None,
             config: Optional[EvalConfig] = None) -> EvalResult:
    """Evaluate a program against extensional relations.

    `extensional` maps names to Relations (or iterables of tuples for
    positional-only relations)."""
    config = config or EvalConfig()
    with paused_gc():
        ext = {name: _coerce_relation(name, rel)
               for name, rel in (extensional or {}).items()}
        if isinstance(program_or_analysis, AnalysisResult):
            analysis = program_or_analysis
        else:
            analysis = analyze(program_or_analysis, extensional=ext)
        return _Engine(analysis, ext, config).run()


def run_clique(clique: CliqueInfo, analysis: AnalysisResult, base: Snapshot,
               config: Optional[EvalConfig] = None):
    """Iterate one recursive clique from a base snapshot.

    Returns (snapshot, termination); the snapshot contains the base
    relations plus the clique predicates (and stop helpers) at their final
    iteration."""
    config = config or EvalConfig()
    engine = _Engine.__new__(_Engine)
    engine.analysis = analysis
    engine.config = config
    engine.plans = compile_program(analysis)
    engine.relations = dict(base.relations)
    engine.computed = set(base.relations)
    engine.iterations = {}
    engine.terminations = {}
    engine.history = {}
    engine.start = time.monotonic()
    engine._run_clique(clique)
    final = {name: rel for name, rel in engine.relations.items()
             if not name.startswith("$")}
    snap = Snapshot(engine.iterations[clique.preds], final)
    return snap, engine.terminations[clique.preds]
