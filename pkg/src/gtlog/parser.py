"""Lexer and recursive-descent parser for gtlog program text.

Precedence, loosest to tightest: `,` (conjunction), `|` (disjunction),
comparisons, additive, multiplicative, unary minus. `a => b` is accepted
inside parentheses and rewritten while parsing to ``~(a, ~b)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast_nodes as A
from .errors import GtlogSyntaxError

_PUNCT = [":-", "=>", "++", "+=", "!=", "<=", ">=",
          "(", ")", "[", "]", ",", ";", ":", "?", "~", "|", "@",
          "=", "<", ">", "+", "-", "*", "/"]
_KEYWORDS = {"in", "nil", "true", "false", "distinct"}


@dataclass
class Token:
    kind: str  # NAME, VAR, NUMBER, STRING, EOF, a keyword, or a punct lexeme
    value: object
    line: int
    col: int


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _peek(self, off: int = 0) -> str:
        p = self.pos + off
        return self.text[p] if p < len(self.text) else ""

    def _advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _error(self, msg: str) -> GtlogSyntaxError:
        return GtlogSyntaxError(msg, self.line, self.col, self._peek())

    def tokens(self) -> list[Token]:
        out = []
        while True:
            while self._peek() and (self._peek() in " \t\r\n" or self._peek() == "#"):
                if self._peek() == "#":
                    while self._peek() and self._peek() != "\n":
                        self._advance()
                else:
                    self._advance()
            if not self._peek():
                out.append(Token("EOF", None, self.line, self.col))
                return out
            line, col = self.line, self.col
            ch = self._peek()
            if ch == '"':
                out.append(Token("STRING", self._string(), line, col))
            elif ch.isdigit():
                out.append(Token("NUMBER", self._number(), line, col))
            elif ch.isalpha():
                word = self._ident()
                if word in _KEYWORDS:
                    out.append(Token(word, word, line, col))
                elif word[0].isupper():
                    out.append(Token("NAME", word, line, col))
                else:
                    out.append(Token("VAR", word, line, col))
            else:
                for p in _PUNCT:
                    if self.text.startswith(p, self.pos):
                        for _ in p:
                            self._advance()
                        out.append(Token(p, p, line, col))
                        break
                else:
                    raise self._error(f"unexpected character {ch!r}")

    def _ident(self) -> str:
        start = self.pos
        while self._peek() and (self._peek().isalnum() or self._peek() == "_"):
            self._advance()
        return self.text[start:self.pos]

    def _number(self):
        start = self.pos
        while self._peek().isdigit():
            self._advance()
        if self._peek() == "." and self._peek(1).isdigit():
            self._advance()
            while self._peek().isdigit():
                self._advance()
            return float(self.text[start:self.pos])
        return int(self.text[start:self.pos])

    def _string(self) -> str:
        self._advance()  # opening quote
        parts = []
        escapes = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
        while True:
            if not self._peek():
                raise self._error("unterminated string")
            ch = self._advance()
            if ch == '"':
                return "".join(parts)
            if ch == "\\":
                nxt = self._advance() if self._peek() else ""
                parts.append(escapes.get(nxt, nxt))
            else:
                parts.append(ch)


_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
_ADD_OPS = ("+", "-", "++")
_MUL_OPS = ("*", "/")


class _ConjGroup:
    """Parenthesized conjunction; only legal under `~`, `=>` or spliced into a body."""

    def __init__(self, formulas):
        self.formulas = formulas


class Parser:
    def __init__(self, text: str):
        self.toks = Lexer(text).tokens()
        self.i = 0

    # ------------------------------------------------------------ helpers

    def peek(self, off: int = 0) -> Token:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.peek().kind == kind:
            return self.next()
        return None

    def expect(self, kind: str, what: str = "") -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what or kind}", tok)
        return self.next()

    def error(self, msg: str, tok: Token | None = None) -> GtlogSyntaxError:
        tok = tok or self.peek()
        shown = "end of input" if tok.kind == "EOF" else str(tok.value)
        return GtlogSyntaxError(msg, tok.line, tok.col, shown)

    # ------------------------------------------------------------ program

    def parse_program(self) -> A.Program:
        program = A.Program()
        while self.peek().kind != "EOF":
            if self.peek().kind == "@":
                program.directives.append(self.parse_directive())
            else:
                program.rules.append(self.parse_rule())
        return program

    def parse_directive(self) -> A.Directive:
        start = self.expect("@")
        kind = self.expect("NAME", "directive name").value
        if kind != "Recursive":
            raise self.error(f"unknown directive @{kind}")
        self.expect("(")
        target = self.expect("NAME", "predicate name").value
        self.expect(",")
        depth = self._parse_int_const()
        stop = None
        if self.accept(","):
            key = self.expect("VAR", "'stop'")
            if key.value != "stop":
                raise self.error("expected 'stop'", key)
            self.expect(":")
            stop = self.expect("NAME", "stop predicate").value
        self.expect(")")
        self.expect(";")
        return A.Directive(kind, target, depth, stop, span=(start.line, start.col))

    def _parse_int_const(self) -> int:
        neg = self.accept("-") is not None
        tok = self.expect("NUMBER", "integer")
        if not isinstance(tok.value, int):
            raise self.error("expected integer", tok)
        return -tok.value if neg else tok.value

    # -------------------------------------------------------------- rules

    def parse_rule(self) -> A.Rule:
        start = self.peek()
        head_pred, head_args = self._parse_head_literal()
        rule = A.Rule(head_pred, head_args, span=(start.line, start.col))
        if self.accept(","):
            pred2, args2 = self._parse_head_literal()
            rule.multi_head = (pred2, args2)
        while True:
            if self.accept("distinct"):
                if rule.distinct:
                    raise self.error("duplicate distinct")
                rule.distinct = True
                continue
            value = self._maybe_value_suffix()
            if value is not None:
                if rule.head_value is not None:
                    raise self.error("duplicate aggregation suffix")
                if rule.multi_head is not None:
                    raise self.error("aggregation is not allowed with multiple heads")
                rule.head_value = value
                continue
            break
        if self.accept(":-"):
            rule.body = self._parse_conjunction()
        self.expect(";")
        return rule

    def _parse_head_literal(self):
        pred = self.expect("NAME", "predicate name").value
        self.expect("(")
        args: list[A.HeadArg] = []
        seen_named = False
        if self.peek().kind != ")":
            while True:
                arg = self._parse_head_arg(len(args))
                if isinstance(arg.name, int) and seen_named:
                    raise self.error("positional argument after named argument")
                seen_named = seen_named or isinstance(arg.name, str)
                args.append(arg)
                if not self.accept(","):
                    break
        self.expect(")")
        return pred, args

    def _parse_head_arg(self, index: int) -> A.HeadArg:
        tok = self.peek()
        if tok.kind == "VAR" and self.peek(1).kind == ":":
            self.next(), self.next()
            return A.HeadArg(tok.value, self.parse_term())
        if tok.kind == "VAR" and self.peek(1).kind == "?":
            self.next(), self.next()
            agg = self._expect_aggregator()
            return A.HeadArg(tok.value, self.parse_term(), agg=agg, optional_marker=True)
        return A.HeadArg(index, self.parse_term())

    def _expect_aggregator(self) -> str:
        tok = self.peek()
        if tok.kind == "NAME" and tok.value in ("Min", "Max") and self.peek(1).kind == "=":
            self.next(), self.next()
            return A.MIN if tok.value == "Min" else A.MAX
        if tok.kind == "+=":
            self.next()
            return A.SUM
        raise self.error("expected aggregator (Min=, Max= or +=)")

    def _maybe_value_suffix(self) -> A.HeadArg | None:
        tok = self.peek()
        if tok.kind == "NAME" and tok.value in ("Min", "Max") and self.peek(1).kind == "=":
            agg = self._expect_aggregator()
            return A.HeadArg("value", self.parse_term(), agg=agg)
        if tok.kind == "+=":
            self.next()
            return A.HeadArg("value", self.parse_term(), agg=A.SUM)
        if tok.kind == "=":
            self.next()
            return A.HeadArg("value", self.parse_term(), agg=A.UNIQUE)
        return None

    # ------------------------------------------------------------ formulas

    def _parse_conjunction(self) -> list:
        formulas: list = []
        while True:
            item = self._parse_disjunct()
            if isinstance(item, _ConjGroup):
                formulas.extend(item.formulas)
            else:
                formulas.append(item)
            if not self.accept(","):
                return formulas

    def _parse_disjunct(self):
        first = self._parse_unit()
        if self.peek().kind != "|":
            return first
        branches = [first]
        while self.accept("|"):
            branches.append(self._parse_unit())
        for b in branches:
            if isinstance(b, _ConjGroup):
                raise self.error("parenthesized conjunction cannot be a disjunction branch")
        return A.Disjunction(branches)

    def _parse_unit(self):
        if self.accept("~"):
            inner = self._parse_unit()
            if isinstance(inner, _ConjGroup):
                return A.NegatedConj(inner.formulas)
            return A.NegatedConj([inner])
        if self.peek().kind == "(":
            saved = self.i
            try:
                return self._parse_group()
            except GtlogSyntaxError:
                # Could be a parenthesized term starting a comparison.
                self.i = saved
                return self._parse_atom_formula()
        return self._parse_atom_formula()

    def _parse_group(self):
        self.expect("(")
        antecedent = self._parse_conjunction()
        if self.accept("=>"):
            consequent = self._parse_conjunction()
            self.expect(")")
            return A.NegatedConj(list(antecedent) + [A.NegatedConj(consequent)])
        self.expect(")")
        if len(antecedent) == 1:
            return antecedent[0]
        return _ConjGroup(antecedent)

    def _parse_atom_formula(self):
        tok = self.peek()
        # `P = nil` nil-check on a bare predicate name.
        if tok.kind == "NAME" and self.peek(1).kind == "=" and self.peek(2).kind == "nil":
            self.next(), self.next(), self.next()
            return A.NilCheck(tok.value)
        if tok.kind == "NAME" and self.peek(1).kind == "(":
            pred, pos_args, named_args = self._parse_callable()
            nxt = self.peek().kind
            if nxt in _CMP_OPS or nxt in _ADD_OPS or nxt in _MUL_OPS or nxt == "in":
                if named_args:
                    raise self.error("named arguments are not allowed in expressions")
                seed = self._term_for_call(pred, pos_args)
                term = self._continue_term(seed)
                return self._finish_comparison(term)
            return A.Literal(pred, pos_args, named_args)
        term = self.parse_term()
        return self._finish_comparison(term)

    def _finish_comparison(self, left):
        tok = self.peek()
        if tok.kind in _CMP_OPS:
            self.next()
            return A.Compare(left, tok.kind, self.parse_term())
        if tok.kind == "in":
            self.next()
            return A.In(left, self.parse_term())
        raise self.error("expected comparison or 'in'")

    def _parse_callable(self):
        pred = self.expect("NAME").value
        self.expect("(")
        pos_args: list = []
        named: list = []
        if self.peek().kind != ")":
            while True:
                if self.peek().kind == "VAR" and self.peek(1).kind == ":":
                    name = self.next().value
                    self.next()
                    named.append((name, self.parse_term()))
                else:
                    if named:
                        raise self.error("positional argument after named argument")
                    pos_args.append(self.parse_term())
                if not self.accept(","):
                    break
        self.expect(")")
        return pred, pos_args, named

    # --------------------------------------------------------------- terms

    def _term_for_call(self, name: str, args):
        if name in A.BUILTIN_NAMES:
            return A.BuiltinCall(name, args)
        return A.FunctionalCall(name, args)

    def parse_term(self):
        return self._continue_term(self._parse_multiplicative())

    def _continue_term(self, left):
        while True:
            kind = self.peek().kind
            if kind in _MUL_OPS:
                self.next()
                left = A.BuiltinCall(kind, [left, self._parse_unary()])
            elif kind in _ADD_OPS:
                self.next()
                left = A.BuiltinCall(kind, [left, self._parse_multiplicative()])
            else:
                return left

    def _parse_multiplicative(self):
        left = self._parse_unary()
        while self.peek().kind in _MUL_OPS:
            op = self.next().kind
            left = A.BuiltinCall(op, [left, self._parse_unary()])
        return left

    def _parse_unary(self):
        if self.accept("-"):
            inner = self._parse_unary()
            if isinstance(inner, A.Constant) and isinstance(inner.value, (int, float)) \
                    and not isinstance(inner.value, bool):
                return A.Constant(-inner.value)
            return A.BuiltinCall("neg", [inner])
        return self._parse_primary()

    def _parse_primary(self):
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return A.Constant(tok.value)
        if tok.kind == "STRING":
            self.next()
            return A.Constant(tok.value)
        if tok.kind == "true":
            self.next()
            return A.Constant(True)
        if tok.kind == "false":
            self.next()
            return A.Constant(False)
        if tok.kind == "nil":
            self.next()
            return A.Constant(None)
        if tok.kind == "VAR":
            self.next()
            return A.Variable(tok.value)
        if tok.kind == "NAME":
            if self.peek(1).kind != "(":
                raise self.error("predicate in expression position needs an argument list")
            pred, args, named = self._parse_callable()
            if named:
                raise self.error("named arguments are not allowed in expressions")
            return self._term_for_call(pred, args)
        if tok.kind == "[":
            self.next()
            items = []
            if self.peek().kind != "]":
                while True:
                    items.append(self.parse_term())
                    if not self.accept(","):
                        break
            self.expect("]")
            return A.ListLiteral(items)
        if tok.kind == "(":
            self.next()
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise self.error("expected a term")


def parse_program(text: str) -> A.Program:
    """Parse program text; raises GtlogSyntaxError with line/column on bad input."""
    return Parser(text).parse_program()
