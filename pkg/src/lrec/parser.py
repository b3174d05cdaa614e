"""Concrete syntax: lexer, term parser, type parser.

One token stream serves both calculi and the type language. The parser
freshens binders after building the tree (so input may reuse names) and
then rejects anything that is not syntactically linear.

References (`@name`, `@Y[Nat]`) are resolved during parsing through a
caller-supplied hook; a file of `name = term;` definitions resolves
against its own earlier definitions first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .terms import (App, Iter, Lam, LetPair, Min, Pair, Rec, Suc, Term, Var,
                    Violation, check_linear, freshen, mk_tuple, numeral)
from .types import LinType, Lolli, NAT, Tensor


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


class LinearityError(Exception):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_PUNCT = {
    "\\": "lambda", "λ": "lambda", ".": "dot", "<": "langle", ">": "rangle",
    ",": "comma", "(": "lparen", ")": "rparen", "=": "eq", ";": "semi",
    "@": "at", "[": "lbracket", "]": "rbracket", ":": "colon", "*": "star",
    "⊗": "star", "⊸": "lolli",
}


def _ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def lex(src: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if src.startswith("-o", i):
            out.append(Token("lolli", "-o", line, col))
            i += 2
            col += 2
            continue
        if src.startswith("->", i):
            out.append(Token("arrow", "->", line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT:
            out.append(Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            out.append(Token("nat", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if _ident_start(c):
            j = i
            while j < n and _ident_char(src[j]):
                j += 1
            out.append(Token("ident", src[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    out.append(Token("eof", "", line, col))
    return out


_KEYWORDS = {"let", "in", "rec", "iter", "min", "S"}

# resolver: (name, type-argument text or None) -> Term, or None when unknown
Resolver = Callable[[str, Optional[str]], Optional[Term]]


class _Parser:
    def __init__(self, tokens: list[Token], calculus: str, resolve: Resolver | None):
        if calculus not in ("lrec", "llcim"):
            raise ValueError(f"unknown calculus {calculus!r}")
        self.toks = tokens
        self.pos = 0
        self.calculus = calculus
        self.resolve = resolve

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            got = t.text or "end of input"
            raise ParseError(f"expected {what}, found {got!r}", t.line, t.col)
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "lambda":
            self.next()
            binders = [self.expect("ident", "a binder name").text]
            while self.peek().kind == "ident":
                binders.append(self.next().text)
            self.expect("dot", "'.'")
            body = self.term()
            for b in reversed(binders):
                if b in _KEYWORDS:
                    raise ParseError(f"{b!r} is a keyword", t.line, t.col)
                body = Lam(b, body)
            return body
        return self.app()

    def _starts_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("nat", "langle", "lparen", "at"):
            return True
        return t.kind == "ident" and t.text != "in"

    def app(self) -> Term:
        out = self.atom()
        while self._starts_atom():
            out = App(out, self.atom())
        return out

    def _call_args(self, keyword: str, count: int) -> list[Term]:
        self.expect("lparen", f"'(' after {keyword}")
        args = [self.term()]
        while self.peek().kind == "comma":
            self.next()
            args.append(self.term())
        self.expect("rparen", "')'")
        if len(args) != count:
            self.fail(f"{keyword} takes {count} arguments, found {len(args)}")
        return args

    def atom(self) -> Term:
        t = self.peek()
        if t.kind == "nat":
            self.next()
            return numeral(int(t.text))
        if t.kind == "lparen":
            self.next()
            inner = self.term()
            self.expect("rparen", "')'")
            return inner
        if t.kind == "langle":
            self.next()
            parts = [self.term()]
            while self.peek().kind == "comma":
                self.next()
                parts.append(self.term())
            self.expect("rangle", "'>'")
            if len(parts) < 2:
                raise ParseError("a pair needs at least two components",
                                 t.line, t.col)
            return mk_tuple(parts)
        if t.kind == "at":
            self.next()
            name = self.expect("ident", "a reference name").text
            arg: str | None = None
            if self.peek().kind == "lbracket":
                self.next()
                pieces = []
                while self.peek().kind not in ("rbracket", "eof"):
                    pieces.append(self.next().text)
                self.expect("rbracket", "']'")
                arg = " ".join(pieces)
            term = self.resolve(name, arg) if self.resolve else None
            if term is None:
                shown = f"{name}[{arg}]" if arg is not None else name
                raise ParseError(f"unknown reference @{shown}", t.line, t.col)
            return term
        if t.kind == "ident":
            word = t.text
            if word == "S":
                self.next()
                return Suc(self.atom())
            if word == "let":
                self.next()
                self.expect("langle", "'<'")
                x = self.expect("ident", "a pattern variable").text
                self.expect("comma", "','")
                y = self.expect("ident", "a pattern variable").text
                self.expect("rangle", "'>'")
                self.expect("eq", "'='")
                scrut = self.term()
                kw = self.expect("ident", "'in'")
                if kw.text != "in":
                    raise ParseError(f"expected 'in', found {kw.text!r}",
                                     kw.line, kw.col)
                body = self.term()
                return LetPair(scrut, x, y, body)
            if word == "rec":
                if self.calculus != "lrec":
                    self.fail("rec is not part of this calculus")
                self.next()
                a = self._call_args("rec", 4)
                return Rec(a[0], a[1], a[2], a[3])
            if word == "iter":
                if self.calculus != "llcim":
                    self.fail("iter is not part of this calculus")
                self.next()
                a = self._call_args("iter", 3)
                return Iter(a[0], a[1], a[2])
            if word == "min":
                if self.calculus != "llcim":
                    self.fail("min is not part of this calculus")
                self.next()
                a = self._call_args("min", 3)
                return Min(a[0], a[1], a[2])
            if word == "in":
                self.fail("unexpected 'in'")
            self.next()
            return Var(word)
        self.fail("expected a term")
        raise AssertionError

    # -- types -------------------------------------------------------------

    def type_(self) -> LinType:
        left = self.type_prod()
        if self.peek().kind == "lolli":
            self.next()
            return Lolli(left, self.type_())
        return left

    def type_prod(self) -> LinType:
        left = self.type_atom()
        if self.peek().kind == "star":
            self.next()
            return Tensor(left, self.type_prod())
        return left

    def type_atom(self) -> LinType:
        t = self.peek()
        if t.kind == "lparen":
            self.next()
            inner = self.type_()
            self.expect("rparen", "')'")
            return inner
        if t.kind == "ident" and t.text == "Nat":
            self.next()
            return NAT
        self.fail("expected a type")
        raise AssertionError


def _finish(t: Term) -> Term:
    t = freshen(t)
    bad = check_linear(t)
    if bad:
        raise LinearityError(bad)
    return t


def parse(text: str, calculus: str = "lrec", resolve: Resolver | None = None) -> Term:
    """Parse one term. Binders are freshened; non-linear terms are rejected."""
    p = _Parser(lex(text), calculus, resolve)
    t = p.term()
    p.expect("eof", "end of input")
    return _finish(t)


def parse_type(text: str) -> LinType:
    p = _Parser(lex(text), "lrec", None)
    a = p.type_()
    p.expect("eof", "end of input")
    return a


def parse_defs(text: str, calculus: str = "lrec",
               resolve: Resolver | None = None) -> tuple[list[tuple[str, Term]], Term]:
    """Parse a definition file: `name = term;` entries, the last one being
    the program, or a single bare term. References resolve against earlier
    definitions before falling back to the caller's resolver."""
    local: dict[str, Term] = {}

    def chained(name: str, arg: str | None) -> Term | None:
        if arg is None and name in local:
            return local[name]
        return resolve(name, arg) if resolve else None

    p = _Parser(lex(text), calculus, chained)
    defs: list[tuple[str, Term]] = []
    if p.peek().kind == "ident" and p.peek(1).kind == "eq":
        while p.peek().kind != "eof":
            name = p.expect("ident", "a definition name").text
            p.expect("eq", "'='")
            body = _finish(p.term())
            if p.peek().kind == "semi":
                p.next()
            elif p.peek().kind != "eof":
                p.expect("semi", "';'")
            if name in local:
                tok = p.peek()
                raise ParseError(f"duplicate definition {name}", tok.line, tok.col)
            local[name] = body
            defs.append((name, body))
        return defs, defs[-1][1]
    t = _finish(p.term())
    p.expect("eof", "end of input")
    return [], t
