"""PCF: a simply typed λ-calculus with numbers, conditionals, and a
fixpoint constant, plus its compilation into the linear calculus.

The reference semantics is big-step call-by-name over closed terms; a
value is a number, an abstraction, a constant, or a partially applied
conditional. The compiler is type-directed: binders carry annotations,
numbers become Peano numerals, the constants map to the recursor
encodings, and free variables of the nonlinear source are linearised
afterwards by bracket abstraction (`close_var`), which splits shared
variables with a duplicator and erases nothing — discarded binders are
handled at the λ-clause itself.

`Succ` compiles to a recursor, not to λx.S x: S does not reduce under
itself, so the literal abstraction would turn divergent arguments into
values and change what terminates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parser import ParseError, Token, lex
from .reduction import FuelExhausted
from .stdlib import cond_enc, dup, erase_term, fix, fst_enc, identity, snd_enc
from .terms import (App, ContractViolation, Lam, LetPair, Pair, Rec, Suc,
                    Term, Var, Zero, fresh_name, numeral, rename)
from .types import LinType, Lolli, NAT, TypingError


# ---------------------------------------------------------------- types

class PcfType:
    pass


@dataclass(frozen=True)
class PNat(PcfType):
    pass


@dataclass(frozen=True)
class Arrow(PcfType):
    dom: PcfType
    cod: PcfType


PNAT = PNat()


def pcf_type_pretty(a: PcfType, level: int = 0) -> str:
    if isinstance(a, PNat):
        return "Nat"
    s = f"{pcf_type_pretty(a.dom, 1)} -> {pcf_type_pretty(a.cod, 0)}"
    return f"({s})" if level > 0 else s


# ---------------------------------------------------------------- terms

class PcfTerm:
    pass


@dataclass(frozen=True)
class NumConst(PcfTerm):
    n: int


@dataclass(frozen=True)
class Succ(PcfTerm):
    pass


@dataclass(frozen=True)
class Pred(PcfTerm):
    pass


@dataclass(frozen=True)
class IsZero(PcfTerm):
    pass


@dataclass(frozen=True)
class Cond(PcfTerm):
    a: PcfType


@dataclass(frozen=True)
class YComb(PcfTerm):
    a: PcfType


@dataclass(frozen=True)
class PVar(PcfTerm):
    name: str


@dataclass(frozen=True)
class PLam(PcfTerm):
    binder: str
    annot: PcfType
    body: PcfTerm


@dataclass(frozen=True)
class PApp(PcfTerm):
    fun: PcfTerm
    arg: PcfTerm


def pcf_fv(t: PcfTerm) -> frozenset[str]:
    out: set[str] = set()
    stack = [(t, frozenset())]
    while stack:
        cur, bound = stack.pop()
        match cur:
            case PVar(name=n):
                if n not in bound:
                    out.add(n)
            case PLam(binder=b, body=u):
                stack.append((u, bound | {b}))
            case PApp(fun=f, arg=a):
                stack.append((f, bound))
                stack.append((a, bound))
            case _:
                pass
    return frozenset(out)


def pcf_pretty(t: PcfTerm, level: int = 0) -> str:
    match t:
        case NumConst(n=n):
            return str(n)
        case Succ():
            return "succ"
        case Pred():
            return "pred"
        case IsZero():
            return "iszero"
        case Cond(a=a):
            return f"cond[{pcf_type_pretty(a)}]"
        case YComb(a=a):
            return f"Y[{pcf_type_pretty(a)}]"
        case PVar(name=n):
            return n
        case PLam(binder=b, annot=a, body=u):
            s = f"fun {b} : {pcf_type_pretty(a)} . {pcf_pretty(u, 0)}"
            return f"({s})" if level > 0 else s
        case PApp(fun=f, arg=u):
            s = f"{pcf_pretty(f, 1)} {pcf_pretty(u, 2)}"
            return f"({s})" if level > 1 else s
    raise ContractViolation(f"not a PCF term: {t!r}")


# --------------------------------------------------------------- typing

class PcfTypeError(TypingError):
    pass


def pcf_check(t: PcfTerm, env: dict[str, PcfType]) -> PcfType:
    """Simple types with annotated binders; iszero lands in Nat (0/1)."""
    match t:
        case NumConst():
            return PNAT
        case Succ() | Pred() | IsZero():
            return Arrow(PNAT, PNAT)
        case Cond(a=a):
            return Arrow(PNAT, Arrow(a, Arrow(a, a)))
        case YComb(a=a):
            return Arrow(Arrow(a, a), a)
        case PVar(name=n):
            if n not in env:
                raise PcfTypeError(f"unbound variable {n}")
            return env[n]
        case PLam(binder=b, annot=a, body=u):
            return Arrow(a, pcf_check(u, {**env, b: a}))
        case PApp(fun=f, arg=u):
            tf = pcf_check(f, env)
            if not isinstance(tf, Arrow):
                raise PcfTypeError(
                    f"applied a non-function: {pcf_pretty(f)} "
                    f"has type {pcf_type_pretty(tf)}")
            tu = pcf_check(u, env)
            if tu != tf.dom:
                raise PcfTypeError(
                    f"in {pcf_pretty(t)}: argument has type "
                    f"{pcf_type_pretty(tu)}, expected {pcf_type_pretty(tf.dom)}")
            return tf.cod
    raise ContractViolation(f"not a PCF term: {t!r}")


# ----------------------------------------------------------- evaluation

def pcf_is_value(t: PcfTerm) -> bool:
    """Numbers, abstractions, constants, partially applied conditionals."""
    match t:
        case NumConst() | PLam() | Succ() | Pred() | IsZero() | Cond() | YComb():
            return True
        case PApp(fun=Cond()):
            return True
        case PApp(fun=PApp(fun=Cond())):
            return True
    return False


def pcf_subst(t: PcfTerm, x: str, s: PcfTerm) -> PcfTerm:
    # closed payloads only, so no capture is possible
    if pcf_fv(s):
        raise ContractViolation(
            f"substitution payload is open: free {sorted(pcf_fv(s))}")
    def go(u: PcfTerm) -> PcfTerm:
        match u:
            case PVar(name=n):
                return s if n == x else u
            case PLam(binder=b, annot=a, body=v):
                return u if b == x else PLam(b, a, go(v))
            case PApp(fun=f, arg=v):
                return PApp(go(f), go(v))
            case _:
                return u
    return go(t)


class _Fuel:
    __slots__ = ("remaining",)

    def __init__(self, remaining: int):
        self.remaining = remaining

    def tick(self):
        if self.remaining == 0:
            raise _OutOfFuel()
        self.remaining -= 1


class _OutOfFuel(Exception):
    pass


def _num_of(v: PcfTerm, who: str) -> int:
    if not isinstance(v, NumConst):
        raise ContractViolation(f"{who} applied to a non-number value")
    return v.n


def _peval(t: PcfTerm, fuel: _Fuel) -> PcfTerm:
    while True:
        if pcf_is_value(t):
            fuel.tick()
            return t
        match t:
            case PApp(fun=PApp(fun=PApp(fun=Cond(), arg=c), arg=u), arg=v):
                n = _num_of(_peval(c, fuel), "cond")
                fuel.tick()
                t = u if n == 0 else v
            case PApp(fun=Succ(), arg=u):
                n = _num_of(_peval(u, fuel), "succ")
                fuel.tick()
                return NumConst(n + 1)
            case PApp(fun=Pred(), arg=u):
                n = _num_of(_peval(u, fuel), "pred")
                fuel.tick()
                return NumConst(max(n - 1, 0))
            case PApp(fun=IsZero(), arg=u):
                n = _num_of(_peval(u, fuel), "iszero")
                fuel.tick()
                return NumConst(0 if n == 0 else 1)
            case PApp(fun=PLam(binder=b, body=body), arg=u):
                fuel.tick()
                t = pcf_subst(body, b, u)
            case PApp(fun=YComb() as y, arg=f):
                fuel.tick()
                t = PApp(f, PApp(y, f))
            case PApp(fun=s, arg=u) if not pcf_is_value(s):
                sv = _peval(s, fuel)
                fuel.tick()
                t = PApp(sv, u)
            case PApp(fun=s):
                raise ContractViolation(
                    f"applied a non-function value: {pcf_pretty(s)}")
            case PVar(name=n):
                raise ContractViolation(f"input is open: free variable {n}")
            case _:
                raise ContractViolation(f"not a PCF term: {t!r}")


def pcf_eval(t: PcfTerm, fuel: int) -> PcfTerm | FuelExhausted:
    """Big-step CBN value of a closed well-typed term, fueled per rule."""
    if pcf_fv(t):
        raise ContractViolation(f"input is open: free {sorted(pcf_fv(t))}")
    try:
        return _peval(t, _Fuel(fuel))
    except _OutOfFuel:
        return FuelExhausted(t)


# ----------------------------------------------------------- compilation

def type_trans(a: PcfType) -> LinType:
    if isinstance(a, PNat):
        return NAT
    return Lolli(type_trans(a.dom), type_trans(a.cod))


def env_trans(env: list[tuple[str, PcfType]]) -> list[tuple[str, LinType]]:
    return [(x, type_trans(a)) for x, a in env]


def _all_names(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var):
            out.add(cur.name)
        elif isinstance(cur, Lam):
            out.add(cur.binder)
            stack.append(cur.body)
        elif isinstance(cur, LetPair):
            out.add(cur.x)
            out.add(cur.y)
            stack.append(cur.scrut)
            stack.append(cur.body)
        else:
            stack.extend(c for c in _kids(cur))
    return out


def _kids(t: Term) -> tuple[Term, ...]:
    match t:
        case Suc(body=b):
            return (b,)
        case App(fun=f, arg=a):
            return (f, a)
        case Pair(left=l, right=r):
            return (l, r)
        case Rec(scrut=s, base=u, step=v, update=w):
            return (s, u, v, w)
        case _:
            return ()


def close_var(x: str, t: Term, a: LinType) -> Term:
    """Bracket abstraction [x]t: rebuild t so that x (of type a) occurs
    free exactly once, splitting shared uses with a duplicator.

    Defined on the image of compilation — variables, S, λ, application —
    plus descent into other constructors when x sits in exactly one
    part, which is where compiled code can put it. Two parts sharing x
    outside an application cannot come from the compiler and fault.
    """
    if x not in t.fv:
        raise ContractViolation(f"{x} is not free in the term")
    match t:
        case Var():
            return t
        case Suc(body=u):
            return Suc(close_var(x, u, a))
        case Lam(binder=b, body=u):
            return Lam(b, close_var(x, u, a))
        case App(fun=s, arg=u):
            in_s, in_u = x in s.fv, x in u.fv
            if in_s and in_u:
                left = close_var(x, s, a)
                right = close_var(x, u, a)
                names = _all_names(left) | _all_names(right) | {x}
                x1 = fresh_name(names, x + "1")
                x2 = fresh_name(names | {x1}, x + "2")
                return LetPair(App(dup(a), Var(x)), x1, x2,
                               App(rename(left, x, x1), rename(right, x, x2)))
            if in_s:
                return App(close_var(x, s, a), u)
            return App(s, close_var(x, u, a))
        case Pair(left=l, right=r):
            if x in l.fv and x in r.fv:
                raise ContractViolation(f"{x} shared across a pair")
            if x in l.fv:
                return Pair(close_var(x, l, a), r)
            return Pair(l, close_var(x, r, a))
        case LetPair(scrut=s, x=p, y=q, body=b):
            in_b = x in b.fv and x not in (p, q)
            if x in s.fv and in_b:
                raise ContractViolation(f"{x} shared across a let")
            if in_b:
                return LetPair(s, p, q, close_var(x, b, a))
            return LetPair(close_var(x, s, a), p, q, b)
        case Rec(scrut=s, base=u, step=v, update=w):
            parts = [s, u, v, w]
            hits = [i for i, part in enumerate(parts) if x in part.fv]
            if len(hits) != 1:
                raise ContractViolation(f"{x} shared across a recursor")
            parts[hits[0]] = close_var(x, parts[hits[0]], a)
            return Rec(*parts)
    raise ContractViolation(
        f"cannot abstract {x} out of a {type(t).__name__} node")


def compile_body(t: PcfTerm, tenv: dict[str, PcfType]) -> Term:
    """The type-directed clauses; output is nonlinear in the free
    variables of t (same set, possibly many occurrences each)."""
    match t:
        case NumConst(n=n):
            return numeral(n)
        case Succ():
            return Lam("n", Rec(Pair(Var("n"), Zero()), Suc(Zero()),
                                Lam("x", Suc(Var("x"))), identity()))
        case Pred():
            step = Lam("x", LetPair(
                App(dup(NAT), App(snd_enc(), Var("x"))), "t", "u",
                Pair(Var("t"), Suc(Var("u")))))
            return Lam("n", App(fst_enc(), Rec(
                Pair(Var("n"), Zero()), Pair(Zero(), Zero()), step,
                identity())))
        case IsZero():
            step = Lam("x", App(dup(NAT), App(snd_enc(), Var("x"))))
            return Lam("n", App(fst_enc(), Rec(
                Pair(Var("n"), Zero()), Pair(Zero(), Suc(Zero())), step,
                identity())))
        case Cond(a=a):
            return cond_enc(type_trans(a))
        case YComb(a=a):
            return fix(type_trans(a))
        case PVar(name=n):
            return Var(n)
        case PApp(fun=f, arg=u):
            return App(compile_body(f, tenv), compile_body(u, tenv))
        case PLam(binder=x, annot=a, body=b):
            ta = type_trans(a)
            if x in pcf_fv(b):
                inner = compile_body(b, {**tenv, x: a})
                return Lam(x, close_var(x, inner, ta))
            # discarded binder: consume x with erasers under a recursor
            # on zero, so a divergent argument still never runs
            tb = type_trans(pcf_check(b, {**tenv, x: a}))
            y = fresh_name({x}, "y")
            eraser = Lam(y, erase_term(
                App(erase_term(Var(y), Lolli(tb, tb)), Var(x)), ta))
            wrap = Rec(Pair(Zero(), Zero()), identity(), eraser, identity())
            return Lam(x, App(wrap, compile_body(b, tenv)))
    raise ContractViolation(f"not a PCF term: {t!r}")


def compile_pcf(t: PcfTerm, env: list[tuple[str, PcfType]]) -> Term:
    """Bracket abstraction folded over compile_body, innermost variable
    first; the result keeps fv(t) free, each exactly once."""
    tenv = dict(env)
    pcf_check(t, tenv)
    body = compile_body(t, tenv)
    for name, a in reversed(env):
        if name in body.fv:
            body = close_var(name, body, type_trans(a))
    return body


# ---------------------------------------------------------------- syntax

_RESERVED = {"fun", "succ", "pred", "iszero", "cond", "Y", "Nat"}


class _PcfParser:
    def __init__(self, toks: list[Token], resolve=None):
        self.toks = toks
        self.pos = 0
        self.resolve = resolve

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found {tok.text!r}",
                             tok.line, tok.col)
        return tok

    def term(self) -> PcfTerm:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "fun":
            self.next()
            binder = self.expect("ident", "a binder name")
            if binder.text in _RESERVED:
                raise ParseError(f"{binder.text!r} is reserved",
                                 binder.line, binder.col)
            self.expect("colon", "':'")
            annot = self.type_()
            self.expect("dot", "'.'")
            return PLam(binder.text, annot, self.term())
        t = self.atom()
        while self._starts_atom():
            t = PApp(t, self.atom())
        return t

    def _starts_atom(self) -> bool:
        tok = self.peek()
        if tok.kind in ("nat", "lparen", "at"):
            return True
        return tok.kind == "ident" and tok.text not in ("fun", "Nat")

    def atom(self) -> PcfTerm:
        tok = self.next()
        if tok.kind == "nat":
            return NumConst(int(tok.text))
        if tok.kind == "lparen":
            t = self.term()
            self.expect("rparen", "')'")
            return t
        if tok.kind == "at":
            name = self.expect("ident", "a definition name")
            t = self.resolve(name.text) if self.resolve else None
            if t is None:
                raise ParseError(f"unknown reference @{name.text}",
                                 name.line, name.col)
            return t
        if tok.kind == "ident":
            if tok.text == "succ":
                return Succ()
            if tok.text == "pred":
                return Pred()
            if tok.text == "iszero":
                return IsZero()
            if tok.text in ("cond", "Y"):
                self.expect("lbracket", "'[' with a type argument")
                a = self.type_()
                self.expect("rbracket", "']'")
                return Cond(a) if tok.text == "cond" else YComb(a)
            if tok.text in _RESERVED:
                raise ParseError(f"{tok.text!r} cannot appear here",
                                 tok.line, tok.col)
            return PVar(tok.text)
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)

    def type_(self) -> PcfType:
        left = self.type_atom()
        if self.peek().kind == "arrow":
            self.next()
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> PcfType:
        tok = self.next()
        if tok.kind == "ident" and tok.text == "Nat":
            return PNAT
        if tok.kind == "lparen":
            a = self.type_()
            self.expect("rparen", "')'")
            return a
        raise ParseError(f"expected a type, found {tok.text!r}",
                         tok.line, tok.col)


def parse_pcf(text: str, resolve=None) -> PcfTerm:
    p = _PcfParser(lex(text), resolve)
    t = p.term()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected {tok.text!r} after the term",
                         tok.line, tok.col)
    return t


def parse_pcf_defs(text: str, resolve=None) \
        -> tuple[dict[str, PcfTerm], PcfTerm]:
    """A file of `name = term;` definitions (the last one is the
    program) or a single bare term. `@name` resolves against earlier
    definitions first, then the caller's hook."""
    defs: dict[str, PcfTerm] = {}

    def chained(name: str) -> PcfTerm | None:
        if name in defs:
            return defs[name]
        return resolve(name) if resolve else None

    p = _PcfParser(lex(text), chained)
    first = p.peek()
    is_defs = (first.kind == "ident" and first.text not in _RESERVED
               and p.toks[p.pos + 1].kind == "eq")
    if not is_defs:
        t = p.term()
        tok = p.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {tok.text!r} after the term",
                             tok.line, tok.col)
        return {}, t

    last: PcfTerm | None = None
    while p.peek().kind != "eof":
        name = p.expect("ident", "a definition name")
        if name.text in defs:
            raise ParseError(f"duplicate definition {name.text!r}",
                             name.line, name.col)
        p.expect("eq", "'='")
        body = p.term()
        defs[name.text] = body
        last = body
        if p.peek().kind == "semi":
            p.next()
        elif p.peek().kind != "eof":
            tok = p.peek()
            raise ParseError(f"expected ';', found {tok.text!r}",
                             tok.line, tok.col)
    if last is None:
        raise ParseError("empty file", 1, 1)
    return defs, last
