"""Core term representation for the linear calculus.

Terms are immutable trees. Every node caches its free-variable set at
construction, so the closedness tests that drive closed reduction are
set lookups rather than traversals. Linearity is *checkable*, not
enforced by constructors: ill-formed terms can be built (and reported
on) by check_linear, but the parser and every engine operation only
produce terms for which check_linear returns no violations.

The same node classes serve both calculi: Rec belongs to the recursor
calculus, Iter and Min to the minimiser calculus. Engines guard the
constructor set they accept.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

# Deep chains of S constructors are the only tall structures around;
# most traversals peel them iteratively, the rest need headroom.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))

EMPTY: frozenset[str] = frozenset()


class ContractViolation(Exception):
    """A caller broke a documented precondition (a bug, not bad data)."""


class Term:
    # fv: cached free variables. nf/nfm: monotone "proved redex-free"
    # flags, one per rule set; reducibility is intrinsic to a subterm
    # under closed reduction, so the flag never needs invalidation.
    __slots__ = ("fv", "nf", "nfm")
    fv: frozenset[str]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {pretty(self)!r}>"


class Zero(Term):
    __slots__ = ()

    def __init__(self):
        self.fv = EMPTY


class Suc(Term):
    __slots__ = ("body",)

    def __init__(self, body: Term):
        self.body = body
        self.fv = body.fv


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.fv = frozenset((name,))


class App(Term):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Term, arg: Term):
        self.fun = fun
        self.arg = arg
        self.fv = fun.fv | arg.fv


class Lam(Term):
    __slots__ = ("binder", "body")

    def __init__(self, binder: str, body: Term):
        self.binder = binder
        self.body = body
        self.fv = body.fv - {binder}


class Pair(Term):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self.fv = left.fv | right.fv


class LetPair(Term):
    """let <x, y> = scrut in body"""

    __slots__ = ("scrut", "x", "y", "body")

    def __init__(self, scrut: Term, x: str, y: str, body: Term):
        self.scrut = scrut
        self.x = x
        self.y = y
        self.body = body
        self.fv = scrut.fv | (body.fv - {x, y})


class Rec(Term):
    """rec(scrut, base, step, update), the unbounded recursor."""

    __slots__ = ("scrut", "base", "step", "update")

    def __init__(self, scrut: Term, base: Term, step: Term, update: Term):
        self.scrut = scrut
        self.base = base
        self.step = step
        self.update = update
        self.fv = scrut.fv | base.fv | step.fv | update.fv


class Iter(Term):
    """iter(count, base, step), the bounded iterator (minimiser calculus)."""

    __slots__ = ("count", "base", "step")

    def __init__(self, count: Term, base: Term, step: Term):
        self.count = count
        self.base = base
        self.step = step
        self.fv = count.fv | base.fv | step.fv


class Min(Term):
    """min(scrut, counter, fn), the minimiser (minimiser calculus)."""

    __slots__ = ("scrut", "counter", "fn")

    def __init__(self, scrut: Term, counter: Term, fn: Term):
        self.scrut = scrut
        self.counter = counter
        self.fn = fn
        self.fv = scrut.fv | counter.fv | fn.fv


def free_vars(t: Term) -> frozenset[str]:
    return t.fv


def is_value(t: Term) -> bool:
    """Weak head normal forms: 0, S t, a lambda, or a pair."""
    return isinstance(t, (Zero, Suc, Lam, Pair))


def children(t: Term) -> tuple[Term, ...]:
    """Subterms in textual order (the leftmost-outermost descent order)."""
    match t:
        case Suc(body=b):
            return (b,)
        case App(fun=f, arg=a):
            return (f, a)
        case Lam(body=b):
            return (b,)
        case Pair(left=l, right=r):
            return (l, r)
        case LetPair(scrut=s, body=b):
            return (s, b)
        case Rec(scrut=s, base=u, step=v, update=w):
            return (s, u, v, w)
        case Iter(count=c, base=u, step=v):
            return (c, u, v)
        case Min(scrut=s, counter=u, fn=f):
            return (s, u, f)
        case _:
            return ()


# --------------------------------------------------------------------------
# linearity


@dataclass(frozen=True)
class Violation:
    path: str  # dot-separated child indices from the root, "" for the root
    constraint: str
    kind: str  # "shared" | "unused" | "dup-pattern"
    names: frozenset[str]

    def __str__(self) -> str:
        where = self.path if self.path else "root"
        return f"at {where}: {self.constraint}"


def _disjointness(parts: list[tuple[str, Term]], path: str, out: list[Violation]):
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            shared = parts[i][1].fv & parts[j][1].fv
            if shared:
                names = ", ".join(sorted(shared))
                out.append(Violation(
                    path,
                    f"variable(s) {names} occur in both {parts[i][0]} and {parts[j][0]}",
                    "shared", frozenset(shared),
                ))


def check_linear(t: Term) -> list[Violation]:
    """Every constraint of the term grammar, at every subterm.

    Returns the empty list when the term is syntactically linear.
    """
    out: list[Violation] = []
    work: list[tuple[Term, str]] = [(t, "")]
    while work:
        node, path = work.pop()
        match node:
            case Lam(binder=x, body=b):
                if x not in b.fv:
                    out.append(Violation(
                        path, f"binder {x} unused in the body", "unused", frozenset((x,))))
            case App(fun=f, arg=a):
                _disjointness([("operator", f), ("operand", a)], path, out)
            case Pair(left=l, right=r):
                _disjointness([("left component", l), ("right component", r)], path, out)
            case LetPair(scrut=s, x=x, y=y, body=b):
                if x == y:
                    out.append(Violation(
                        path, f"pattern binds {x} twice", "dup-pattern", frozenset((x,))))
                for v in (x, y):
                    if v not in b.fv:
                        out.append(Violation(
                            path, f"pattern variable {v} unused in the body",
                            "unused", frozenset((v,))))
                shared = s.fv & (b.fv - {x, y})
                if shared:
                    names = ", ".join(sorted(shared))
                    out.append(Violation(
                        path,
                        f"variable(s) {names} occur in both scrutinee and body",
                        "shared", frozenset(shared)))
            case Rec(scrut=s, base=u, step=v, update=w):
                _disjointness(
                    [("scrutinee", s), ("base", u), ("step", v), ("update", w)], path, out)
            case Iter(count=c, base=u, step=v):
                _disjointness([("count", c), ("base", u), ("step", v)], path, out)
            case Min(scrut=s, counter=u, fn=f):
                _disjointness([("scrutinee", s), ("counter", u), ("function", f)], path, out)
        kids = children(node)
        for i in range(len(kids) - 1, -1, -1):
            work.append((kids[i], f"{path}.{i}".lstrip(".")))
    return out


# --------------------------------------------------------------------------
# substitution and renaming


def subst(t: Term, x: str, s: Term) -> Term:
    """Replace the free occurrence of x in t by s.

    The payload must be closed or a variable; closed reduction never
    substitutes anything else, so an open non-variable payload is a bug
    in the caller.
    """
    if s.fv and not isinstance(s, Var):
        raise ContractViolation(
            f"substitution payload for {x} is open: free {sorted(s.fv)}")
    return _subst(t, x, s)


def _subst(t: Term, x: str, s: Term) -> Term:
    if x not in t.fv:
        return t
    match t:
        case Var():
            return s
        case Suc():
            # peel S chains iteratively, they can be very tall
            depth = 0
            inner = t
            while isinstance(inner, Suc):
                inner = inner.body
                depth += 1
            inner = _subst(inner, x, s)
            for _ in range(depth):
                inner = Suc(inner)
            return inner
        case App(fun=f, arg=a):
            return App(_subst(f, x, s), _subst(a, x, s))
        case Lam(binder=b, body=body):
            # x in t.fv implies x != b
            return Lam(b, _subst(body, x, s))
        case Pair(left=l, right=r):
            return Pair(_subst(l, x, s), _subst(r, x, s))
        case LetPair(scrut=sc, x=px, y=py, body=b):
            if x in sc.fv:
                return LetPair(_subst(sc, x, s), px, py, b)
            return LetPair(sc, px, py, _subst(b, x, s))
        case Rec(scrut=sc, base=u, step=v, update=w):
            return Rec(_subst(sc, x, s), _subst(u, x, s), _subst(v, x, s),
                       _subst(w, x, s))
        case Iter(count=c, base=u, step=v):
            return Iter(_subst(c, x, s), _subst(u, x, s), _subst(v, x, s))
        case Min(scrut=sc, counter=u, fn=f):
            return Min(_subst(sc, x, s), _subst(u, x, s), _subst(f, x, s))
        case _:
            return t


def occurs(t: Term, name: str) -> bool:
    """Does name occur anywhere in t, free or as a binder?"""
    work = [t]
    while work:
        node = work.pop()
        match node:
            case Var(name=n) if n == name:
                return True
            case Lam(binder=b) if b == name:
                return True
            case LetPair(x=x, y=y) if name in (x, y):
                return True
        work.extend(children(node))
    return False


def rename(t: Term, x: str, y: str) -> Term:
    """subst(t, x, Var y) for a y that is fresh for t."""
    if occurs(t, y):
        raise ContractViolation(f"rename target {y} already occurs in the term")
    return _subst(t, x, Var(y))


# --------------------------------------------------------------------------
# alpha equivalence


def alpha_eq(t: Term, u: Term) -> bool:
    """Equality up to consistent renaming of bound variables."""
    fresh = 0
    work: list[tuple[Term, Term, dict, dict]] = [(t, u, {}, {})]
    while work:
        a, b, ea, eb = work.pop()
        if type(a) is not type(b):
            return False
        match a:
            case Zero():
                continue
            case Var(name=na):
                la, lb = ea.get(na), eb.get(b.name)
                if la is None and lb is None:
                    if na != b.name:
                        return False
                elif la != lb:
                    return False
            case Suc():
                # walk chains in lockstep without touching the worklist
                x, y = a, b
                while isinstance(x, Suc) and isinstance(y, Suc):
                    x, y = x.body, y.body
                work.append((x, y, ea, eb))
            case Lam(binder=xa, body=ba):
                fresh += 1
                work.append((ba, b.body, {**ea, xa: fresh}, {**eb, b.binder: fresh}))
            case App():
                work.append((a.fun, b.fun, ea, eb))
                work.append((a.arg, b.arg, ea, eb))
            case Pair():
                work.append((a.left, b.left, ea, eb))
                work.append((a.right, b.right, ea, eb))
            case LetPair():
                work.append((a.scrut, b.scrut, ea, eb))
                fresh += 2
                work.append((a.body, b.body,
                             {**ea, a.x: fresh - 1, a.y: fresh},
                             {**eb, b.x: fresh - 1, b.y: fresh}))
            case Rec():
                work.append((a.scrut, b.scrut, ea, eb))
                work.append((a.base, b.base, ea, eb))
                work.append((a.step, b.step, ea, eb))
                work.append((a.update, b.update, ea, eb))
            case Iter():
                work.append((a.count, b.count, ea, eb))
                work.append((a.base, b.base, ea, eb))
                work.append((a.step, b.step, ea, eb))
            case Min():
                work.append((a.scrut, b.scrut, ea, eb))
                work.append((a.counter, b.counter, ea, eb))
                work.append((a.fn, b.fn, ea, eb))
            case _:
                return False
    return True


# --------------------------------------------------------------------------
# numerals and tuple sugar


def numeral(n: int) -> Term:
    if n < 0:
        raise ValueError("numerals are naturals")
    t: Term = Zero()
    for _ in range(n):
        t = Suc(t)
    return t


def numeral_value(t: Term) -> int | None:
    """The n with t = S^n 0, or None when t is not a numeral."""
    n = 0
    while isinstance(t, Suc):
        t = t.body
        n += 1
    return n if isinstance(t, Zero) else None


def fresh_name(avoid: set[str] | frozenset[str], base: str = "p") -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def mk_tuple(ts: list[Term]) -> Term:
    """<t1, ..., tn> as right-nested pairs."""
    if len(ts) < 2:
        raise ContractViolation("tuples have at least two components")
    out = ts[-1]
    for part in reversed(ts[:-1]):
        out = Pair(part, out)
    return out


def let_tuple(scrut: Term, vs: list[str], body: Term) -> Term:
    """let <v1, ..., vn> = scrut in body, as nested pair splits."""
    if len(vs) < 2:
        raise ContractViolation("tuple patterns have at least two variables")
    avoid = set(scrut.fv) | set(body.fv) | set(vs)
    scruts: list[Term] = [scrut]
    links: list[str] = []
    for _ in range(len(vs) - 2):
        link = fresh_name(avoid, "t")
        avoid.add(link)
        links.append(link)
        scruts.append(Var(link))
    out = body
    for i in range(len(vs) - 2, -1, -1):
        second = vs[i + 1] if i == len(vs) - 2 else links[i]
        out = LetPair(scruts[i], vs[i], second, out)
    return out


# --------------------------------------------------------------------------
# freshening (Barendregt's convention)


def freshen(t: Term) -> Term:
    """An alpha-variant whose binders are pairwise distinct and distinct
    from every free variable."""
    used = set(t.fv)

    def pick(name: str) -> str:
        if name not in used:
            used.add(name)
            return name
        i = 1
        while f"{name}_{i}" in used:
            i += 1
        new = f"{name}_{i}"
        used.add(new)
        return new

    def go(node: Term, env: dict[str, str]) -> Term:
        match node:
            case Zero():
                return node
            case Var(name=n):
                return Var(env[n]) if n in env else node
            case Suc():
                depth = 0
                inner = node
                while isinstance(inner, Suc):
                    inner = inner.body
                    depth += 1
                inner = go(inner, env)
                for _ in range(depth):
                    inner = Suc(inner)
                return inner
            case App(fun=f, arg=a):
                return App(go(f, env), go(a, env))
            case Lam(binder=x, body=b):
                nx = pick(x)
                return Lam(nx, go(b, {**env, x: nx}))
            case Pair(left=l, right=r):
                return Pair(go(l, env), go(r, env))
            case LetPair(scrut=s, x=x, y=y, body=b):
                ns = go(s, env)
                nx, ny = pick(x), pick(y)
                return LetPair(ns, nx, ny, go(b, {**env, x: nx, y: ny}))
            case Rec(scrut=s, base=u, step=v, update=w):
                return Rec(go(s, env), go(u, env), go(v, env), go(w, env))
            case Iter(count=c, base=u, step=v):
                return Iter(go(c, env), go(u, env), go(v, env))
            case Min(scrut=s, counter=u, fn=f):
                return Min(go(s, env), go(u, env), go(f, env))
        raise AssertionError(f"unhandled node {type(node).__name__}")

    return go(t, {})


# --------------------------------------------------------------------------
# printing


def pretty(t: Term) -> str:
    """Concrete syntax; parse(pretty(t)) is alpha-equivalent to t."""
    return _pretty(t, 0)


def _pretty(t: Term, level: int) -> str:
    # level 0: full term, 1: application operand/operator, 2: atom slot
    match t:
        case Zero():
            return "0"
        case Var(name=n):
            return n
        case Suc():
            sucs = 0
            inner = t
            while isinstance(inner, Suc):
                inner = inner.body
                sucs += 1
            if isinstance(inner, Zero):
                return str(sucs)
            head = "S " * sucs
            return f"{head}{_pretty(inner, 2)}"
        case Lam():
            binders = []
            body = t
            while isinstance(body, Lam):
                binders.append(body.binder)
                body = body.body
            s = f"\\{' '.join(binders)}. {_pretty(body, 0)}"
            return f"({s})" if level > 0 else s
        case App(fun=f, arg=a):
            s = f"{_pretty(f, 1)} {_pretty(a, 2)}"
            return f"({s})" if level > 1 else s
        case Pair(left=l, right=r):
            return f"<{_pretty(l, 0)}, {_pretty(r, 0)}>"
        case LetPair(scrut=sc, x=x, y=y, body=b):
            s = f"let <{x}, {y}> = {_pretty(sc, 0)} in {_pretty(b, 0)}"
            return f"({s})" if level > 0 else s
        case Rec(scrut=sc, base=u, step=v, update=w):
            parts = ", ".join(_pretty(p, 0) for p in (sc, u, v, w))
            return f"rec({parts})"
        case Iter(count=c, base=u, step=v):
            parts = ", ".join(_pretty(p, 0) for p in (c, u, v))
            return f"iter({parts})"
        case Min(scrut=sc, counter=u, fn=f):
            parts = ", ".join(_pretty(p, 0) for p in (sc, u, f))
            return f"min({parts})"
    raise AssertionError(f"unhandled node {type(t).__name__}")
