"""Abstract syntax: identifiers, polarities, size expressions, terms,
patterns and declarations, plus capture-avoiding substitution."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

Pos = tuple[int, int]  # 1-based (line, column)
NOPOS: Pos = (0, 0)

_uids = itertools.count(1)


def fresh_uid() -> int:
    return next(_uids)


@dataclass(eq=False)
class Ident:
    """A resolved name; equality and hashing go by uid, text is display-only."""

    text: str
    uid: int

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Ident) and self.uid == other.uid

    def __hash__(self) -> int:
        return self.uid

    def __repr__(self) -> str:
        return f"{self.text}#{self.uid}"


def fresh_ident(text: str) -> Ident:
    return Ident(text, fresh_uid())


class Annot(Enum):
    """Binder/argument relevance: (x : A) is relevant, [x : A] is parametric."""

    RELEVANT = "relevant"
    PARAMETRIC = "parametric"


class Polarity(Enum):
    """Variance of a type former in one argument position."""

    UNUSED = "unused"
    STRICT_POS = "++"
    POS = "+"
    NEG = "-"
    INVARIANT = "invariant"


_P = Polarity

# Composition p*q: polarity of an occurrence of variance q seen through a
# position of variance p.  UNUSED annihilates, STRICT_POS is the identity,
# INVARIANT absorbs everything else, NEG*NEG = POS.
_COMPOSE = {}
for _p in _P:
    for _q in _P:
        if _p is _P.UNUSED or _q is _P.UNUSED:
            _COMPOSE[(_p, _q)] = _P.UNUSED
        elif _p is _P.INVARIANT or _q is _P.INVARIANT:
            _COMPOSE[(_p, _q)] = _P.INVARIANT
        elif _p is _P.STRICT_POS:
            _COMPOSE[(_p, _q)] = _q
        elif _q is _P.STRICT_POS:
            _COMPOSE[(_p, _q)] = _p
        elif _p is _P.NEG:
            _COMPOSE[(_p, _q)] = _P.POS if _q is _P.NEG else _P.NEG
        else:  # _p is POS
            _COMPOSE[(_p, _q)] = _q


def compose(p: Polarity, q: Polarity) -> Polarity:
    return _COMPOSE[(p, q)]


# The lattice UNUSED < STRICT_POS < POS < INVARIANT, UNUSED < NEG < INVARIANT.
_ORDER = {
    _P.UNUSED: {_P.UNUSED, _P.STRICT_POS, _P.POS, _P.NEG, _P.INVARIANT},
    _P.STRICT_POS: {_P.STRICT_POS, _P.POS, _P.INVARIANT},
    _P.POS: {_P.POS, _P.INVARIANT},
    _P.NEG: {_P.NEG, _P.INVARIANT},
    _P.INVARIANT: {_P.INVARIANT},
}


def leq_pol(p: Polarity, q: Polarity) -> bool:
    return q in _ORDER[p]


def join(p: Polarity, q: Polarity) -> Polarity:
    if leq_pol(p, q):
        return q
    if leq_pol(q, p):
        return p
    return _P.INVARIANT


# ---------------------------------------------------------------------------
# Size expressions


class SizeExpr:
    pass


@dataclass
class SVar(SizeExpr):
    """Size variable: i"""

    name: Ident


@dataclass
class SSucc(SizeExpr):
    """Successor: $ s"""

    arg: SizeExpr


@dataclass
class SInfty(SizeExpr):
    """Infinity: #"""


@dataclass
class SMax(SizeExpr):
    """Binary maximum: max s t"""

    left: SizeExpr
    right: SizeExpr


@dataclass
class SMeta(SizeExpr):
    """Size hole on a right-hand side: _"""

    mid: int


def size_vars(s: SizeExpr) -> set[Ident]:
    match s:
        case SVar(x):
            return {x}
        case SSucc(a):
            return size_vars(a)
        case SMax(a, b):
            return size_vars(a) | size_vars(b)
        case _:
            return set()


def size_metas(s: SizeExpr) -> set[int]:
    match s:
        case SSucc(a):
            return size_metas(a)
        case SMax(a, b):
            return size_metas(a) | size_metas(b)
        case SMeta(m):
            return {m}
        case _:
            return set()


# ---------------------------------------------------------------------------
# Terms


class Expr:
    pos: Pos


@dataclass
class Var(Expr):
    """Local variable: x"""

    name: Ident
    pos: Pos = NOPOS


@dataclass
class Def(Expr):
    """Reference to a global data type, fun/cofun or let."""

    name: Ident
    pos: Pos = NOPOS


@dataclass
class Con(Expr):
    """Reference to a data constructor."""

    name: Ident
    pos: Pos = NOPOS


@dataclass
class SetU(Expr):
    """The universe of small types: Set"""

    pos: Pos = NOPOS


@dataclass
class SizeU(Expr):
    """The type of sizes: Size"""

    pos: Pos = NOPOS


@dataclass
class Pi(Expr):
    """Function type: (x : A) -> B, [x : A] -> B or A -> B"""

    annot: Annot
    binder: Ident | None
    domain: Expr
    codomain: Expr
    pos: Pos = NOPOS


@dataclass
class Lam(Expr):
    """Lambda: \\ x -> e"""

    binder: Ident
    body: Expr
    pos: Pos = NOPOS


@dataclass
class App(Expr):
    """Application: f a.  The annot is filled in during elaboration from
    the function's Pi annotation."""

    fun: Expr
    arg: Expr
    annot: Annot | None = None
    pos: Pos = NOPOS


@dataclass
class Size(Expr):
    """A size expression used as a term: #, ($ i), (max i j), _"""

    size: SizeExpr
    pos: Pos = NOPOS


@dataclass
class CaseSize(Expr):
    """Right-hand-side match on a size variable: case i { ($ j) -> e }"""

    scrut: SizeExpr
    binder: Ident
    branch: Expr
    pos: Pos = NOPOS


@dataclass
class CaseData(Expr):
    """Right-hand-side match on data: case e { p -> e ; ... }"""

    scrut: Expr
    branches: list[tuple["Pattern", Expr]]
    pos: Pos = NOPOS


@dataclass
class Elided(Expr):
    """Printing placeholder for a truncated coinductive value."""

    pos: Pos = NOPOS


# ---------------------------------------------------------------------------
# Patterns and declarations


class Pattern:
    pos: Pos


@dataclass
class PVar(Pattern):
    """Variable pattern: x"""

    name: Ident
    pos: Pos = NOPOS


@dataclass
class PCon(Pattern):
    """Constructor pattern: (c p1 ... pn)"""

    con: Ident
    args: list[Pattern]
    pos: Pos = NOPOS


@dataclass
class PDot(Pattern):
    """Dot (inaccessible) pattern: .e"""

    expr: Expr
    pos: Pos = NOPOS


@dataclass
class PSizeRel(Pattern):
    """Size pattern inside a constructor: (i > j)"""

    parent: Ident
    child: Ident
    pos: Pos = NOPOS


@dataclass
class PSucc(Pattern):
    """Successor pattern on a size argument: ($ j)"""

    child: Ident
    pos: Pos = NOPOS


@dataclass
class PWild(Pattern):
    """Wildcard: _"""

    pos: Pos = NOPOS


@dataclass
class Clause:
    lhs: list[Pattern]
    rhs: Expr
    pos: Pos = NOPOS


@dataclass
class ParamSpec:
    """Data type parameter ++(A : Set) or (A : Set)."""

    name: Ident
    type: Expr
    polarity: Polarity


@dataclass
class ConSpec:
    name: Ident
    type: Expr
    pos: Pos = NOPOS


class Declaration:
    pos: Pos


@dataclass
class DataDecl(Declaration):
    """data/codata, optionally sized: the size index is the first index."""

    sized: bool
    coinductive: bool
    name: Ident
    params: list[ParamSpec]
    index_sig: Expr
    constructors: list[ConSpec]
    pos: Pos = NOPOS


@dataclass
class FunDecl(Declaration):
    coinductive: bool
    name: Ident
    type: Expr
    clauses: list[Clause]
    pos: Pos = NOPOS


@dataclass
class LetDecl(Declaration):
    name: Ident
    type: Expr
    body: Expr
    eval: bool = False
    pos: Pos = NOPOS


# ---------------------------------------------------------------------------
# Binding structure, free variables and substitution


def pattern_binders(p: Pattern) -> list[Ident]:
    match p:
        case PVar(x):
            return [x]
        case PCon(_, args):
            out: list[Ident] = []
            for a in args:
                out.extend(pattern_binders(a))
            return out
        case PSizeRel(_, child) | PSucc(child):
            return [child]
        case _:
            return []


def free_vars(e: Expr) -> set[Ident]:
    """All free identifiers of e, including global Def/Con references."""
    match e:
        case Var(x) | Def(x) | Con(x):
            return {x}
        case Pi(_, binder, dom, cod):
            fv = free_vars(cod)
            if binder is not None:
                fv = fv - {binder}
            return free_vars(dom) | fv
        case Lam(binder, body):
            return free_vars(body) - {binder}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Size(s):
            return set(size_vars(s))
        case CaseSize(s, binder, branch):
            return set(size_vars(s)) | (free_vars(branch) - {binder})
        case CaseData(scrut, branches):
            fv = free_vars(scrut)
            for pat, body in branches:
                bound = set(pattern_binders(pat))
                for d in _pattern_dots(pat):
                    fv |= free_vars(d) - bound
                fv |= free_vars(body) - bound
            return fv
        case _:
            return set()


def _pattern_dots(p: Pattern) -> list[Expr]:
    match p:
        case PDot(e):
            return [e]
        case PCon(_, args):
            out: list[Expr] = []
            for a in args:
                out.extend(_pattern_dots(a))
            return out
        case _:
            return []


def subst_size(s: SizeExpr, x: Ident, r: SizeExpr) -> SizeExpr:
    match s:
        case SVar(y):
            return r if y == x else s
        case SSucc(a):
            return SSucc(subst_size(a, x, r))
        case SMax(a, b):
            return SMax(subst_size(a, x, r), subst_size(b, x, r))
        case _:
            return s


def substitute(e: Expr, x: Ident, r: Expr) -> Expr:
    """Capture-avoiding substitution of r for the free occurrences of x.

    Size variables may only be replaced by size-valued expressions (a bare
    Var or a Size term); binders shadow by uid and are renamed on capture.
    """
    rfv = free_vars(r)

    def rsize() -> SizeExpr:
        match r:
            case Var(y):
                return SVar(y)
            case Size(s):
                return s
        raise ValueError("size variable replaced by a non-size expression")

    def freshen(binder: Ident, body: Expr) -> tuple[Ident, Expr]:
        if binder in rfv:
            nb = fresh_ident(binder.text)
            return nb, substitute(body, binder, Var(nb))
        return binder, body

    def go(e: Expr) -> Expr:
        match e:
            case Var(y):
                return r if y == x else e
            case Def(_) | Con(_) | SetU() | SizeU() | Elided():
                return e
            case Pi(annot, binder, dom, cod, pos):
                dom2 = go(dom)
                if binder == x:
                    return Pi(annot, binder, dom2, cod, pos)
                if binder is not None:
                    binder, cod = freshen(binder, cod)
                return Pi(annot, binder, dom2, go(cod), pos)
            case Lam(binder, body, pos):
                if binder == x:
                    return e
                binder, body = freshen(binder, body)
                return Lam(binder, go(body), pos)
            case App(f, a, annot, pos):
                return App(go(f), go(a), annot, pos)
            case Size(s, pos):
                if x in size_vars(s):
                    return Size(subst_size(s, x, rsize()), pos)
                return e
            case CaseSize(s, binder, branch, pos):
                if x in size_vars(s):
                    s = subst_size(s, x, rsize())
                if binder == x:
                    return CaseSize(s, binder, branch, pos)
                binder, branch = freshen(binder, branch)
                return CaseSize(s, binder, go(branch), pos)
            case CaseData(scrut, branches, pos):
                out = []
                for pat, body in branches:
                    bound = set(pattern_binders(pat))
                    if x in bound:
                        out.append((pat, body))
                        continue
                    if bound & rfv:
                        for b in sorted(bound & rfv, key=lambda i: i.uid):
                            nb = fresh_ident(b.text)
                            pat = rename_pattern_var(pat, b, nb)
                            body = substitute(body, b, Var(nb))
                    pat = map_pattern_dots(pat, go)
                    out.append((pat, go(body)))
                return CaseData(go(scrut), out, pos)
        raise AssertionError(f"substitute: unhandled node {e!r}")

    return go(e)


def rename_pattern_var(p: Pattern, old: Ident, new: Ident) -> Pattern:
    match p:
        case PVar(x, pos):
            return PVar(new, pos) if x == old else p
        case PCon(c, args, pos):
            return PCon(c, [rename_pattern_var(a, old, new) for a in args], pos)
        case PSizeRel(parent, child, pos):
            return PSizeRel(
                new if parent == old else parent,
                new if child == old else child,
                pos,
            )
        case PSucc(child, pos):
            return PSucc(new, pos) if child == old else p
        case _:
            return p


def map_pattern_dots(p: Pattern, f) -> Pattern:
    match p:
        case PDot(e, pos):
            return PDot(f(e), pos)
        case PCon(c, args, pos):
            return PCon(c, [map_pattern_dots(a, f) for a in args], pos)
        case _:
            return p


def substitute_metas(e: Expr, sol: dict[int, SizeExpr]) -> Expr:
    """Replace solved size holes throughout e."""

    def gos(s: SizeExpr) -> SizeExpr:
        match s:
            case SMeta(m):
                return sol.get(m, s)
            case SSucc(a):
                return SSucc(gos(a))
            case SMax(a, b):
                return SMax(gos(a), gos(b))
            case _:
                return s

    def go(e: Expr) -> Expr:
        match e:
            case Size(s, pos):
                return Size(gos(s), pos)
            case Pi(annot, binder, dom, cod, pos):
                return Pi(annot, binder, go(dom), go(cod), pos)
            case Lam(binder, body, pos):
                return Lam(binder, go(body), pos)
            case App(f, a, annot, pos):
                return App(go(f), go(a), annot, pos)
            case CaseSize(s, binder, branch, pos):
                return CaseSize(gos(s), binder, go(branch), pos)
            case CaseData(scrut, branches, pos):
                return CaseData(
                    go(scrut),
                    [(map_pattern_dots(p, go), go(b)) for p, b in branches],
                    pos,
                )
            case _:
                return e

    return go(e)
