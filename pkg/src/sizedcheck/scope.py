"""Scope checking: resolve every name to a uid-bearing Ident.

Declarations are processed in source order; forward references are rejected
except for a declaration's own recursive occurrences (a fun inside its
clauses, a data type inside its constructor types).  Pattern variables are
collected left to right before dot-pattern expressions are resolved, so a dot
may mention a variable bound later in the same left-hand side."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    App,
    CaseData,
    CaseSize,
    Clause,
    Con,
    ConSpec,
    DataDecl,
    Declaration,
    Def,
    Expr,
    FunDecl,
    Ident,
    Lam,
    LetDecl,
    ParamSpec,
    Pattern,
    PCon,
    PDot,
    Pi,
    Pos,
    PSizeRel,
    PSucc,
    PVar,
    PWild,
    SetU,
    Size,
    SizeExpr,
    SizeU,
    SInfty,
    SMax,
    SMeta,
    SSucc,
    SVar,
    Var,
    fresh_ident,
    fresh_uid,
)


@dataclass
class ScopeError(Exception):
    code: str  # UNBOUND | DUPLICATE
    message: str
    pos: Pos

    def __str__(self):
        return self.message


def _unbound(name: str, pos: Pos) -> ScopeError:
    return ScopeError("UNBOUND", f"unbound name '{name}'", pos)


class _Scope:
    def __init__(self):
        self.globals: dict[str, tuple[Ident, str]] = {}  # text -> (ident, kind)
        self.metas = itertools.count(1)

    def define(self, name: Ident, kind: str, pos: Pos) -> Ident:
        if name.text in self.globals:
            raise ScopeError(
                "DUPLICATE", f"duplicate definition of '{name.text}'", pos
            )
        ident = fresh_ident(name.text)
        self.globals[name.text] = (ident, kind)
        return ident

    def resolve_global(self, text: str):
        return self.globals.get(text)


class _Locals:
    def __init__(self, parent=None):
        self.names: dict[str, Ident] = {}
        self.parent = parent

    def bind(self, name: Ident) -> Ident:
        ident = fresh_ident(name.text)
        self.names[name.text] = ident
        return ident

    def lookup(self, text: str) -> Ident | None:
        env = self
        while env is not None:
            if text in env.names:
                return env.names[text]
            env = env.parent
        return None

    def child(self) -> "_Locals":
        return _Locals(self)


def scope_check(decls: list[Declaration]) -> list[Declaration]:
    sc = _Scope()
    out: list[Declaration] = []
    for d in decls:
        match d:
            case DataDecl(sized, coind, name, params, index_sig, cons, pos):
                env = _Locals()
                params2 = []
                for p in params:
                    ptype = _expr(sc, env, p.type)
                    params2.append(ParamSpec(env.bind(p.name), ptype, p.polarity))
                index2 = _expr(sc, env, index_sig)
                name2 = sc.define(name, "data", pos)
                cons2 = []
                for c in cons:
                    ctype = _expr(sc, env.child(), c.type)
                    cons2.append(ConSpec(sc.define(c.name, "con", c.pos), ctype, c.pos))
                out.append(DataDecl(sized, coind, name2, params2, index2, cons2, pos))
            case FunDecl(coind, name, ty, clauses, pos):
                ty2 = _expr(sc, _Locals(), ty)
                name2 = sc.define(name, "fun", pos)
                clauses2 = [_clause(sc, c) for c in clauses]
                out.append(FunDecl(coind, name2, ty2, clauses2, pos))
            case LetDecl(name, ty, body, ev, pos):
                ty2 = _expr(sc, _Locals(), ty)
                body2 = _expr(sc, _Locals(), body)
                name2 = sc.define(name, "let", pos)
                out.append(LetDecl(name2, ty2, body2, ev, pos))
            case _:
                raise AssertionError(d)
    return out


def _clause(sc: _Scope, c: Clause) -> Clause:
    env = _Locals()
    # pass 1: bind pattern variables left to right
    lhs1 = [_pattern_bind(sc, env, p) for p in c.lhs]
    # pass 2: resolve dot-pattern expressions against the full binder set
    lhs2 = [_pattern_dots(sc, env, p) for p in lhs1]
    rhs = _expr(sc, env, c.rhs)
    return Clause(lhs2, rhs, c.pos)


def _pattern_bind(sc: _Scope, env: _Locals, p: Pattern) -> Pattern:
    match p:
        case PVar(x, pos):
            g = sc.resolve_global(x.text)
            if g is not None and g[1] == "con":
                return PCon(g[0], [], pos)
            if env.lookup(x.text) is not None:
                raise ScopeError(
                    "DUPLICATE",
                    f"pattern variable '{x.text}' bound twice in one clause",
                    pos,
                )
            return PVar(env.bind(x), pos)
        case PCon(con, args, pos):
            g = sc.resolve_global(con.text)
            if g is None:
                raise _unbound(con.text, pos)
            if g[1] != "con":
                raise ScopeError(
                    "UNBOUND", f"'{con.text}' is not a constructor", pos
                )
            return PCon(g[0], [_pattern_bind(sc, env, a) for a in args], pos)
        case PSizeRel(parent, child, pos):
            par = env.lookup(parent.text)
            if par is None:
                raise _unbound(parent.text, pos)
            if env.lookup(child.text) is not None:
                raise ScopeError(
                    "DUPLICATE",
                    f"pattern variable '{child.text}' bound twice in one clause",
                    pos,
                )
            return PSizeRel(par, env.bind(child), pos)
        case PSucc(child, pos):
            if env.lookup(child.text) is not None:
                raise ScopeError(
                    "DUPLICATE",
                    f"pattern variable '{child.text}' bound twice in one clause",
                    pos,
                )
            return PSucc(env.bind(child), pos)
        case _:
            return p


def _pattern_dots(sc: _Scope, env: _Locals, p: Pattern) -> Pattern:
    match p:
        case PDot(e, pos):
            return PDot(_expr(sc, env, e), pos)
        case PCon(con, args, pos):
            return PCon(con, [_pattern_dots(sc, env, a) for a in args], pos)
        case _:
            return p


def _expr(sc: _Scope, env: _Locals, e: Expr) -> Expr:
    match e:
        case Var(x, pos):
            local = env.lookup(x.text)
            if local is not None:
                return Var(local, pos)
            g = sc.resolve_global(x.text)
            if g is None:
                raise _unbound(x.text, pos)
            ident, kind = g
            return Con(ident, pos) if kind == "con" else Def(ident, pos)
        case SetU() | SizeU():
            return e
        case Pi(annot, binder, dom, cod, pos):
            dom2 = _expr(sc, env, dom)
            if binder is None:
                return Pi(annot, None, dom2, _expr(sc, env, cod), pos)
            inner = env.child()
            binder2 = inner.bind(binder)
            return Pi(annot, binder2, dom2, _expr(sc, inner, cod), pos)
        case Lam(binder, body, pos):
            inner = env.child()
            binder2 = inner.bind(binder)
            return Lam(binder2, _expr(sc, inner, body), pos)
        case App(f, a, annot, pos):
            return App(_expr(sc, env, f), _expr(sc, env, a), annot, pos)
        case Size(s, pos):
            return Size(_size(sc, env, s, pos), pos)
        case CaseData(scrut, branches, pos):
            # a single successor-pattern branch is the size-case construct
            if len(branches) == 1 and isinstance(branches[0][0], PSucc):
                pat, body = branches[0]
                s = _scrut_size(sc, env, scrut, pos)
                inner = env.child()
                binder = inner.bind(pat.child)
                return CaseSize(s, binder, _expr(sc, inner, body), pos)
            if any(isinstance(b[0], PSucc) for b in branches):
                raise ScopeError(
                    "UNBOUND",
                    "a successor-pattern case must have exactly one branch",
                    pos,
                )
            scrut2 = _expr(sc, env, scrut)
            out = []
            for pat, body in branches:
                inner = env.child()
                pat1 = _pattern_bind(sc, inner, pat)
                pat2 = _pattern_dots(sc, inner, pat1)
                out.append((pat2, _expr(sc, inner, body)))
            return CaseData(scrut2, out, pos)
        case _:
            raise AssertionError(f"scope: unhandled node {e!r}")


def _scrut_size(sc: _Scope, env: _Locals, scrut: Expr, pos: Pos) -> SizeExpr:
    e = _expr(sc, env, scrut)
    match e:
        case Var(x):
            return SVar(x)
        case Size(s):
            return s
    raise ScopeError("UNBOUND", "case on a size requires a size variable scrutinee", pos)


def _size(sc: _Scope, env: _Locals, s: SizeExpr, pos: Pos) -> SizeExpr:
    match s:
        case SVar(x):
            local = env.lookup(x.text)
            if local is None:
                raise _unbound(x.text, pos)
            return SVar(local)
        case SSucc(a):
            return SSucc(_size(sc, env, a, pos))
        case SMax(a, b):
            return SMax(_size(sc, env, a, pos), _size(sc, env, b, pos))
        case SMeta(_):
            return SMeta(next(sc.metas))
        case _:
            return s
