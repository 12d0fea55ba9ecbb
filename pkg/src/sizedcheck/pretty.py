"""Pretty-printing of expressions, patterns and declarations.

Output re-parses to an alpha-equivalent tree with minimal parenthesization;
names that clash textually get a numeric suffix in order of appearance."""

from __future__ import annotations

from .syntax import (
    Annot,
    App,
    CaseData,
    CaseSize,
    Con,
    DataDecl,
    Declaration,
    Def,
    Elided,
    Expr,
    FunDecl,
    Ident,
    Lam,
    LetDecl,
    Pattern,
    PCon,
    PDot,
    Pi,
    Polarity,
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
    free_vars,
)


class _Namer:
    """Stable display names: the first uid seen for a text keeps it, later
    uids get a numeric suffix; no display name is handed out twice."""

    def __init__(self):
        self.by_uid: dict[int, str] = {}
        self.used: set[str] = set()
        self.counts: dict[str, int] = {}

    def name(self, x: Ident) -> str:
        if x.uid not in self.by_uid:
            cand = x.text
            while cand in self.used:
                n = self.counts.get(x.text, 1) + 1
                self.counts[x.text] = n
                cand = f"{x.text}{n}"
            self.used.add(cand)
            self.by_uid[x.uid] = cand
        return self.by_uid[x.uid]


def pretty(e: Expr, namer: _Namer | None = None) -> str:
    return _expr(e, namer or _Namer())


def pretty_pattern(p: Pattern, namer: _Namer | None = None) -> str:
    return _pattern(p, namer or _Namer())


def pretty_size(s: SizeExpr, namer: _Namer | None = None) -> str:
    return _size(s, namer or _Namer())


def _size(s: SizeExpr, nm: _Namer) -> str:
    match s:
        case SVar(x):
            return nm.name(x)
        case SInfty():
            return "#"
        case SMeta(_):
            return "_"
        case SSucc(a):
            return f"$ {_size_atom(a, nm)}"
        case SMax(a, b):
            return f"max {_size_atom(a, nm)} {_size_atom(b, nm)}"
    raise AssertionError(s)


def _size_atom(s: SizeExpr, nm: _Namer) -> str:
    t = _size(s, nm)
    if isinstance(s, (SSucc, SMax)):
        return f"({t})"
    return t


def _is_atomic(e: Expr) -> bool:
    match e:
        case Var(_) | Def(_) | Con(_) | SetU() | SizeU() | Elided():
            return True
        case Size(s):
            return isinstance(s, (SVar, SInfty, SMeta))
        case _:
            return False


def _expr(e: Expr, nm: _Namer) -> str:
    match e:
        case Var(x) | Def(x) | Con(x):
            return nm.name(x)
        case SetU():
            return "Set"
        case SizeU():
            return "Size"
        case Elided():
            return "…"
        case Size(s):
            return _size(s, nm)
        case Pi(annot, binder, dom, cod):
            if binder is not None and (binder in free_vars(cod) or annot is Annot.PARAMETRIC):
                op, cl = ("[", "]") if annot is Annot.PARAMETRIC else ("(", ")")
                return f"{op}{nm.name(binder)} : {_expr(dom, nm)}{cl} -> {_expr(cod, nm)}"
            doms = _expr(dom, nm)
            if isinstance(dom, (Pi, Lam)):
                doms = f"({doms})"
            return f"{doms} -> {_expr(cod, nm)}"
        case Lam(binder, body):
            return f"\\ {nm.name(binder)} -> {_expr(body, nm)}"
        case App(_, _):
            head, args = _spine(e)
            parts = [_arg(head, nm)] + [_arg(a, nm) for a in args]
            return " ".join(parts)
        case CaseSize(s, binder, branch):
            return (
                f"case {_size_atom(s, nm)} {{ ($ {nm.name(binder)}) -> "
                f"{_expr(branch, nm)} }}"
            )
        case CaseData(scrut, branches):
            scruts = _arg(scrut, nm)
            bs = " ; ".join(
                f"{_pattern(p, nm)} -> {_expr(b, nm)}" for p, b in branches
            )
            return f"case {scruts} {{ {bs} }}"
    raise AssertionError(e)


def _spine(e: Expr):
    args = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fun
    return e, list(reversed(args))


def _arg(e: Expr, nm: _Namer) -> str:
    t = _expr(e, nm)
    return t if _is_atomic(e) else f"({t})"


def _pattern(p: Pattern, nm: _Namer) -> str:
    match p:
        case PVar(x):
            return nm.name(x)
        case PWild():
            return "_"
        case PDot(e):
            return f".{_arg(e, nm)}"
        case PSizeRel(parent, child):
            return f"({nm.name(parent)} > {nm.name(child)})"
        case PSucc(child):
            return f"($ {nm.name(child)})"
        case PCon(c, args):
            if not args:
                return nm.name(c)
            inner = " ".join(_pattern(a, nm) for a in args)
            return f"({nm.name(c)} {inner})"
    raise AssertionError(p)


def pretty_declaration(d: Declaration, nm: _Namer | None = None) -> str:
    nm = nm or _Namer()
    match d:
        case DataDecl(sized, coinductive, name, params, index_sig, cons):
            kw = ("sized " if sized else "") + ("codata" if coinductive else "data")
            ps = ""
            for p in params:
                mark = "++" if p.polarity is Polarity.STRICT_POS else ""
                ps += f" {mark}({nm.name(p.name)} : {_expr(p.type, nm)})"
            lines = [f"{kw} {nm.name(name)}{ps} : {_expr(index_sig, nm)}"]
            sep = "{"
            for c in cons:
                lines.append(f"{sep} {nm.name(c.name)} : {_expr(c.type, nm)}")
                sep = ";"
            lines.append("}")
            return "\n".join(lines)
        case FunDecl(coinductive, name, ty, clauses):
            kw = "cofun" if coinductive else "fun"
            lines = [f"{kw} {nm.name(name)} : {_expr(ty, nm)}"]
            sep = "{"
            for cl in clauses:
                lhs = " ".join(_pattern(p, nm) for p in cl.lhs)
                lhs = f" {lhs}" if lhs else ""
                lines.append(f"{sep} {nm.name(name)}{lhs} = {_expr(cl.rhs, nm)}")
                sep = ";"
            lines.append("}")
            return "\n".join(lines)
        case LetDecl(name, ty, body, ev):
            kw = "eval let" if ev else "let"
            return f"{kw} {nm.name(name)} : {_expr(ty, nm)} = {_expr(body, nm)}"
    raise AssertionError(d)


def pretty_program(decls: list[Declaration]) -> str:
    nm = _Namer()
    return "\n\n".join(pretty_declaration(d, nm) for d in decls) + "\n"
