"""Weak-head evaluation with erased sizes, runtime pattern matching,
readback for printing, and erasure-aware conversion checking."""

from __future__ import annotations

from .diagnostics import Diagnostic
from .signature import ConEntry, DataEntry, FunEntry, LetEntry, Signature, Totality
from .sizes import (
    NormalSize,
    Rel,
    SizeConstraint,
    SizeCtx,
    bump,
    entails,
    normalize,
    ns_var,
    to_size_expr,
)
from .syntax import (
    Annot,
    App,
    CaseData,
    CaseSize,
    Con,
    Def,
    Elided,
    Expr,
    Ident,
    Lam,
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
    SizeU,
    SMeta,
    Var,
    fresh_ident,
)
from .values import (
    Closure,
    Spine,
    Thunk,
    Value,
    VCon,
    VData,
    VDef,
    VLam,
    VNe,
    VPi,
    VSet,
    VSize,
    VSizeU,
)

_NOMATCH = object()
_STUCK = object()

DEFAULT_UNFOLD_FUEL = 100_000
DEFAULT_PRINT_DEPTH = 3


def _size_pred(ns: NormalSize) -> NormalSize:
    # the successor-pattern binding at erased sizes: $ # matches with j = #
    if ns.is_infty():
        return ns
    pairs = frozenset((b, max(n - 1, 0)) for b, n in ns.pairs)
    return NormalSize(pairs)


class Evaluator:
    def __init__(
        self,
        sig: Signature,
        unfold_fuel: int = DEFAULT_UNFOLD_FUEL,
        print_depth: int = DEFAULT_PRINT_DEPTH,
        print_sizes: bool = False,
    ):
        self.sig = sig
        self.unfold_fuel = unfold_fuel
        self.print_depth = print_depth
        self.print_sizes = print_sizes
        self.steps = 0
        self.forces = 0

    # -- budgets ------------------------------------------------------------

    def reset_budget(self):
        self.steps = 0

    def _tick(self, pos: Pos = (0, 0)):
        self.steps += 1
        if self.steps > self.unfold_fuel:
            raise Diagnostic("FUEL", "unfold budget exhausted", pos)

    # -- forcing and evaluation ----------------------------------------------

    def force(self, th: Thunk) -> Value:
        if th.value is None:
            self.forces += 1
            th.value = self.evaluate(th.env, th.expr)
            th.env = th.expr = None
        return th.value

    def evaluate(self, env: dict, e: Expr) -> Value:
        match e:
            case Var(x):
                th = env.get(x.uid)
                if th is None:
                    return VNe(x)
                return self.force(th)
            case Def(x):
                entry = self.sig[x]
                match entry:
                    case DataEntry():
                        return VData(x, [])
                    case FunEntry():
                        return VDef(x, [])
                    case LetEntry():
                        if entry.thunk is None:
                            entry.thunk = Thunk({}, entry.body)
                        return self.force(entry.thunk)
                raise AssertionError(f"evaluate: bad Def target {x!r}")
            case Con(x):
                return VCon(x, [])
            case App(f, a, annot):
                fv = self.evaluate(env, f)
                return self.apply(fv, Thunk(env, a), annot or Annot.RELEVANT, e.pos)
            case Lam(x, body):
                return VLam(x, Closure(env, x, body))
            case Pi(annot, binder, dom, cod):
                b = binder or fresh_ident("_x")
                return VPi(annot, b, self.evaluate(env, dom), Closure(env, b, cod))
            case SetU():
                return VSet()
            case SizeU():
                return VSizeU()
            case Size(s):
                return VSize(self.eval_size(env, s))
            case CaseSize(s, binder, branch):
                # the match is computationally irrelevant; bind the scrutinee
                ns = self.eval_size(env, s)
                env2 = dict(env)
                env2[binder.uid] = Thunk.of(VSize(ns))
                return self.evaluate(env2, branch)
            case CaseData(scrut, branches, pos):
                v = self.whnf(self.evaluate(env, scrut), pos)
                for pat, body in branches:
                    env2 = dict(env)
                    r = self._match(pat, Thunk.of(v), env2, pos)
                    if r is True:
                        return self.evaluate(env2, body)
                    if r is _STUCK:
                        raise Diagnostic("STUCK-MATCH", "case on a neutral value", pos)
                raise Diagnostic("STUCK-MATCH", "no case branch matches", pos)
            case Elided():
                raise Diagnostic("STUCK-MATCH", "cannot evaluate an elided value", e.pos)
        raise AssertionError(f"evaluate: unhandled node {e!r}")

    def eval_size(self, env: dict, s) -> NormalSize:
        def lookup(x: Ident):
            th = env.get(x.uid)
            if th is None:
                return None
            v = self.force(th)
            match v:
                case VSize(ns):
                    return ns
                case VNe(h, []):
                    return ns_var(h)
            raise AssertionError(f"size variable bound to non-size value {v!r}")

        return normalize(s, lookup)

    def apply(self, fv: Value, th: Thunk, annot: Annot, pos: Pos = (0, 0)) -> Value:
        match fv:
            case VLam(_, clo):
                env2 = dict(clo.env)
                env2[clo.binder.uid] = th
                return self.evaluate(env2, clo.body)
            case VCon(c, args):
                return VCon(c, args + [th])
            case VData(d, args):
                return VData(d, args + [th])
            case VNe(h, spine):
                return VNe(h, spine + [(th, annot)])
            case VDef(f, spine):
                v = VDef(f, spine + [(th, annot)])
                entry = self.sig.fun(f)
                if not entry.coinductive:
                    u = self._unfold(v, pos, strict=True)
                    if u is not None:
                        return u
                return v
        raise Diagnostic("STUCK-MATCH", "application of a non-function value", pos)

    def close(self, clo: Closure, v: Value) -> Value:
        env2 = dict(clo.env)
        env2[clo.binder.uid] = Thunk.of(v)
        return self.evaluate(env2, clo.body)

    def instantiate(self, pi: VPi, v: Value) -> Value:
        return self.close(pi.closure, v)

    def fresh_neutral(self, text: str, domain: Value | None = None) -> Value:
        x = fresh_ident(text)
        if isinstance(domain, VSizeU):
            return VSize(ns_var(x))
        return VNe(x)

    # -- definition unfolding -------------------------------------------------

    def _unfold(self, v: VDef, pos: Pos, strict: bool) -> Value | None:
        """Try one unfolding of a defined head.  Returns None when the value
        is underapplied or stuck; raises on an unmatched closed value only in
        strict (runtime) mode."""
        entry = self.sig.fun(v.name)
        if entry.totality is not Totality.CHECKED:
            return None  # rigid while its own clauses are still being checked
        if v.stuck or len(v.spine) < entry.arity:
            return None
        head, rest = v.spine[: entry.arity], v.spine[entry.arity :]
        r = self.match_clauses(entry.clauses, [t for t, _ in head], pos)
        if r is _STUCK:
            v.stuck = True
            return None
        if r is _NOMATCH:
            if strict:
                raise Diagnostic(
                    "STUCK-MATCH", f"no clause of '{v.name.text}' matches", pos
                )
            v.stuck = True
            return None
        env, clause = r
        self._tick(pos)
        out = self.evaluate(env, clause.rhs)
        for th, annot in rest:
            out = self.apply(out, th, annot, pos)
        return out

    def whnf(self, v: Value, pos: Pos = (0, 0)) -> Value:
        while isinstance(v, VDef):
            entry = self.sig.fun(v.name)
            u = self._unfold(v, pos, strict=not entry.coinductive)
            if u is None:
                return v
            v = u
        return v

    # -- pattern matching -----------------------------------------------------

    def match_clauses(self, clauses, args: list[Thunk], pos: Pos = (0, 0)):
        """First-match semantics in clause order; dot and wildcard patterns
        never force their argument."""
        for clause in clauses:
            if len(clause.patterns) != len(args):
                continue
            env: dict = {}
            result = True
            for p, a in zip(clause.patterns, args):
                r = self._match(p, a, env, pos)
                if r is not True:
                    result = r
                    break
            if result is True:
                return env, clause
            if result is _STUCK:
                return _STUCK
        return _NOMATCH

    def _match(self, p: Pattern, th: Thunk, env: dict, pos: Pos):
        match p:
            case PVar(x):
                env[x.uid] = th
                return True
            case PWild() | PDot(_):
                return True
            case PSucc(j):
                ns = self._as_size(self.force(th))
                if ns is None:
                    return _STUCK
                env[j.uid] = Thunk.of(VSize(_size_pred(ns)))
                return True
            case PSizeRel(_, j):
                env[j.uid] = th
                return True
            case PCon(c, subs):
                v = self.whnf(self.force(th), pos)
                match v:
                    case VCon(c2, args):
                        if c2 != c:
                            return _NOMATCH
                        if len(subs) != len(args):
                            return _STUCK
                        for sp, sa in zip(subs, args):
                            r = self._match(sp, sa, env, pos)
                            if r is not True:
                                return r
                        return True
                    case _:
                        return _STUCK
        raise AssertionError(f"match: unhandled pattern {p!r}")

    # -- readback -------------------------------------------------------------

    def quote(self, v: Value) -> Expr:
        """Full structural readback, without unfolding defined heads; used for
        diagnostics and the static analyses."""
        match v:
            case VSet():
                return SetU()
            case VSizeU():
                return SizeU()
            case VSize(ns):
                return Size(to_size_expr(ns))
            case VPi(annot, binder, dom, clo):
                x = fresh_ident(binder.text)
                body = self.close(clo, VNe(x))
                return Pi(annot, x, self.quote(dom), self.quote(body))
            case VLam(binder, clo):
                x = fresh_ident(binder.text)
                return Lam(x, self.quote(self.close(clo, VNe(x))))
            case VCon(c, args):
                annots = self.sig.con(c).annots
                e: Expr = Con(c)
                for k, th in enumerate(args):
                    a = annots[k] if k < len(annots) else Annot.RELEVANT
                    e = App(e, self.quote(self.force(th)), a)
                return e
            case VData(d, args):
                e = Def(d)
                for th in args:
                    e = App(e, self.quote(self.force(th)), Annot.RELEVANT)
                return e
            case VNe(h, spine):
                return self._quote_spine(Var(h), spine)
            case VDef(f, spine):
                return self._quote_spine(Def(f), spine)
        raise AssertionError(f"quote: unhandled value {v!r}")

    def _quote_spine(self, head: Expr, spine: Spine) -> Expr:
        for th, annot in spine:
            head = App(head, self.quote(self.force(th)), annot)
        return head

    def readback(self, v: Value, depth: int | None = None) -> Expr:
        """Display readback: inductive values print fully, coinductive values
        are unrolled `depth` layers and then elided; erased size arguments
        print as _ unless print_sizes is set."""
        if depth is None:
            depth = self.print_depth
        v = self.whnf(v)
        match v:
            case VCon(c, args):
                centry = self.sig.con(c)
                dentry = self.sig.data(centry.data)
                if dentry.coinductive:
                    if depth <= 0:
                        return Elided()
                    depth -= 1
                e: Expr = Con(c)
                for k, th in enumerate(args):
                    if k < centry.n_params:
                        continue  # parameters are determined by the type
                    annot = centry.annots[k] if k < len(centry.annots) else Annot.RELEVANT
                    if centry.has_size and k == centry.n_params:
                        if annot is Annot.PARAMETRIC and not self.print_sizes:
                            e = App(e, Size(SMeta(-1)), annot)
                        else:
                            e = App(e, self.quote(self.force(th)), annot)
                        continue
                    self._tick()
                    e = App(e, self.readback(self.force(th), depth), annot)
                return e
            case VNe(h, spine):
                return self._readback_spine(Var(h), spine, depth)
            case VDef(f, spine):
                return self._readback_spine(Def(f), spine, depth)
            case VLam(binder, clo):
                x = fresh_ident(binder.text)
                return Lam(x, self.readback(self.close(clo, VNe(x)), depth))
            case _:
                return self.quote(v)

    def _readback_spine(self, head: Expr, spine: Spine, depth: int) -> Expr:
        for th, annot in spine:
            if annot is Annot.PARAMETRIC and not self.print_sizes:
                head = App(head, Size(SMeta(-1)), annot)
            else:
                head = App(head, self.readback(self.force(th), depth), annot)
        return head

    # -- conversion -----------------------------------------------------------

    def convertible(
        self,
        a: Value,
        b: Value,
        sctx: SizeCtx | None = None,
        collector: list[SizeConstraint] | None = None,
    ) -> bool:
        return self._conv(a, b, sctx or SizeCtx(), collector)

    def size_entails(
        self,
        sctx: SizeCtx,
        a: NormalSize,
        rel: Rel,
        b: NormalSize,
        collector: list[SizeConstraint] | None,
    ) -> bool:
        if (a.metas() or b.metas()) and collector is not None:
            collector.append(SizeConstraint(a, rel, b, sctx))
            return True
        return entails(sctx, a, rel, b)

    def _as_size(self, v: Value) -> NormalSize | None:
        match v:
            case VSize(ns):
                return ns
            case VNe(h, []):
                return ns_var(h)
        return None

    def _conv(self, a: Value, b: Value, sctx: SizeCtx, col) -> bool:
        if a is b:
            return True
        if isinstance(a, VSize) or isinstance(b, VSize):
            nsa, nsb = self._as_size(a), self._as_size(b)
            if nsa is None or nsb is None:
                return False
            return self.size_entails(sctx, nsa, Rel.LE, nsb, col) and self.size_entails(
                sctx, nsb, Rel.LE, nsa, col
            )
        if (
            isinstance(a, VDef)
            and isinstance(b, VDef)
            and a.name == b.name
            and len(a.spine) == len(b.spine)
        ):
            if self._conv_spine(a.spine, b.spine, sctx, col):
                return True
        ua = self._unfold(a, (0, 0), strict=False) if isinstance(a, VDef) else None
        ub = self._unfold(b, (0, 0), strict=False) if isinstance(b, VDef) else None
        if ua is not None or ub is not None:
            return self._conv(ua if ua is not None else a, ub if ub is not None else b, sctx, col)
        match (a, b):
            case (VSet(), VSet()) | (VSizeU(), VSizeU()):
                return True
            case (VPi(an1, b1, d1, c1), VPi(an2, _, d2, c2)):
                if an1 is not an2:
                    return False
                if not self._conv(d1, d2, sctx, col):
                    return False
                x = self.fresh_neutral(b1.text, d1)
                return self._conv(self.close(c1, x), self.close(c2, x), sctx, col)
            case (VLam(b1, _), _):
                x = self.fresh_neutral(b1.text)
                return self._conv(
                    self.close(a.closure, x), self.apply(b, Thunk.of(x), Annot.RELEVANT), sctx, col
                )
            case (_, VLam(b2, _)):
                x = self.fresh_neutral(b2.text)
                return self._conv(
                    self.apply(a, Thunk.of(x), Annot.RELEVANT), self.close(b.closure, x), sctx, col
                )
            case (VCon(c1, args1), VCon(c2, args2)):
                if c1 != c2 or len(args1) != len(args2):
                    return False
                annots = self.sig.con(c1).annots
                for k, (t1, t2) in enumerate(zip(args1, args2)):
                    annot = annots[k] if k < len(annots) else Annot.RELEVANT
                    if annot is Annot.PARAMETRIC:
                        continue
                    if not self._conv(self.force(t1), self.force(t2), sctx, col):
                        return False
                return True
            case (VData(d1, args1), VData(d2, args2)):
                if d1 != d2 or len(args1) != len(args2):
                    return False
                return all(
                    self._conv(self.force(t1), self.force(t2), sctx, col)
                    for t1, t2 in zip(args1, args2)
                )
            case (VNe(h1, sp1), VNe(h2, sp2)):
                if h1 != h2 or len(sp1) != len(sp2):
                    return False
                return self._conv_spine(sp1, sp2, sctx, col)
        return False

    def _conv_spine(self, sp1: Spine, sp2: Spine, sctx: SizeCtx, col) -> bool:
        for (t1, an1), (t2, _) in zip(sp1, sp2):
            if an1 is Annot.PARAMETRIC:
                continue
            self._tick()
            if not self._conv(self.force(t1), self.force(t2), sctx, col):
                return False
        return True
