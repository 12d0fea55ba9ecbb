"""Bidirectional type checking: sized data/codata well-formedness, subtyping
with size entailment and declared polarities, the parametric-argument
discipline, pattern elaboration with dot/size/successor patterns, the
size-case rule, and clause-level solving of size holes."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic
from .evaluator import Evaluator
from .pretty import pretty
from .signature import (
    CallSite,
    ConEntry,
    DataEntry,
    ElabClause,
    FunEntry,
    LetEntry,
    Signature,
    Totality,
)
from .sizes import (
    Ambiguous,
    NormalSize,
    Rel,
    SizeConstraint,
    SizeCtx,
    Unsolvable,
    bump,
    format_size,
    normalize,
    ns_var,
    solve_metas,
    subst_base,
    to_size_expr,
    Meta,
)
from .syntax import (
    Annot,
    App,
    CaseData,
    CaseSize,
    Clause,
    Con,
    DataDecl,
    Declaration,
    Def,
    Expr,
    FunDecl,
    Ident,
    Lam,
    LetDecl,
    NOPOS,
    Pattern,
    PCon,
    PDot,
    Pi,
    Polarity,
    Pos,
    PSizeRel,
    PSucc,
    PVar,
    PWild,
    SetU,
    Size,
    SizeExpr,
    SizeU,
    SMeta,
    SVar,
    SSucc,
    Var,
    fresh_ident,
    leq_pol,
    size_metas,
    size_vars,
    substitute,
    substitute_metas,
)
from .totality import (
    admissibility_check,
    polarity_of,
    strict_positivity_check,
    termination_check,
)
from .values import Thunk, Value, VCon, VData, VNe, VPi, VSet, VSize, VSizeU


@dataclass
class _Binding:
    type: Value
    annot: Annot


class Ctx:
    """Typing context: binding types and annotations, a semantic environment
    mapping each bound variable to its (usually neutral) value, and the size
    hypothesis set."""

    def __init__(self, bindings=None, env=None, sctx=None):
        self.bindings: dict[int, _Binding] = bindings or {}
        self.env: dict[int, Thunk] = env or {}
        self.sctx: SizeCtx = sctx or SizeCtx()

    def _extended(self, x: Ident, b: _Binding, th: Thunk, sctx: SizeCtx) -> "Ctx":
        bindings = dict(self.bindings)
        env = dict(self.env)
        bindings[x.uid] = b
        env[x.uid] = th
        return Ctx(bindings, env, sctx)

    def bind(
        self,
        x: Ident,
        ty: Value,
        annot: Annot,
        hypothesis: tuple[NormalSize, bool] | None = None,
    ) -> "Ctx":
        """Bind x to a fresh neutral of type ty; size-typed binders are
        declared in the size context, optionally with a hypothesis edge."""
        if isinstance(ty, VSizeU):
            value: Value = VSize(ns_var(x))
            if hypothesis is not None:
                sctx = self.sctx.add(x, hypothesis[0], hypothesis[1])
            else:
                sctx = self.sctx.declare(x)
        else:
            value = VNe(x)
            sctx = self.sctx
        return self._extended(x, _Binding(ty, annot), Thunk.of(value), sctx)

    def bind_value(self, x: Ident, ty: Value, annot: Annot, value: Value) -> "Ctx":
        return self._extended(x, _Binding(ty, annot), Thunk.of(value), self.sctx)

    def lookup(self, x: Ident) -> _Binding | None:
        return self.bindings.get(x.uid)


class Checker:
    def __init__(
        self,
        unfold_fuel: int = 100_000,
        print_depth: int = 3,
        print_sizes: bool = False,
        collect_constraints: bool = False,
    ):
        self.sig = Signature()
        self.ev = Evaluator(self.sig, unfold_fuel, print_depth, print_sizes)
        self.collect_constraints = collect_constraints
        self.constraint_dump: list[str] = []
        # clause-local state
        self.collector: list[SizeConstraint] | None = None
        self.created_metas: set[int] | None = None
        self.calls: list[CallSite] | None = None
        self.current: int | None = None
        self.clause_lhs_size: NormalSize | None = None
        self.clause_index: int = 0

    # -- program ------------------------------------------------------------

    def check_program(self, decls: list[Declaration]) -> tuple[Signature, list[str]]:
        for d in decls:
            match d:
                case DataDecl():
                    self.check_data_decl(d)
                case FunDecl():
                    self.check_fun_decl(d)
                case LetDecl():
                    self.check_let_decl(d)
                case _:
                    raise AssertionError(d)
        outputs = []
        for d in decls:
            if isinstance(d, LetDecl) and d.eval:
                self.ev.reset_budget()
                v = self.ev.evaluate({}, Def(d.name, d.pos))
                rb = self.ev.readback(v)
                outputs.append(f"{d.name.text} = {pretty(rb)}")
        return self.sig, outputs

    # -- declarations ---------------------------------------------------------

    def check_data_decl(self, d: DataDecl):
        ctx = Ctx()
        params: list[tuple[Ident, Polarity, Expr, Value]] = []
        for p in d.params:
            pt = self.check_type(ctx, p.type)
            pv = self.ev.evaluate(ctx.env, pt)
            ctx = ctx.bind(p.name, pv, Annot.RELEVANT)
            params.append((p.name, p.polarity, pt, pv))

        index_elab = self.check_type(ctx, d.index_sig)
        t = self.ev.evaluate(ctx.env, index_elab)
        index_domains: list[Value] = []
        while isinstance(t, VPi):
            index_domains.append(self.ev.whnf(t.domain))
            t = self.ev.whnf(
                self.ev.instantiate(t, self.ev.fresh_neutral(t.binder.text, t.domain))
            )
        if not isinstance(t, VSet):
            raise Diagnostic(
                "TYPE-MISMATCH", "a data type signature must end in Set", d.pos
            )
        if d.sized:
            if not index_domains or not isinstance(index_domains[0], VSizeU):
                raise Diagnostic(
                    "SIZE-INDEX-SHAPE",
                    "the size index must be the first index of a sized type",
                    d.pos,
                )

        kind = index_elab
        for name, _, pt, _ in reversed(params):
            kind = Pi(Annot.RELEVANT, name, pt, kind, d.pos)
        entry = DataEntry(
            d.name,
            d.sized,
            d.coinductive,
            [(n, pol) for n, pol, _, _ in params],
            self.ev.evaluate({}, kind),
            len(index_domains),
        )
        self.sig.add(d.name, entry)

        strict_params = [n for n, pol, _, _ in params if pol is Polarity.STRICT_POS]
        for c in d.constructors:
            internal = c.type
            for name, _, pt, _ in reversed(params):
                internal = Pi(Annot.PARAMETRIC, name, pt, internal, c.pos)
            ct = self.check_type(Ctx(), internal)
            cv = self.ev.evaluate({}, ct)
            centry = self._check_constructor(d, entry, params, strict_params, c.name, ct, cv, c.pos)
            self.sig.add(c.name, centry)
            entry.constructors.append(c.name)

    def _check_constructor(
        self,
        d: DataDecl,
        entry: DataEntry,
        params,
        strict_params: list[Ident],
        cname: Ident,
        ct: Expr,
        cv: Value,
        pos: Pos,
    ) -> ConEntry:
        n_params = len(params)
        t = self.ev.whnf(cv)
        annots: list[Annot] = []
        param_neutrals: list[Value] = []
        for k in range(n_params):
            if not isinstance(t, VPi):
                raise Diagnostic(
                    "TYPE-MISMATCH", "constructor type ends before its parameters", pos
                )
            x = self.ev.fresh_neutral(t.binder.text, t.domain)
            param_neutrals.append(x)
            annots.append(t.annot)
            t = self.ev.whnf(self.ev.instantiate(t, x))

        size_var: Ident | None = None
        if d.sized:
            if not (isinstance(t, VPi) and isinstance(self.ev.whnf(t.domain), VSizeU)):
                raise Diagnostic(
                    "SIZE-INDEX-SHAPE",
                    f"constructor '{cname.text}' of a sized type must quantify "
                    "over its size first",
                    pos,
                )
            size_var = fresh_ident(t.binder.text)
            annots.append(t.annot)
            t = self.ev.whnf(self.ev.instantiate(t, VSize(ns_var(size_var))))

        arg_domains: list[Value] = []
        while isinstance(t, VPi):
            arg_domains.append(self.ev.whnf(t.domain))
            annots.append(t.annot)
            t = self.ev.whnf(
                self.ev.instantiate(t, self.ev.fresh_neutral(t.binder.text, t.domain))
            )

        if not (isinstance(t, VData) and t.name == d.name):
            raise Diagnostic(
                "TYPE-MISMATCH",
                f"constructor '{cname.text}' must target '{d.name.text}'",
                pos,
            )
        for k in range(n_params):
            if not self.ev.convertible(self.ev.force(t.args[k]), param_neutrals[k]):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    f"constructor '{cname.text}' must target '{d.name.text}' "
                    "applied to the declared parameters",
                    pos,
                )

        arg_exprs = [self.ev.quote(b) for b in arg_domains]
        if d.sized:
            assert size_var is not None
            ts = self.ev._as_size(self.ev.force(t.args[n_params]))
            if ts is None or not ts.is_atom() or ts.atom() != (size_var, 1):
                raise Diagnostic(
                    "SIZE-INDEX-SHAPE",
                    f"the target of '{cname.text}' must carry size "
                    f"$ {size_var.text}",
                    pos,
                )
            for k, b in enumerate(arg_exprs):
                self._check_rec_sizes(d.name, size_var, b, cname, n_params, pos)
                p = polarity_of(size_var, b, self.sig)
                want = Polarity.NEG if d.coinductive else Polarity.POS
                tone = "antitone" if d.coinductive else "monotone"
                if not leq_pol(p, want):
                    raise Diagnostic(
                        "SIZE-MONOTONICITY",
                        f"argument {k + 1} of '{cname.text}' is not {tone} in "
                        f"the size index (polarity {p.value}); subtyping for "
                        f"'{d.name.text}' would be unsound",
                        pos,
                    )

        strict_positivity_check(d.name, strict_params, cname, arg_exprs, self.sig, pos)

        return ConEntry(
            cname,
            d.name,
            ct,
            cv,
            n_params,
            d.sized,
            annots,
            n_params + (1 if d.sized else 0) + len(arg_domains),
        )

    def _check_rec_sizes(
        self, dname: Ident, i: Ident, e: Expr, cname: Ident, n_params: int, pos: Pos
    ):
        """Every recursive occurrence of the defined type carries size
        exactly i."""

        def spine(e: Expr):
            args = []
            while isinstance(e, App):
                args.append(e.arg)
                e = e.fun
            return e, list(reversed(args))

        def go(e: Expr):
            match e:
                case App(_, _):
                    head, args = spine(e)
                    if isinstance(head, Def) and head.name == dname:
                        if len(args) <= n_params or not isinstance(
                            args[n_params], Size
                        ):
                            raise Diagnostic(
                                "SIZE-INDEX-SHAPE",
                                f"recursive occurrence of '{dname.text}' in "
                                f"'{cname.text}' lacks its size index",
                                pos,
                            )
                        ns = normalize(args[n_params].size)
                        if not (ns.is_atom() and ns.atom() == (i, 0)):
                            raise Diagnostic(
                                "SIZE-INDEX-SHAPE",
                                f"recursive occurrence of '{dname.text}' in "
                                f"'{cname.text}' must carry size exactly "
                                f"{i.text}",
                                pos,
                            )
                    for a in args:
                        go(a)
                    if not isinstance(head, (Def, Con, Var)):
                        go(head)
                case Pi(_, _, dom, cod):
                    go(dom)
                    go(cod)
                case Lam(_, body):
                    go(body)
                case Def(x) if x == dname:
                    raise Diagnostic(
                        "SIZE-INDEX-SHAPE",
                        f"unapplied recursive occurrence of '{dname.text}' in "
                        f"'{cname.text}'",
                        pos,
                    )
                case _:
                    pass

        go(e)

    def check_fun_decl(self, f: FunDecl):
        ty = self.check_type(Ctx(), f.type)
        tv = self.ev.evaluate({}, ty)
        arities = {len(c.lhs) for c in f.clauses}
        if len(arities) > 1:
            raise Diagnostic(
                "TYPE-MISMATCH", "all clauses must bind the same number of patterns", f.pos
            )
        arity = arities.pop() if arities else 0

        size_param = None
        t = tv
        for k in range(arity):
            t = self.ev.whnf(t)
            if not isinstance(t, VPi):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "clauses bind more patterns than the type has arguments",
                    f.pos,
                )
            if size_param is None and isinstance(self.ev.whnf(t.domain), VSizeU):
                size_param = k
            t = self.ev.instantiate(t, self.ev.fresh_neutral(t.binder.text, t.domain))

        entry = FunEntry(f.name, f.coinductive, ty, tv, arity, size_param)
        self.sig.add(f.name, entry)

        self.current = f.name.uid
        try:
            for idx, clause in enumerate(f.clauses):
                self.clause_index = idx
                elab = self._check_clause(f, entry, clause, tv, idx)
                entry.clauses.append(elab)
        finally:
            self.current = None
        entry.report = termination_check(entry, self.sig)
        entry.totality = Totality.CHECKED

    def _check_clause(
        self, f: FunDecl, entry: FunEntry, clause: Clause, tv: Value, idx: int
    ) -> ElabClause:
        self.collector = []
        self.created_metas = set()
        self.calls = []
        self.clause_lhs_size = None
        try:
            ctx, values, obligations, pats = self._elaborate_patterns(
                clause, tv, f.coinductive, entry.size_param
            )
            residual = tv
            for v in values:
                residual = self.ev.whnf(residual)
                residual = self.ev.instantiate(residual, v)
            self._check_obligations(ctx, obligations)
            rhs = self.check(ctx, clause.rhs, residual, erased=False)
            try:
                sol = solve_metas(self.collector, ctx.sctx, self.created_metas)
            except (Unsolvable, Ambiguous) as exc:
                raise Diagnostic("UNSOLVED-META", str(exc), clause.pos)
            if self.collect_constraints:
                self._dump_constraints(f.name.text, idx)
            sol_exprs = {m: to_size_expr(ns) for m, ns in sol.items()}
            rhs = substitute_metas(rhs, sol_exprs)
            for call in self.calls:
                if call.size_arg is not None:
                    ns = call.size_arg
                    for m, val in sol.items():
                        ns = subst_base(ns, Meta(m), val)
                    call.size_arg = ns
            entry.calls.extend(self.calls)
            return ElabClause(pats, rhs, self.clause_lhs_size, ctx.sctx, clause.pos)
        finally:
            self.collector = None
            self.created_metas = None
            self.calls = None
            self.clause_lhs_size = None

    def _dump_constraints(self, name: str, idx: int | None):
        if not self.collector:
            return
        naming: dict[int, str] = {}
        for c in self.collector:
            for m in sorted(c.metas()):
                if m not in naming:
                    naming[m] = f"m{len(naming) + 1}"
        where = name if idx is None else f"{name} clause {idx + 1}"
        self.constraint_dump.append(f"-- {where}")
        for c in self.collector:
            self.constraint_dump.append(
                f"{format_size(c.lhs, naming)} {c.rel.value} {format_size(c.rhs, naming)}"
            )

    def check_let_decl(self, d: LetDecl):
        ty = self.check_type(Ctx(), d.type)
        tv = self.ev.evaluate({}, ty)
        self.collector = []
        self.created_metas = set()
        try:
            body = self.check(Ctx(), d.body, tv, erased=False)
            try:
                sol = solve_metas(self.collector, SizeCtx(), self.created_metas)
            except (Unsolvable, Ambiguous) as exc:
                raise Diagnostic("UNSOLVED-META", str(exc), d.pos)
            if self.collect_constraints:
                self._dump_constraints(d.name.text, None)
            body = substitute_metas(body, {m: to_size_expr(ns) for m, ns in sol.items()})
        finally:
            self.collector = None
            self.created_metas = None
        self.sig.add(d.name, LetEntry(d.name, tv, body, d.eval))

    # -- pattern elaboration ----------------------------------------------------

    def _elaborate_patterns(
        self, clause: Clause, tv: Value, is_cofun: bool, size_param: int | None
    ):
        ctx = Ctx()
        values: list[Value] = []
        obligations: list = []
        pats: list[Pattern] = []
        t = tv
        for k, p in enumerate(clause.lhs):
            t = self.ev.whnf(t)
            if not isinstance(t, VPi):
                raise Diagnostic(
                    "TYPE-MISMATCH", "more patterns than the type has arguments", p.pos
                )
            dom = self.ev.whnf(t.domain)
            annot = t.annot
            if isinstance(dom, VSizeU):
                ctx, val, p2 = self._elab_size_param(
                    ctx, t, p, annot, is_cofun, designated=(k == size_param)
                )
            else:
                ctx, val, obls, p2 = self._elab_pattern(ctx, dom, annot, p)
                obligations.extend(obls)
            values.append(val)
            pats.append(p2)
            t = self.ev.instantiate(t, val)
        return ctx, values, obligations, pats

    def _elab_size_param(
        self, ctx: Ctx, pi: VPi, p: Pattern, annot: Annot, is_cofun: bool, designated: bool
    ):
        match p:
            case PVar(x):
                ctx = ctx.bind(x, VSizeU(), annot)
                val = VSize(ns_var(x))
                if designated:
                    self.clause_lhs_size = ns_var(x)
                return ctx, val, p
            case PWild():
                x = fresh_ident("_i")
                return ctx.bind(x, VSizeU(), annot), VSize(ns_var(x)), p
            case PSucc(j):
                if not is_cofun:
                    raise Diagnostic(
                        "ADMISSIBILITY",
                        "successor patterns are only permitted in corecursive "
                        "definitions",
                        p.pos,
                    )
                i_star = fresh_ident(pi.binder.text)
                residual = self.ev.instantiate(pi, VSize(ns_var(i_star)))
                reason = admissibility_check(self.ev, self.sig, residual, i_star, cofun=True)
                if reason is not None:
                    raise Diagnostic("ADMISSIBILITY", reason, p.pos)
                ctx = ctx.bind(j, VSizeU(), annot)
                val = VSize(bump(ns_var(j), 1))
                if designated:
                    self.clause_lhs_size = bump(ns_var(j), 1)
                return ctx, val, p
            case PDot(_):
                raise Diagnostic(
                    "ILLEGAL-SIZE-REFINEMENT",
                    "a dot pattern may not refine a size parameter of the "
                    "function itself",
                    p.pos,
                )
            case PSizeRel(_, _):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "size patterns (i > j) belong inside constructor patterns",
                    p.pos,
                )
            case _:
                raise Diagnostic(
                    "TYPE-MISMATCH", "cannot match a constructor against a size", p.pos
                )

    def _elab_pattern(self, ctx: Ctx, dom: Value, annot: Annot, p: Pattern):
        """Elaborate one pattern against its (whnf) domain type; returns the
        extended context, the value matched, dot obligations and the
        elaborated pattern."""
        match p:
            case PVar(x):
                ctx = ctx.bind(x, dom, annot)
                return ctx, self.ev.force(ctx.env[x.uid]), [], p
            case PWild():
                x = fresh_ident("_x")
                ctx = ctx.bind(x, dom, annot)
                return ctx, self.ev.force(ctx.env[x.uid]), [], p
            case PCon(_, _):
                if not isinstance(dom, VData):
                    raise Diagnostic(
                        "TYPE-MISMATCH",
                        f"constructor pattern against non-data type "
                        f"'{pretty(self.ev.quote(dom))}'",
                        p.pos,
                    )
                return self._elab_con_pattern(ctx, dom, annot, p)
            case PDot(_):
                raise Diagnostic(
                    "DOT-MISMATCH",
                    "dot pattern in a position not determined by the type",
                    p.pos,
                )
            case PSucc(_):
                raise Diagnostic(
                    "ADMISSIBILITY",
                    "successor patterns only match size arguments",
                    p.pos,
                )
            case PSizeRel(_, _):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "size patterns (i > j) belong inside constructor patterns",
                    p.pos,
                )
        raise AssertionError(p)

    def _elab_con_pattern(self, ctx: Ctx, dty: VData, annot: Annot, p: PCon):
        dentry = self.sig.data(dty.name)
        centry = self.sig.get(p.con)
        if not isinstance(centry, ConEntry) or centry.data != dty.name:
            raise Diagnostic(
                "TYPE-MISMATCH",
                f"'{p.con.text}' is not a constructor of '{dty.name.text}'",
                p.pos,
            )
        if len(p.args) != centry.arity:
            raise Diagnostic(
                "TYPE-MISMATCH",
                f"constructor '{p.con.text}' takes {centry.arity} patterns, "
                f"found {len(p.args)}",
                p.pos,
            )
        if len(dty.args) < centry.n_params + (1 if centry.has_size else 0):
            raise Diagnostic(
                "TYPE-MISMATCH", "match against an underapplied data type", p.pos
            )
        obligations: list = []
        args_out: list[Pattern] = []
        thunks: list[Thunk] = []
        ct: Value = centry.type_value

        # parameters are forced by the scrutinee type
        for k in range(centry.n_params):
            ct = self.ev.whnf(ct)
            forced = self.ev.force(dty.args[k])
            sub = p.args[k]
            match sub:
                case PDot(e):
                    obligations.append((e, self.ev.whnf(ct.domain), forced, sub.pos))
                case PVar(x):
                    ctx = ctx.bind_value(x, self.ev.whnf(ct.domain), Annot.PARAMETRIC, forced)
                case PWild():
                    pass
                case _:
                    raise Diagnostic(
                        "DOT-MISMATCH",
                        f"parameter argument of '{p.con.text}' is forced; "
                        "use a dot pattern",
                        sub.pos,
                    )
            args_out.append(sub)
            thunks.append(Thunk.of(forced))
            ct = self.ev.instantiate(ct, forced)

        # the size argument
        if centry.has_size:
            ct = self.ev.whnf(ct)
            s_ns = self.ev._as_size(self.ev.force(dty.args[centry.n_params]))
            if s_ns is None:
                raise Diagnostic(
                    "TYPE-MISMATCH", "scrutinee size index is not a size", p.pos
                )
            sub = p.args[centry.n_params]
            if s_ns.is_atom() and s_ns.atom()[1] == 0 and not s_ns.is_infty():
                base, _ = s_ns.atom()
                if isinstance(base, Meta):
                    raise Diagnostic(
                        "TYPE-MISMATCH", "cannot match at an unsolved size", p.pos
                    )
                if dentry.coinductive:
                    raise Diagnostic(
                        "COFUN-MATCH-ON-VARIABLE-SIZE",
                        f"cannot match on '{dty.name.text}' at variable size "
                        f"'{base.text}': it might be a totally undefined value",
                        p.pos,
                    )
                match sub:
                    case PSizeRel(parent, child):
                        if parent != base:
                            raise Diagnostic(
                                "SIZE-PATTERN-REQUIRED",
                                f"size pattern must relate the matched index "
                                f"'{base.text}', found '{parent.text}'",
                                sub.pos,
                            )
                        ctx = ctx.bind(
                            child, VSizeU(), ct.annot, hypothesis=(ns_var(parent), True)
                        )
                        size_val: Value = VSize(ns_var(child))
                    case PDot(_):
                        raise Diagnostic(
                            "SIZE-PATTERN-REQUIRED",
                            "matching at a variable size requires a size "
                            "pattern (i > j), not a dot",
                            sub.pos,
                        )
                    case _:
                        raise Diagnostic(
                            "SIZE-PATTERN-REQUIRED",
                            "matching at a variable size requires a size "
                            "pattern (i > j)",
                            sub.pos,
                        )
            else:
                if len(s_ns.pairs) > 1:
                    raise Diagnostic(
                        "SIZE-PATTERN-REQUIRED",
                        "cannot match at a max-shaped size index",
                        sub.pos,
                    )
                pred = (
                    s_ns
                    if s_ns.is_infty()
                    else NormalSize(frozenset({(s_ns.atom()[0], s_ns.atom()[1] - 1)}))
                )
                match sub:
                    case PDot(e):
                        obligations.append((e, VSizeU(), VSize(pred), sub.pos))
                    case _:
                        raise Diagnostic(
                            "DOT-MISMATCH",
                            f"the size argument of '{p.con.text}' is forced "
                            "here; use a dot pattern",
                            sub.pos,
                        )
                size_val = VSize(pred)
            args_out.append(sub)
            thunks.append(Thunk.of(size_val))
            ct = self.ev.instantiate(ct, size_val)

        # remaining arguments
        for k in range(centry.n_params + (1 if centry.has_size else 0), centry.arity):
            ct = self.ev.whnf(ct)
            dom = self.ev.whnf(ct.domain)
            sub = p.args[k]
            if isinstance(dom, VSizeU):
                match sub:
                    case PVar(x):
                        ctx = ctx.bind(x, VSizeU(), ct.annot)
                        val: Value = VSize(ns_var(x))
                    case PWild():
                        x = fresh_ident("_i")
                        ctx = ctx.bind(x, VSizeU(), ct.annot)
                        val = VSize(ns_var(x))
                    case _:
                        raise Diagnostic(
                            "TYPE-MISMATCH",
                            "only variable patterns may match an inner size "
                            "argument",
                            sub.pos,
                        )
                args_out.append(sub)
            else:
                ctx, val, obls, sub2 = self._elab_pattern(ctx, dom, ct.annot, sub)
                obligations.extend(obls)
                args_out.append(sub2)
            thunks.append(Thunk.of(val))
            ct = self.ev.instantiate(ct, val)

        target = self.ev.whnf(ct)
        assert isinstance(target, VData) and target.name == dty.name
        # indices beyond the size must agree with the scrutinee type
        first_index = centry.n_params + (1 if centry.has_size else 0)
        for k in range(first_index, min(len(target.args), len(dty.args))):
            if not self.ev.convertible(
                self.ev.force(target.args[k]),
                self.ev.force(dty.args[k]),
                ctx.sctx,
                self.collector,
            ):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    f"index {k - first_index + 1} of '{p.con.text}' does not "
                    "match the scrutinee type",
                    p.pos,
                )
        value = VCon(p.con, thunks)
        return ctx, value, obligations, PCon(p.con, args_out, p.pos)

    def _check_obligations(self, ctx: Ctx, obligations):
        for e, ty, forced, pos in obligations:
            ty = self.ev.whnf(ty)
            if isinstance(ty, VSizeU):
                se = self.as_size(ctx, e, erased=True)
                v: Value = VSize(self.ev.eval_size(ctx.env, se))
            else:
                elab = self.check(ctx, e, ty, erased=True)
                v = self.ev.evaluate(ctx.env, elab)
            if not self.ev.convertible(v, forced, ctx.sctx, self.collector):
                raise Diagnostic(
                    "DOT-MISMATCH",
                    f"dot pattern '{pretty(e)}' does not match the forced "
                    f"value '{pretty(self.ev.quote(forced))}'",
                    pos,
                )

    # -- expressions ------------------------------------------------------------

    def check_type(self, ctx: Ctx, e: Expr) -> Expr:
        match e:
            case SetU() | SizeU():
                return e
            case Pi(annot, binder, dom, cod, pos):
                dom2 = self.check_type(ctx, dom)
                if binder is not None:
                    dv = self.ev.evaluate(ctx.env, dom2)
                    ctx2 = ctx.bind(binder, dv, annot)
                else:
                    ctx2 = ctx
                return Pi(annot, binder, dom2, self.check_type(ctx2, cod), pos)
            case _:
                elab, ty = self.infer(ctx, e, erased=True)
                if not isinstance(self.ev.whnf(ty), VSet):
                    raise Diagnostic(
                        "TYPE-MISMATCH",
                        f"expected a type, got something of type "
                        f"'{pretty(self.ev.quote(ty))}'",
                        e.pos,
                    )
                return elab

    def as_size(self, ctx: Ctx, e: Expr, erased: bool) -> SizeExpr:
        match e:
            case Var(x):
                b = ctx.lookup(x)
                if b is None or not isinstance(self.ev.whnf(b.type), VSizeU):
                    raise Diagnostic(
                        "TYPE-MISMATCH", f"'{x.text}' is not a size variable", e.pos
                    )
                self._use_check(ctx, x, erased, e.pos)
                return SVar(x)
            case Size(s):
                for x in size_vars(s):
                    b = ctx.lookup(x)
                    if b is None or not isinstance(self.ev.whnf(b.type), VSizeU):
                        raise Diagnostic(
                            "TYPE-MISMATCH", f"'{x.text}' is not a size variable", e.pos
                        )
                    self._use_check(ctx, x, erased, e.pos)
                for m in size_metas(s):
                    self._register_meta(m, e.pos)
                return s
        raise Diagnostic(
            "TYPE-MISMATCH",
            "expected a size expression (a size variable, $, #, max or _)",
            e.pos,
        )

    def _register_meta(self, m: int, pos: Pos):
        if self.collector is None:
            raise Diagnostic(
                "UNSOLVED-META",
                "size holes are only allowed on clause right-hand sides",
                pos,
            )
        assert self.created_metas is not None
        self.created_metas.add(m)

    def _use_check(self, ctx: Ctx, x: Ident, erased: bool, pos: Pos):
        b = ctx.lookup(x)
        if b is not None and b.annot is Annot.PARAMETRIC and not erased:
            raise Diagnostic(
                "PARAMETRIC-VIOLATION",
                f"parametric variable '{x.text}' used in a relevant position",
                pos,
            )

    def _infer_atom(self, ctx: Ctx, e: Expr, erased: bool) -> tuple[Expr, Value]:
        match e:
            case Var(x):
                b = ctx.lookup(x)
                assert b is not None, f"unbound variable {x!r} after scope checking"
                self._use_check(ctx, x, erased, e.pos)
                if isinstance(self.ev.whnf(b.type), VSizeU):
                    return Size(SVar(x), e.pos), b.type
                return e, b.type
            case Def(x):
                entry = self.sig[x]
                match entry:
                    case DataEntry():
                        return e, entry.kind_value
                    case FunEntry() | LetEntry():
                        return e, getattr(entry, "type_value")
                raise AssertionError(entry)
            case Con(x):
                return e, self.sig.con(x).type_value
        raise AssertionError(e)

    def infer(self, ctx: Ctx, e: Expr, erased: bool) -> tuple[Expr, Value]:
        match e:
            case Var(_) | Con(_):
                return self._infer_atom(ctx, e, erased)
            case Def(x):
                elab, ty = self._infer_atom(ctx, e, erased)
                if self.calls is not None and self.current == x.uid:
                    self.calls.append(
                        CallSite([], None, ctx.sctx, self.clause_lhs_size,
                                 self.clause_index, e.pos)
                    )
                return elab, ty
            case Pi(_, _, _, _):
                return self.check_type(ctx, e), VSet()
            case Size(_):
                return Size(self.as_size(ctx, e, erased), e.pos), VSizeU()
            case App(_, _):
                return self._infer_app(ctx, e, erased)
            case SetU():
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "Set has no inferable type; it may only appear where a "
                    "type is expected",
                    e.pos,
                )
            case SizeU():
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "Size may only appear where a type is expected",
                    e.pos,
                )
            case Lam(_, _):
                raise Diagnostic(
                    "TYPE-MISMATCH", "cannot infer the type of a lambda", e.pos
                )
            case CaseSize(_, _, _) | CaseData(_, _):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "a case expression is only accepted where its type is known",
                    e.pos,
                )
        raise AssertionError(f"infer: unhandled node {e!r}")

    def _infer_app(self, ctx: Ctx, e: App, erased: bool) -> tuple[Expr, Value]:
        head = e
        args: list[Expr] = []
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fun
        args.reverse()

        is_self = (
            isinstance(head, Def)
            and self.calls is not None
            and self.current == head.name.uid
        )
        if isinstance(head, (Var, Def, Con)):
            elab, fty = self._infer_atom(ctx, head, erased)
        else:
            elab, fty = self.infer(ctx, head, erased)

        arg_elabs: list[Expr] = []
        size_arg: NormalSize | None = None
        size_param = None
        if is_self:
            size_param = self.sig.fun(head.name).size_param

        for k, arg in enumerate(args):
            fty = self.ev.whnf(fty)
            if not isinstance(fty, VPi):
                raise Diagnostic(
                    "NOT-A-FUNCTION",
                    f"'{pretty(self.ev.quote(fty))}' is applied to too many "
                    "arguments",
                    arg.pos,
                )
            arg_erased = erased or fty.annot is Annot.PARAMETRIC
            dom = self.ev.whnf(fty.domain)
            if isinstance(dom, VSizeU):
                se = self.as_size(ctx, arg, arg_erased)
                ns = self.ev.eval_size(ctx.env, se)
                arg_elab: Expr = Size(se, arg.pos)
                val: Value = VSize(ns)
                if is_self and k == size_param:
                    size_arg = ns
            else:
                arg_elab = self.check(ctx, arg, dom, arg_erased)
                val = self.ev.evaluate(ctx.env, arg_elab)
            elab = App(elab, arg_elab, fty.annot, arg.pos)
            arg_elabs.append(arg_elab)
            fty = self.ev.instantiate(fty, val)

        if is_self:
            self.calls.append(
                CallSite(arg_elabs, size_arg, ctx.sctx, self.clause_lhs_size,
                         self.clause_index, e.pos)
            )
        return elab, fty

    def check(self, ctx: Ctx, e: Expr, expected: Value, erased: bool) -> Expr:
        expected = self.ev.whnf(expected)
        match e:
            case Lam(x, body, pos):
                if not isinstance(expected, VPi):
                    raise Diagnostic(
                        "TYPE-MISMATCH",
                        f"lambda checked against non-function type "
                        f"'{pretty(self.ev.quote(expected))}'",
                        pos,
                    )
                ctx2 = ctx.bind(x, self.ev.whnf(expected.domain), expected.annot)
                body_ty = self.ev.instantiate(expected, self.ev.force(ctx2.env[x.uid]))
                return Lam(x, self.check(ctx2, body, body_ty, erased), pos)
            case CaseSize(_, _, _):
                return self._check_case_size(ctx, e, expected, erased)
            case CaseData(_, _):
                return self._check_case_data(ctx, e, expected, erased)
            case SetU():
                if isinstance(expected, VSet):
                    return e
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    f"Set checked against '{pretty(self.ev.quote(expected))}'",
                    e.pos,
                )
            case Pi(_, _, _, _):
                if isinstance(expected, VSet):
                    return self.check_type(ctx, e)
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    f"function type checked against "
                    f"'{pretty(self.ev.quote(expected))}'",
                    e.pos,
                )
            case Size(s) if isinstance(expected, VSizeU):
                return Size(self.as_size(ctx, e, erased), e.pos)
            case Size(SMeta(_)):
                raise Diagnostic(
                    "UNSOLVED-META",
                    f"a hole '_' stands for a size, but "
                    f"'{pretty(self.ev.quote(expected))}' is expected here",
                    e.pos,
                )
            case _:
                elab, ty = self.infer(ctx, e, erased)
                if not self.subtype(ctx, ty, expected):
                    raise Diagnostic(
                        "TYPE-MISMATCH",
                        f"expected '{pretty(self.ev.quote(expected))}', got "
                        f"'{pretty(self.ev.quote(ty))}'",
                        e.pos,
                    )
                return elab

    def _check_case_size(self, ctx: Ctx, e: CaseSize, expected: Value, erased: bool) -> Expr:
        ns = self.ev.eval_size(ctx.env, e.scrut)
        if not (ns.is_atom() and not ns.is_infty() and ns.atom()[1] == 0
                and isinstance(ns.atom()[0], Ident)):
            raise Diagnostic(
                "ADMISSIBILITY",
                "case on a size requires a plain size variable scrutinee",
                e.pos,
            )
        i: Ident = ns.atom()[0]
        reason = admissibility_check(self.ev, self.sig, expected, i, cofun=True)
        if reason is not None:
            raise Diagnostic("ADMISSIBILITY", reason, e.pos)
        j = e.binder
        ctx2 = ctx.bind(j, VSizeU(), Annot.PARAMETRIC, hypothesis=(ns_var(i), True))
        succ_j = Size(SSucc(SVar(j)), e.pos)
        branch = substitute(e.branch, i, succ_j)
        expected_q = substitute(self.ev.quote(expected), i, succ_j)
        expected2 = self.ev.evaluate(ctx2.env, expected_q)
        branch_elab = self.check(ctx2, branch, expected2, erased)
        return CaseSize(SVar(i), j, branch_elab, e.pos)

    def _check_case_data(self, ctx: Ctx, e: CaseData, expected: Value, erased: bool) -> Expr:
        scrut, sty = self.infer(ctx, e.scrut, erased)
        sty = self.ev.whnf(sty)
        if not isinstance(sty, VData):
            raise Diagnostic(
                "TYPE-MISMATCH",
                f"case scrutinee must have a data type, got "
                f"'{pretty(self.ev.quote(sty))}'",
                e.pos,
            )
        out = []
        for pat, body in e.branches:
            if not isinstance(pat, PCon):
                raise Diagnostic(
                    "TYPE-MISMATCH",
                    "case branches must match a constructor",
                    pat.pos,
                )
            ctx2, _, obligations, pat2 = self._elab_con_pattern(
                ctx, sty, Annot.RELEVANT, pat
            )
            self._check_obligations(ctx2, obligations)
            out.append((pat2, self.check(ctx2, body, expected, erased)))
        return CaseData(scrut, out, e.pos)

    # -- subtyping ----------------------------------------------------------------

    def subtype(self, ctx: Ctx, a: Value, b: Value) -> bool:
        """a <= b: sized inductive types are covariant and sized coinductive
        types contravariant in their size index, parameters follow their
        declared polarity, Pi is contravariant/covariant, and everything else
        falls back to conversion."""
        a = self.ev.whnf(a)
        b = self.ev.whnf(b)
        if (
            isinstance(a, VData)
            and isinstance(b, VData)
            and a.name == b.name
            and len(a.args) == len(b.args)
        ):
            entry = self.sig.data(a.name)
            n_params = len(entry.params)
            for k, (ta, tb) in enumerate(zip(a.args, b.args)):
                va, vb = self.ev.force(ta), self.ev.force(tb)
                if k < n_params:
                    pol = entry.params[k][1]
                    if pol in (Polarity.STRICT_POS, Polarity.POS):
                        ok = self.subtype(ctx, va, vb)
                    elif pol is Polarity.NEG:
                        ok = self.subtype(ctx, vb, va)
                    elif pol is Polarity.UNUSED:
                        ok = True
                    else:
                        ok = self.ev.convertible(va, vb, ctx.sctx, self.collector)
                elif entry.sized and k == n_params:
                    sa, sb = self.ev._as_size(va), self.ev._as_size(vb)
                    if sa is None or sb is None:
                        ok = False
                    elif entry.coinductive:
                        ok = self.ev.size_entails(ctx.sctx, sb, Rel.LE, sa, self.collector)
                    else:
                        ok = self.ev.size_entails(ctx.sctx, sa, Rel.LE, sb, self.collector)
                else:
                    ok = self.ev.convertible(va, vb, ctx.sctx, self.collector)
                if not ok:
                    return False
            return True
        if isinstance(a, VPi) and isinstance(b, VPi):
            if a.annot is not b.annot:
                return False
            if not self.subtype(ctx, self.ev.whnf(b.domain), self.ev.whnf(a.domain)):
                return False
            x = self.ev.fresh_neutral(a.binder.text, self.ev.whnf(b.domain))
            return self.subtype(
                ctx, self.ev.instantiate(a, x), self.ev.instantiate(b, x)
            )
        return self.ev.convertible(a, b, ctx.sctx, self.collector)
