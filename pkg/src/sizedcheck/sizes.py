"""Size algebra: canonical forms for size expressions, entailment of size
inequalities under a hypothesis context, and solving of size holes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .syntax import (
    Ident,
    SInfty,
    SizeExpr,
    SMax,
    SMeta,
    SSucc,
    SVar,
)

MAX_OFFSET = 1 << 16


class _Infty:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "#"


INFTY = _Infty()


@dataclass(frozen=True)
class Meta:
    """Canonical base for an unsolved size hole."""

    mid: int

    def __repr__(self):
        return f"?{self.mid}"


# A base is an Ident, a Meta, or INFTY.
Base = object


@dataclass(frozen=True)
class NormalSize:
    """Canonical size: a non-empty set of (base, offset) pairs, read as the
    maximum of base+offset.  INFTY absorbs everything and successor chains are
    folded into offsets, so # keeps offset 0."""

    pairs: frozenset

    def is_infty(self) -> bool:
        return any(b is INFTY for b, _ in self.pairs)

    def is_atom(self) -> bool:
        return len(self.pairs) == 1

    def atom(self) -> tuple[Base, int]:
        (p,) = self.pairs
        return p

    def vars(self) -> set[Ident]:
        return {b for b, _ in self.pairs if isinstance(b, Ident)}

    def metas(self) -> set[int]:
        return {b.mid for b, _ in self.pairs if isinstance(b, Meta)}

    def __repr__(self):
        return format_size(self)


def _prune(pairs) -> frozenset:
    best: dict = {}
    for b, n in pairs:
        if b is INFTY:
            return frozenset({(INFTY, 0)})
        if n > MAX_OFFSET:
            raise OffsetOverflow(f"size offset exceeds {MAX_OFFSET}")
        if b not in best or best[b] < n:
            best[b] = n
    return frozenset(best.items())


def ns_var(x: Ident, offset: int = 0) -> NormalSize:
    return NormalSize(frozenset({(x, offset)}))


def ns_meta(mid: int, offset: int = 0) -> NormalSize:
    return NormalSize(frozenset({(Meta(mid), offset)}))


def ns_infty() -> NormalSize:
    return NormalSize(frozenset({(INFTY, 0)}))


def bump(ns: NormalSize, n: int) -> NormalSize:
    if ns.is_infty():
        return ns
    return NormalSize(_prune((b, k + n) for b, k in ns.pairs))


def ns_max(a: NormalSize, b: NormalSize) -> NormalSize:
    return NormalSize(_prune(list(a.pairs) + list(b.pairs)))


def subst_base(ns: NormalSize, base: Base, repl: NormalSize) -> NormalSize:
    out = []
    for b, n in ns.pairs:
        if b == base:
            out.extend(bump(repl, n).pairs)
        else:
            out.append((b, n))
    return NormalSize(_prune(out))


def normalize(s: SizeExpr, lookup=None) -> NormalSize:
    """Fold successors into offsets, collapse $ # to #, flatten max.

    `lookup` optionally maps a size variable to an already-normalized size
    (used when evaluating under an environment)."""
    match s:
        case SVar(x):
            if lookup is not None:
                ns = lookup(x)
                if ns is not None:
                    return ns
            return ns_var(x)
        case SSucc(a):
            return bump(normalize(a, lookup), 1)
        case SInfty():
            return ns_infty()
        case SMax(a, b):
            return ns_max(normalize(a, lookup), normalize(b, lookup))
        case SMeta(m):
            return ns_meta(m)
    raise AssertionError(f"normalize: unhandled {s!r}")


def to_size_expr(ns: NormalSize) -> SizeExpr:
    def atom(b: Base, n: int) -> SizeExpr:
        if b is INFTY:
            e: SizeExpr = SInfty()
        elif isinstance(b, Meta):
            e = SMeta(b.mid)
        else:
            e = SVar(b)
        for _ in range(n):
            e = SSucc(e)
        return e

    parts = sorted(ns.pairs, key=_pair_key)
    e = atom(*parts[0])
    for b, n in parts[1:]:
        e = SMax(e, atom(b, n))
    return e


def _pair_key(pair):
    b, n = pair
    if b is INFTY:
        return (2, 0, n)
    if isinstance(b, Meta):
        return (1, b.mid, n)
    return (0, b.uid, n)


def format_size(ns: NormalSize, meta_names: dict[int, str] | None = None) -> str:
    def one(b: Base, n: int) -> str:
        if b is INFTY:
            return "#"
        if isinstance(b, Meta):
            base = meta_names[b.mid] if meta_names else f"?{b.mid}"
        else:
            base = b.text
        return f"{base}+{n}" if n else base

    parts = [one(b, n) for b, n in sorted(ns.pairs, key=_pair_key)]
    if len(parts) == 1:
        return parts[0]
    return "max(" + ", ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Hypothesis contexts and entailment


class UnknownVariable(Exception):
    pass


class ShadowedVariable(Exception):
    pass


class OffsetOverflow(Exception):
    pass


@dataclass(frozen=True)
class SizeCtx:
    """Hypotheses child < parent (or child <= parent) gathered from size and
    successor patterns.  Children are always freshly bound, so the strict
    edges are acyclic.  All operations return new contexts."""

    scope: frozenset = frozenset()
    edges: tuple = ()  # (child, parent NormalSize, strict)

    def declare(self, x: Ident) -> "SizeCtx":
        if x in self.scope:
            raise ShadowedVariable(x.text)
        return SizeCtx(self.scope | {x}, self.edges)

    def add(self, child: Ident, parent: NormalSize, strict: bool) -> "SizeCtx":
        if child in self.scope:
            raise ShadowedVariable(child.text)
        missing = parent.vars() - self.scope
        if missing:
            raise UnknownVariable(next(iter(missing)).text)
        return SizeCtx(self.scope | {child}, self.edges + ((child, parent, strict),))

    def out_edges(self, x: Ident):
        return [(p, s) for c, p, s in self.edges if c == x]


def add_hypothesis(ctx: SizeCtx, child: Ident, parent: NormalSize, strict: bool = True) -> SizeCtx:
    return ctx.add(child, parent, strict)


class Rel(Enum):
    LE = "<="
    LT = "<"
    EQ = "="


def _check_scope(ctx: SizeCtx, ns: NormalSize):
    missing = ns.vars() - ctx.scope
    if missing:
        raise UnknownVariable(next(iter(missing)).text)


def _best_gain(ctx: SizeCtx, x: Ident, y: Base) -> int | None:
    """Largest g such that the hypotheses prove x + g <= y, or None."""
    best: dict = {x: 0}
    frontier = [x]
    while frontier:
        v = frontier.pop()
        g = best[v]
        for parent, strict in ctx.out_edges(v):
            if not parent.is_atom():
                continue  # a max-parent gives only disjunctive information
            b, k = parent.atom()
            if b is INFTY or isinstance(b, Meta):
                continue
            g2 = g + (1 if strict else 0) - k
            if b not in best or best[b] < g2:
                best[b] = g2
                frontier.append(b)
    return best.get(y)


def _atom_le(ctx: SizeCtx, a: tuple, b: tuple) -> bool:
    (xb, n), (yb, m) = a, b
    if xb == yb:
        return n <= m
    if isinstance(xb, Meta) or isinstance(yb, Meta):
        return False
    g = _best_gain(ctx, xb, yb)
    return g is not None and g >= n - m


def entails(ctx: SizeCtx, a: NormalSize, rel: Rel, b: NormalSize) -> bool:
    """Sound entailment of a <= b or a < b under ctx; complete on the
    max-free fragment.  A max on the left splits into a conjunction, a max
    on the right into a disjunction."""
    _check_scope(ctx, a)
    _check_scope(ctx, b)
    if rel is Rel.EQ:
        return entails(ctx, a, Rel.LE, b) and entails(ctx, b, Rel.LE, a)
    if len(a.pairs) > 1:
        return all(
            entails(ctx, NormalSize(frozenset({p})), rel, b) for p in a.pairs
        )
    if a.is_infty():
        return rel is Rel.LE and b.is_infty()
    if b.is_infty():
        # variables never denote the closure ordinal itself
        return True
    if len(b.pairs) > 1:
        return any(
            entails(ctx, a, rel, NormalSize(frozenset({q}))) for q in b.pairs
        )
    xa, na = a.atom()
    if rel is Rel.LT:
        return _atom_le(ctx, (xa, na + 1), b.atom())
    return _atom_le(ctx, (xa, na), b.atom())


# ---------------------------------------------------------------------------
# Metavariable solving


@dataclass(frozen=True)
class SizeConstraint:
    lhs: NormalSize
    rel: Rel
    rhs: NormalSize
    # hypothesis context at the collection site; constraints may be gathered
    # under binders deeper than the clause context they are solved in
    sctx: SizeCtx | None = None

    def metas(self) -> set[int]:
        return self.lhs.metas() | self.rhs.metas()


class Unsolvable(Exception):
    pass


class Ambiguous(Exception):
    pass


def _subst_solution(ns: NormalSize, sol: dict[int, NormalSize]) -> NormalSize:
    for mid, val in sol.items():
        ns = subst_base(ns, Meta(mid), val)
    return ns


def solve_metas(
    constraints: list[SizeConstraint],
    ctx: SizeCtx,
    known_metas: set[int] | None = None,
) -> dict[int, NormalSize]:
    """First-order solving of the size holes of one clause.

    Lower bounds s <= m+n are shifted into solved form only when the left
    offset covers n (there is no subtraction below a variable); each hole
    takes the least solution consistent with its lower bounds, holes without
    lower bounds fall back to #, and every constraint is re-verified."""
    mids: set[int] = set(known_metas or set())
    for c in constraints:
        mids |= c.metas()
    if known_metas:
        unconstrained = {m for m in known_metas if not any(m in c.metas() for c in constraints)}
        if unconstrained:
            raise Ambiguous(f"size hole ?{min(unconstrained)} has no constraints")

    # lower bounds per meta: list of NormalSize possibly mentioning other metas
    lower: dict[int, list[NormalSize]] = {m: [] for m in mids}
    for c in constraints:
        strict = c.rel is Rel.LT
        rels = [(c.lhs, c.rhs)]
        if c.rel is Rel.EQ:
            rels = [(c.lhs, c.rhs), (c.rhs, c.lhs)]
        for lhs, rhs in rels:
            if not rhs.is_atom():
                continue  # meta under a max on the right: disjunctive, defer
            rb, rn = rhs.atom()
            if not isinstance(rb, Meta):
                continue
            for lb, ln in lhs.pairs:
                k = ln + (1 if strict else 0)
                if lb is INFTY:
                    lower[rb.mid].append(ns_infty())
                    continue
                if k < rn:
                    raise Unsolvable(
                        f"size hole would need an expression {rn - k} below "
                        f"{format_size(NormalSize(frozenset({(lb, ln)})))}"
                    )
                pair = NormalSize(frozenset({(lb, k - rn)}))
                lower[rb.mid].append(pair)

    sol: dict[int, NormalSize] = {}
    pending = set(mids)
    while pending:
        progressed = False
        for m in sorted(pending):
            bounds = [_subst_solution(b, sol) for b in lower[m]]
            if any(b.metas() for b in bounds):
                continue
            if bounds:
                acc = bounds[0]
                for b in bounds[1:]:
                    acc = ns_max(acc, b)
                sol[m] = acc
            else:
                sol[m] = ns_infty()
            pending.discard(m)
            progressed = True
        if not progressed:
            raise Unsolvable("cyclic size hole constraints")

    for c in constraints:
        lhs = _subst_solution(c.lhs, sol)
        rhs = _subst_solution(c.rhs, sol)
        if not entails(c.sctx if c.sctx is not None else ctx, lhs, c.rel, rhs):
            raise Unsolvable(
                f"no size expression fits: needs "
                f"{format_size(lhs)} {c.rel.value} {format_size(rhs)}"
            )
    return sol
