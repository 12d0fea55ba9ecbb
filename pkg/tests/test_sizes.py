"""Size algebra: normalization, entailment, hypothesis contexts, and the
hole solver, against hand-checked and brute-forced expectations."""

import pytest

from sizedcheck.sizes import (
    Ambiguous,
    NormalSize,
    Rel,
    ShadowedVariable,
    SizeConstraint,
    SizeCtx,
    UnknownVariable,
    Unsolvable,
    add_hypothesis,
    bump,
    entails,
    format_size,
    normalize,
    ns_infty,
    ns_max,
    ns_meta,
    ns_var,
    solve_metas,
    to_size_expr,
)
from sizedcheck.syntax import SInfty, SMax, SMeta, SSucc, SVar, fresh_ident

i = fresh_ident("i")
j = fresh_ident("j")
k = fresh_ident("k")


def ctx_of(*vars_):
    c = SizeCtx()
    for v in vars_:
        c = c.declare(v)
    return c


class TestNormalize:
    def test_fold_two_successors(self):
        assert normalize(SSucc(SSucc(SVar(i)))) == ns_var(i, 2)

    def test_successor_of_infinity_collapses(self):
        assert normalize(SSucc(SInfty())) == ns_infty()

    def test_max_dominance(self):
        # max ($ i) i = i+1, verified by brute force over valuations
        got = normalize(SMax(SSucc(SVar(i)), SVar(i)))
        assert got == ns_var(i, 1)
        for v in range(6):
            assert max(v + 1, v) == v + 1

    def test_max_keeps_incomparable_bases(self):
        got = normalize(SMax(SVar(i), SVar(j)))
        assert got == ns_max(ns_var(i), ns_var(j))

    def test_idempotent(self):
        cases = [
            SSucc(SMax(SVar(i), SSucc(SVar(j)))),
            SMax(SInfty(), SVar(i)),
            SMeta(7),
        ]
        for s in cases:
            once = normalize(s)
            assert normalize(to_size_expr(once)) == once

    def test_roundtrip_through_expr(self):
        ns = ns_max(ns_var(i, 2), ns_var(j))
        assert normalize(to_size_expr(ns)) == ns


class TestEntails:
    def test_strict_hypothesis_gives_successor_bound(self):
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i), strict=True)
        assert entails(ctx, bump(ns_var(j), 1), Rel.LE, ns_var(i))

    def test_reflexivity(self):
        assert entails(ctx_of(i), ns_var(i), Rel.LE, ns_var(i))

    def test_no_max_inversion(self):
        # {j < i, k < i} does not entail i <= max j k (take j = k = 0, i = 1)
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        ctx = add_hypothesis(ctx, k, ns_var(i))
        assert not entails(ctx, ns_var(i), Rel.LE, ns_max(ns_var(j), ns_var(k)))

    def test_anything_below_infinity(self):
        ctx = ctx_of(i)
        assert entails(ctx, ns_var(i, 5), Rel.LE, ns_infty())
        assert entails(ctx, ns_var(i), Rel.LT, ns_infty())
        assert entails(ctx, ns_infty(), Rel.LE, ns_infty())
        assert not entails(ctx, ns_infty(), Rel.LT, ns_infty())
        assert not entails(ctx, ns_infty(), Rel.LE, ns_var(i))

    def test_offset_rule_same_base(self):
        ctx = ctx_of(i)
        assert entails(ctx, ns_var(i, 1), Rel.LE, ns_var(i, 2))
        assert not entails(ctx, ns_var(i, 2), Rel.LE, ns_var(i, 1))
        assert entails(ctx, ns_var(i), Rel.LT, ns_var(i, 1))
        assert not entails(ctx, ns_var(i), Rel.LT, ns_var(i))

    def test_max_left_is_conjunction(self):
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        ctx = add_hypothesis(ctx, k, ns_var(i))
        m = ns_max(ns_var(j), ns_var(k))
        assert entails(ctx, m, Rel.LT, ns_var(i))
        assert entails(ctx, m, Rel.LE, ns_var(i, 3))

    def test_max_right_is_disjunction(self):
        ctx = ctx_of(i, j)
        assert entails(ctx, ns_var(i), Rel.LE, ns_max(ns_var(i), ns_var(j)))

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            entails(SizeCtx(), ns_var(i), Rel.LE, ns_var(i))


class TestAddHypothesis:
    def test_basic_edge(self):
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        assert entails(ctx, ns_var(j), Rel.LT, ns_var(i))

    def test_top_element(self):
        ctx = add_hypothesis(SizeCtx(), j, ns_infty())
        assert entails(ctx, ns_var(j), Rel.LE, ns_infty())
        assert not entails(ctx, ns_infty(), Rel.LE, ns_var(j))

    def test_offset_accumulation(self):
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        ctx = add_hypothesis(ctx, k, ns_var(j))
        assert entails(ctx, ns_var(k, 2), Rel.LE, ns_var(i))
        assert not entails(ctx, ns_var(k, 3), Rel.LE, ns_var(i))

    def test_shadowing_rejected(self):
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        with pytest.raises(ShadowedVariable):
            add_hypothesis(ctx, j, ns_var(i))

    def test_original_unchanged(self):
        base = ctx_of(i)
        add_hypothesis(base, j, ns_var(i))
        assert j not in base.scope


class TestSolveMetas:
    def test_direct_assignment(self):
        ctx = ctx_of(i)
        # m = i as a pair of inequalities
        cs = [
            SizeConstraint(ns_meta(1), Rel.LE, ns_var(i)),
            SizeConstraint(ns_var(i), Rel.LE, ns_meta(1)),
        ]
        sol = solve_metas(cs, ctx, {1})
        assert sol[1] == ns_var(i)

    def test_least_solution_with_lower_bound(self):
        # {m <= i, $ j <= m} under {j < i}: least solution m = j+1
        ctx = add_hypothesis(ctx_of(i), j, ns_var(i))
        cs = [
            SizeConstraint(ns_meta(1), Rel.LE, ns_var(i)),
            SizeConstraint(ns_var(j, 1), Rel.LE, ns_meta(1)),
        ]
        sol = solve_metas(cs, ctx, {1})
        assert sol[1] == ns_var(j, 1)
        # brute-force check over candidate bases {j, i} and offsets 0..2:
        # j+1 is the least candidate satisfying both constraints
        candidates = [(b, o) for b in ("j", "i") for o in range(3)]
        vals = {"j": 0, "i": 2}
        feasible = [
            (b, o)
            for b, o in candidates
            if vals[b] + o <= vals["i"] and vals["j"] + 1 <= vals[b] + o
        ]
        assert min(feasible, key=lambda p: vals[p[0]] + p[1]) == ("j", 1)

    def test_unsolvable_needs_subtraction(self):
        # j <= m+2 with no successor structure below j: no expressible hole
        ctx = ctx_of(j)
        cs = [SizeConstraint(ns_var(j), Rel.LE, ns_meta(1, 2))]
        with pytest.raises(Unsolvable):
            solve_metas(cs, ctx, {1})

    def test_ambiguous_when_unconstrained(self):
        with pytest.raises(Ambiguous):
            solve_metas([], SizeCtx(), {1})

    def test_infinity_fallback_for_upper_only(self):
        # $ m <= # constrains nothing; the hole defaults to #
        cs = [SizeConstraint(ns_meta(1, 1), Rel.LE, ns_infty())]
        sol = solve_metas(cs, SizeCtx(), {1})
        assert sol[1] == ns_infty()

    def test_dependency_chain(self):
        ctx = ctx_of(i)
        cs = [
            SizeConstraint(ns_var(i), Rel.LE, ns_meta(1)),
            SizeConstraint(ns_meta(1, 1), Rel.LE, ns_meta(2)),
            SizeConstraint(ns_meta(2, 1), Rel.LE, ns_var(i, 2)),
        ]
        sol = solve_metas(cs, ctx, {1, 2})
        assert sol[1] == ns_var(i)
        assert sol[2] == ns_var(i, 1)

    def test_reverification_catches_conflicts(self):
        ctx = ctx_of(i, j)
        # j <= m and m <= i is unsolvable without a hypothesis relating them
        cs = [
            SizeConstraint(ns_var(j), Rel.LE, ns_meta(1)),
            SizeConstraint(ns_meta(1), Rel.LE, ns_var(i)),
        ]
        with pytest.raises(Unsolvable):
            solve_metas(cs, ctx, {1})


class TestFormat:
    def test_stable_textual_form(self):
        naming = {1: "m1"}
        assert format_size(ns_meta(1), naming) == "m1"
        assert format_size(ns_var(i, 1)) == "i+1"
        assert format_size(ns_infty()) == "#"
        assert format_size(ns_max(ns_var(i, 1), ns_var(j))) in (
            "max(i+1, j)",
            "max(j, i+1)",
        )
