"""Weak-head evaluation, runtime matching, readback and conversion."""

import pytest

from sizedcheck.evaluator import Evaluator
from sizedcheck.pretty import pretty
from sizedcheck.sizes import SizeCtx, ns_infty, ns_var
from sizedcheck.syntax import Annot, Def, Elided, fresh_ident
from sizedcheck.values import Thunk, VCon, VDef, VNe, VSize

from conftest import NAT, SNAT_PARAMETRIC, STREAM, build

PRED = SNAT_PARAMETRIC + """
fun pred : [i : Size] -> SNat ($$ i) -> SNat ($ i)
{ pred i (succ .($ i) n) = n
; pred i (zero .($ i))   = zero i
}

eval let one : SNat # = pred # (succ # (zero #))
"""


class TestEvaluate:
    def test_pred_unfolds_to_constructor(self):
        ch, decls, outputs = build(PRED)
        name = ch.sig.by_text["one"]
        v = ch.ev.whnf(ch.ev.evaluate({}, Def(name)))
        assert isinstance(v, VCon) and v.con.text == "zero"
        assert outputs == ["one = zero _"]

    def test_leq_picks_first_branch(self):
        src = NAT + """
fun leq : Nat -> Nat -> [C : Set] -> C -> C -> C
{ leq  zero     y       C t f = t
; leq (succ x)  zero    C t f = f
; leq (succ x) (succ y) C t f = leq x y C t f
}
eval let t : Nat = leq zero zero Nat (succ zero) zero
eval let f : Nat = leq (succ zero) zero Nat (succ zero) zero
"""
        _, _, outputs = build(src)
        assert outputs == ["t = succ zero", "f = zero"]

    def test_repeat_head_unfolds_once(self):
        src = NAT + STREAM + """
fun head : [A : Set] -> [i : Size] -> Stream A ($ i) -> A
{ head A i (cons .A .i a as) = a
}
cofun repeat : [A : Set] -> (a : A) -> [i : Size] -> Stream A i
{ repeat A a ($ i) = cons A i a (repeat A a i)
}
eval let hd : Nat = head Nat # (repeat Nat (succ zero) #)
"""
        _, _, outputs = build(src)
        assert outputs == ["hd = succ zero"]

    def test_cofun_stays_suspended_until_demanded(self):
        src = NAT + STREAM + """
cofun repeat : [A : Set] -> (a : A) -> [i : Size] -> Stream A i
{ repeat A a ($ i) = cons A i a (repeat A a i)
}
let r : Stream Nat # = repeat Nat zero #
"""
        ch, _, _ = build(src)
        v = ch.ev.evaluate({}, Def(ch.sig.by_text["r"]))
        assert isinstance(v, VDef) and v.name.text == "repeat"
        assert isinstance(ch.ev.whnf(v), VCon)


class TestMatchClauses:
    def test_minus_first_match_order(self):
        src = SNAT_PARAMETRIC + """
fun minus : [i : Size] -> SNat i -> SNat # -> SNat i
{ minus i (zero (i > j))    y          = zero j
; minus i  x               (zero .#)   = x
; minus i (succ (i > j) x) (succ .# y) = minus j x y
}
"""
        ch, _, _ = build(src)
        ev = ch.ev
        entry = ch.sig.fun(ch.sig.by_text["minus"])
        inf = Thunk.of(VSize(ns_infty()))
        zero = ch.sig.by_text["zero"]
        succ = ch.sig.by_text["succ"]
        z = Thunk.of(VCon(zero, [inf]))
        sz = Thunk.of(VCon(succ, [inf, z]))
        env, clause = ev.match_clauses(entry.clauses, [inf, z, sz])
        assert clause is entry.clauses[0]  # zero-headed first argument
        env, clause = ev.match_clauses(entry.clauses, [inf, sz, z])
        assert clause is entry.clauses[1]  # second clause catches zero y

    def test_wildcards_match_without_forcing(self):
        src = NAT + """
fun const : Nat -> Nat -> Nat
{ const x _ = x
}
eval let c : Nat = const zero (succ zero)
"""
        _, _, outputs = build(src)
        assert outputs == ["c = zero"]

    def test_fallback_clause_catches_rest(self):
        src = NAT + """
fun classify : Nat -> Nat
{ classify (succ (succ n)) = succ zero
; classify n = zero
}
eval let a : Nat = classify zero
eval let b : Nat = classify (succ (succ (succ zero)))
"""
        _, _, outputs = build(src)
        assert outputs == ["a = zero", "b = succ zero"]

    def test_stuck_on_neutral(self):
        from sizedcheck.evaluator import _STUCK

        src = SNAT_PARAMETRIC + """
fun pred : [i : Size] -> SNat ($$ i) -> SNat ($ i)
{ pred i (succ .($ i) n) = n
; pred i (zero .($ i))   = zero i
}
"""
        ch, _, _ = build(src)
        entry = ch.sig.fun(ch.sig.by_text["pred"])
        x = fresh_ident("x")
        r = ch.ev.match_clauses(
            entry.clauses, [Thunk.of(VSize(ns_infty())), Thunk.of(VNe(x))]
        )
        assert r is _STUCK


class TestReadback:
    def test_inductive_numeral_prints_fully(self):
        src = SNAT_PARAMETRIC + "eval let three : SNat # = succ # (succ # (succ # (zero #)))"
        _, _, outputs = build(src)
        assert outputs == ["three = succ _ (succ _ (succ _ (zero _)))"]

    def test_coinductive_elided_at_depth(self):
        src = NAT + STREAM + """
cofun repeat : [A : Set] -> (a : A) -> [i : Size] -> Stream A i
{ repeat A a ($ i) = cons A i a (repeat A a i)
}
let r : Stream Nat # = repeat Nat zero #
"""
        ch, _, _ = build(src)
        v = ch.ev.evaluate({}, Def(ch.sig.by_text["r"]))
        e = ch.ev.readback(v, depth=2)
        assert pretty(e) == "cons _ zero (cons _ zero …)"
        assert isinstance(ch.ev.readback(v, depth=0), Elided)

    def test_set_value(self):
        src = "eval let T : Set = Set"
        _, _, outputs = build(src)
        assert outputs == ["T = Set"]

    def test_print_sizes_shows_erased_arguments(self):
        from sizedcheck.checker import Checker
        from sizedcheck.parser import parse_source
        from sizedcheck.scope import scope_check

        src = SNAT_PARAMETRIC + "eval let one : SNat # = succ # (zero #)"
        ch = Checker(print_sizes=True)
        _, outputs = ch.check_program(scope_check(parse_source(src)))
        assert outputs == ["one = succ # (zero #)"]


class TestConvertible:
    def test_parametric_arguments_ignored(self):
        ch, _, _ = build(PRED)
        ev = ch.ev
        pred = ch.sig.by_text["pred"]
        i, j, n = fresh_ident("i"), fresh_ident("j"), fresh_ident("n")
        sctx = SizeCtx().declare(i).declare(j)

        def app(size_var):
            v = VDef(pred, [])
            v = ev.apply(v, Thunk.of(VSize(ns_var(size_var))), Annot.PARAMETRIC)
            return ev.apply(v, Thunk.of(VNe(n)), Annot.RELEVANT)

        assert ev.convertible(app(i), app(j), sctx)

    def test_set_reflexive(self):
        ch, _, _ = build("")
        from sizedcheck.values import VSet

        assert ch.ev.convertible(VSet(), VSet())

    def test_type_level_unfolding(self):
        src = SNAT_PARAMETRIC + """
fun Maxs : SNat # -> Size -> Set
{ Maxs (zero .#  ) i = SNat i
; Maxs (succ .# n) i = SNat i -> Maxs n i
}
let probe1 : (i : Size) -> Set = \\ i -> Maxs (succ # (zero #)) i
let probe2 : (i : Size) -> Set = \\ i -> SNat i -> SNat i
"""
        ch, _, _ = build(src)
        ev = ch.ev
        i = fresh_ident("i")
        sctx = SizeCtx().declare(i)
        v1 = ev.apply(ev.evaluate({}, Def(ch.sig.by_text["probe1"])),
                      Thunk.of(VSize(ns_var(i))), Annot.RELEVANT)
        v2 = ev.apply(ev.evaluate({}, Def(ch.sig.by_text["probe2"])),
                      Thunk.of(VSize(ns_var(i))), Annot.RELEVANT)
        assert ev.convertible(v1, v2, sctx)

    def test_different_constructors_differ(self):
        ch, _, _ = build(NAT)
        zero = ch.sig.by_text["zero"]
        succ = ch.sig.by_text["succ"]
        z = VCon(zero, [])
        sz = VCon(succ, [Thunk.of(z)])
        assert not ch.ev.convertible(z, sz)
        assert ch.ev.convertible(sz, VCon(succ, [Thunk.of(VCon(zero, []))]))


class TestThunks:
    def test_memoization_forces_once(self):
        src = SNAT_PARAMETRIC + "let three : SNat # = succ # (succ # (succ # (zero #)))"
        ch, _, _ = build(src)
        ev = ch.ev
        th = Thunk({}, Def(ch.sig.by_text["three"]))
        before = ev.forces
        v1 = ev.force(th)
        mid = ev.forces
        v2 = ev.force(th)
        assert v1 is v2
        assert mid > before  # the first force computed
        assert ev.forces == mid  # the second was free

    def test_fuel_exhaustion_is_reported(self):
        from sizedcheck.checker import Checker
        from sizedcheck.diagnostics import Diagnostic
        from sizedcheck.parser import parse_source
        from sizedcheck.scope import scope_check

        src = NAT + STREAM + """
cofun repeat : [A : Set] -> (a : A) -> [i : Size] -> Stream A i
{ repeat A a ($ i) = cons A i a (repeat A a i)
}
let r : Stream Nat # = repeat Nat zero #
"""
        ch = Checker(unfold_fuel=5)
        ch.check_program(scope_check(parse_source(src)))
        v = ch.ev.evaluate({}, Def(ch.sig.by_text["r"]))
        ch.ev.reset_budget()
        with pytest.raises(Diagnostic) as e:
            ch.ev.readback(v, depth=50)
        assert e.value.code == "FUEL"
