import random

import pytest
from hypothesis import given, settings

from oracles import eval_formula, primorial_sieve, rand_epa, smallest_period_bruteforce
from presqe.core import free_vars
from presqe.errors import PreconditionError
from presqe.parser import parse
from presqe.qe import eliminate_block
from presqe.semantics import (
    build_sn_formula,
    check_equiv,
    compile_qf,
    decide,
    decide_epa_at,
    eval_qf,
    period_bound_qf,
    primorial,
    smallest_period,
    smallest_period_epa,
    sn_member,
    sn_period_multiple,
)
from strategies import assignments, qf_formulas


class TestEval:
    def test_inequality(self):
        assert eval_qf(parse("(<= x 3)"), {"x": 3})
        assert not eval_qf(parse("(<= x 3)"), {"x": 4})

    def test_negative_residue(self):
        assert eval_qf(parse("(modeq x 1 3)"), {"x": -2})

    def test_rejects_quantifiers(self):
        with pytest.raises(PreconditionError):
            eval_qf(parse("(exists (x) (<= x y))"), {"y": 0})

    @settings(max_examples=300, deadline=None)
    @given(qf_formulas(), assignments())
    def test_matches_independent_evaluator(self, f, sigma):
        assert eval_qf(f, sigma) == eval_formula(f, sigma)

    @settings(max_examples=300, deadline=None)
    @given(qf_formulas(), assignments())
    def test_compiled_matches(self, f, sigma):
        cf = compile_qf(f, ("x", "y", "z", "w"))
        assert cf(*(sigma[v] for v in ("x", "y", "z", "w"))) == eval_qf(f, sigma)
        assert cf.at(sigma) == eval_qf(f, sigma)


class TestDecide:
    def test_equal_bounds(self):
        f = parse("(exists (x) (and (<= x y) (<= (* -1 x) (* -1 y))))")
        assert all(decide_epa_at(f, {"y": y}) for y in range(-5, 6))

    def test_parity(self):
        f = parse("(exists (x) (= (* 2 x) y))")
        assert decide_epa_at(f, {"y": 4})
        assert not decide_epa_at(f, {"y": 3})

    def test_planted_solution_and_infeasible(self):
        rng = random.Random(4)
        for _ in range(40):
            x0, z0 = rng.randint(-9, 9), rng.randint(-9, 9)
            a, b = rng.randint(1, 3), rng.randint(-3, 3)
            f = parse(f"(exists (x z) (and (= (+ (* {a} x) (* {b} z)) y) (<= x {x0}) (<= {x0} x) (<= z {z0}) (<= {z0} z)))")
            assert decide_epa_at(f, {"y": a * x0 + b * z0})
            assert not decide_epa_at(f, {"y": a * x0 + b * z0 + 1})

    def test_universal_rejected(self):
        with pytest.raises(PreconditionError):
            decide(parse("(forall (x) (or (<= x y) (<= y x)))"), {"y": 0})

    def test_agrees_with_elimination(self):
        rng = random.Random(17)
        for _ in range(40):
            f = rand_epa(rng)
            g = eliminate_block(f).formula
            names = sorted(free_vars(f))
            for _ in range(10):
                sigma = {v: rng.randint(-8, 8) for v in names}
                assert decide_epa_at(f, sigma) == eval_qf(g, sigma)


class TestCheckEquiv:
    def test_identical(self):
        f = parse("(<= x y)")
        res = check_equiv(f, f)
        assert res.passed and res.exhaustive

    def test_counterexample(self):
        res = check_equiv(parse("(<= y 0)"), parse("(<= y 1)"))
        assert not res and res.counterexample == {"y": 1}

    def test_sampling_is_seeded(self):
        f, g = parse("(<= (+ x y z w) 30)"), parse("(<= (+ x y z w) 31)")
        a = check_equiv(f, g, box=20, samples=50, seed=3, exhaustive_cap=10)
        b = check_equiv(f, g, box=20, samples=50, seed=3, exhaustive_cap=10)
        assert not a.exhaustive and a == b

    def test_elimination_on_quantified(self):
        f = parse("(exists (x) (and (<= y (* 3 x)) (<= (* 3 x) (+ y 1))))")
        assert check_equiv(f, eliminate_block(f).formula).passed


class TestPeriod:
    def test_single_modulus(self):
        assert smallest_period(parse("(modeq x 2 5)")).period == 5

    def test_union_of_moduli(self):
        f = parse("(or (modeq x 0 4) (modeq x 0 6))")
        d = smallest_period(f)
        assert d.period == 12
        member = lambda n: n % 4 == 0 or n % 6 == 0  # noqa: E731
        assert d.period == smallest_period_bruteforce(member, 24, 0)

    def test_tail_constant(self):
        assert smallest_period(parse("(<= 0 x)")).period == 1

    def test_descriptor_membership(self):
        f = parse("(and (<= 3 x) (modeq x 1 3))")
        d = smallest_period(f)
        for n in list(range(d.threshold, d.threshold + 40)) + list(range(-d.threshold - 40, -d.threshold + 1)):
            assert d.contains(n) == eval_qf(f, {"x": n})
        with pytest.raises(ValueError):
            d.contains(0)

    def test_bound(self):
        assert period_bound_qf(parse("(modeq (* 3 x) 1 5)")) == 5
        assert period_bound_qf(parse("(or (modeq x 0 4) (modeq x 0 6))")) == 24
        assert period_bound_qf(parse("(<= x 7)")) == 1

    @settings(max_examples=150, deadline=None)
    @given(qf_formulas(names=("x",)))
    def test_bound_dominates(self, f):
        if not free_vars(f):
            return
        d = smallest_period(f)
        assert period_bound_qf(f) % d.period == 0

    def test_rejects_two_variables(self):
        with pytest.raises(PreconditionError):
            smallest_period(parse("(<= x y)"))

    def test_epa(self):
        f = parse("(exists (z) (= x (* 3 z)))")
        assert smallest_period_epa(f, 6).period == 3


class TestSn:
    def test_primorial(self):
        assert primorial(4) == 6 and primorial(8) == 210 and primorial(1) == 1
        assert all(primorial(m) == primorial_sieve(m) for m in range(40))

    @pytest.mark.parametrize("a,expected", [(9, True), (5, False), (0, True), (-4, False)])
    def test_membership(self, a, expected):
        assert sn_member(2, a) == expected
        assert decide(build_sn_formula(2), {"a": a}) == expected

    def test_formula_matches_trial_division(self):
        f = build_sn_formula(2)
        for a in range(-10, 40):
            assert decide(f, {"a": a}) == sn_member(2, a)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_period_is_primorial(self, n):
        d = smallest_period_epa(None, sn_period_multiple(n), n0=1, member=lambda a: sn_member(n, a))
        assert d.period == primorial(2**n)

    def test_period_via_formula(self):
        d = smallest_period_epa(build_sn_formula(2), sn_period_multiple(2), n0=1)
        assert d.period == 6
