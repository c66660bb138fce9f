import random
from fractions import Fraction as F

import pytest

from conftest import aligned, fresh_pools, inflate, rand_set
from zonoset import lang
from zonoset.core import (
    AffineForm,
    Interval,
    PerturbedAffineSet,
    SymbolRegistry,
    gamma_interval,
)
from zonoset.order import Verdict, leq_exact
from zonoset.transfer import (
    assign_add,
    assign_const,
    assign_mul,
    assign_scale,
    compile_expr,
    eval_plan,
    eval_plan_form,
    square_refined,
)


def eq12_set():
    reg = SymbolRegistry()
    for _ in range(4):
        reg.fresh_central()
    return PerturbedAffineSet.of(
        ["x", "y"],
        [
            AffineForm.make(20, {1: -4, 3: 2, 4: 3}),
            AffineForm.make(10, {1: -2, 2: 1, 4: -1}),
        ],
        reg,
    )


def evaluate(form: AffineForm, e: dict, h: dict) -> F:
    return form.evaluate(e, h)


class TestAssignConst:
    def test_half_range_with_fresh_symbol(self):
        reg = SymbolRegistry()
        X = PerturbedAffineSet.of((), (), reg)
        Z = assign_const(X, "x", 1, 2)
        f = Z.form("x")
        assert f.center == F(3, 2)
        assert f.central == {1: F(1, 2)}
        assert f.perturbation == {}

    def test_degenerate_interval_allocates_nothing(self):
        reg = SymbolRegistry()
        Z = assign_const(PerturbedAffineSet.of((), (), reg), "x", 5, 5)
        assert Z.form("x") == AffineForm.constant(5)
        assert reg.next_central == 1

    def test_symmetric_unit_range(self):
        reg = SymbolRegistry()
        Z = assign_const(PerturbedAffineSet.of((), (), reg), "x", -1, 1)
        assert Z.form("x") == AffineForm.make(0, {1: 1})

    def test_invalid_range(self):
        reg = SymbolRegistry()
        with pytest.raises(ValueError):
            assign_const(PerturbedAffineSet.of((), (), reg), "x", 2, 1)

    def test_existing_columns_untouched(self):
        X = eq12_set()
        Z = assign_const(X, "w", 0, 1)
        assert Z.form("x") == X.form("x")
        assert Z.form("y") == X.form("y")


class TestAffineOps:
    def test_sum_of_worked_columns(self):
        Z = assign_add(eq12_set(), "s", "x", "y")
        f = Z.form("s")
        assert f.center == 30
        assert f.central == {1: -6, 2: 1, 3: 2, 4: 2}
        assert gamma_interval(Z, "s") == Interval.of(19, 41)

    def test_zero_scale_gives_constant_zero(self):
        Z = assign_scale(eq12_set(), "z", 0, "x")
        assert Z.form("z") == AffineForm.constant(0)

    def test_branch_difference_recovers_perturbation(self):
        reg = SymbolRegistry()
        reg.fresh_central()
        reg.fresh_perturbation()
        Z1 = PerturbedAffineSet.of(
            ["x", "y"],
            [AffineForm.make(0, {1: 1}), AffineForm.make(0, {1: 1}, {1: 1})],
            reg,
        )
        Z = assign_scale(Z1, "nx", -1, "x")
        Z = assign_add(Z, "d", "y", "nx")
        assert Z.form("d") == AffineForm.make(0, {}, {1: 1})
        assert gamma_interval(Z, "d") == Interval.of(-1, 1)

    def test_exactness_under_concrete_evaluation(self):
        rng = random.Random(17)
        for _ in range(50):
            reg = SymbolRegistry()
            eps, eta = fresh_pools(reg, 2, 2)
            X = rand_set(rng, reg, 2, eps, eta)
            lam = F(rng.randint(-4, 4), rng.randint(1, 3))
            S = assign_add(X, "s", 0, 1)
            M = assign_scale(X, "m", lam, 0)
            e = {i: F(rng.randint(-4, 4), 4) for i in eps}
            h = {j: F(rng.randint(-4, 4), 4) for j in eta}
            x0 = evaluate(X.form(0), e, h)
            x1 = evaluate(X.form(1), e, h)
            assert evaluate(S.form("s"), e, h) == x0 + x1
            assert evaluate(M.form("m"), e, h) == lam * x0


class TestMul:
    def test_pure_central_square_of_symbol(self):
        reg = SymbolRegistry()
        reg.fresh_central()
        X = PerturbedAffineSet.of(
            ["a", "b"], [AffineForm.make(0, {1: 1}), AffineForm.make(0, {1: 1})], reg
        )
        Z = assign_mul(X, "p", "a", "b")
        assert Z.form("p") == AffineForm.make(0, {2: 1})
        assert gamma_interval(Z, "p") == Interval.of(-1, 1)

    def test_square_of_shifted_range(self):
        reg = SymbolRegistry()
        X = assign_const(PerturbedAffineSet.of((), (), reg), "x", 1, 2)
        Z = assign_mul(X, "sq", "x", "x")
        f = Z.form("sq")
        assert f.center == F(9, 4)
        assert f.central[1] == F(3, 2)
        assert f.central[2] == F(1, 4)
        assert gamma_interval(Z, "sq") == Interval.of(F(1, 2), 4)

    def test_zero_column_times_anything(self):
        X = eq12_set()
        X = assign_scale(X, "z", 0, "x")
        Z = assign_mul(X, "p", "z", "y")
        assert Z.form("p") == AffineForm.constant(0)
        assert Z.registry.next_perturbation == 1

    def test_soundness_under_concrete_sampling(self):
        rng = random.Random(23)
        for _ in range(60):
            reg = SymbolRegistry()
            eps, eta = fresh_pools(reg, 2, 1)
            X = rand_set(rng, reg, 2, eps, eta, span=2)
            Z = assign_mul(X, "p", 0, 1)
            f = Z.form("p")
            fresh_eps = [i for i in f.central if i not in eps]
            fresh_eta = [j for j in f.perturbation if j not in eta]
            slack = sum(abs(f.central[i]) for i in fresh_eps) + sum(
                abs(f.perturbation[j]) for j in fresh_eta
            )
            for _ in range(5):
                e = {i: F(rng.randint(-2, 2), 2) for i in eps}
                h = {j: F(rng.randint(-2, 2), 2) for j in eta}
                product = evaluate(X.form(0), e, h) * evaluate(X.form(1), e, h)
                linear = evaluate(
                    AffineForm(
                        f.center,
                        {i: c for i, c in f.central.items() if i in eps},
                        {j: c for j, c in f.perturbation.items() if j in eta},
                    ),
                    e,
                    h,
                )
                assert abs(product - linear) <= slack
                lo, hi = gamma_interval(Z, "p").lo, gamma_interval(Z, "p").hi
                assert lo <= product <= hi


class TestSquareRefined:
    def test_tighter_than_generic_multiplication(self):
        reg = SymbolRegistry()
        X = assign_const(PerturbedAffineSet.of((), (), reg), "x", 1, 2)
        Z = square_refined(X, "sq", "x")
        f = Z.form("sq")
        assert f.center == F(19, 8)
        assert f.central[1] == F(3, 2)
        assert f.central[2] == F(1, 8)
        assert gamma_interval(Z, "sq") == Interval.of(F(3, 4), 4)

    def test_constant_square(self):
        reg = SymbolRegistry()
        X = PerturbedAffineSet.of(["c"], [AffineForm.constant(-3)], reg)
        Z = square_refined(X, "sq", "c")
        assert Z.form("sq") == AffineForm.constant(9)

    def test_taylor_polynomial_coefficients(self):
        # g(x) = 3/8 + 3/4 x - 1/8 x^2 on x = 3/2 + 1/2 eps1
        reg = SymbolRegistry()
        X = assign_const(PerturbedAffineSet.of((), (), reg), "x", 1, 2)
        expr = lang.parse(
            "float main() { float x in [1,2], y; y = 3/8.0+3/4.0*x-1/8.0*x*x; return y; }"
        ).main.body[2].expr
        form = eval_plan_form(X, compile_expr(expr, {"x": "x"}))
        assert form.central[1] == F(3, 16)
        assert form.central[2] == F(-1, 64)

    def test_soundness_with_perturbations(self):
        rng = random.Random(29)
        for _ in range(40):
            reg = SymbolRegistry()
            eps, eta = fresh_pools(reg, 1, 1)
            X = rand_set(rng, reg, 1, eps, eta, span=2)
            Z = square_refined(X, "sq", 0)
            lo, hi = gamma_interval(Z, "sq").lo, gamma_interval(Z, "sq").hi
            for _ in range(8):
                e = {i: F(rng.randint(-4, 4), 4) for i in eps}
                h = {j: F(rng.randint(-4, 4), 4) for j in eta}
                v = evaluate(X.form(0), e, h)
                assert lo <= v * v <= hi


class TestPlans:
    def test_identity_is_a_copy(self):
        X = eq12_set()
        plan = compile_expr(lang.Var("x"), {"x": "x"})
        assert len(plan.steps) == 1
        Z = eval_plan(X, plan, "c")
        assert Z.form("c") == X.form("x")

    def test_affine_plan_matches_direct_computation(self):
        X = eq12_set()
        expr = lang.parse(
            "float main() { float x in [0,1], y in [0,1], z; z = 2*x - y + 1; return z; }"
        ).main.body[3].expr
        plan = compile_expr(expr, {"x": "x", "y": "y"})
        got = eval_plan_form(X, plan)
        direct = X.form("x").scale(2).add(X.form("y").scale(-1)).add(AffineForm.constant(1))
        assert got == direct

    def test_scalar_factors_fold_into_scaling(self):
        X = eq12_set()
        n0 = X.registry.next_central
        expr = lang.Mul(lang.Lit(F(1, 2)), lang.Var("x"))
        form = eval_plan_form(X, compile_expr(expr, {"x": "x"}))
        assert form == X.form("x").scale(F(1, 2))
        assert X.registry.next_central == n0

    def test_coarse_square_interval_still_contains_truth(self):
        # z*z - x with the generic product rule, on the Taylor data
        reg = SymbolRegistry()
        X = assign_const(PerturbedAffineSet.of((), (), reg), "x", 1, 2)
        g = lang.parse(
            "float main() { float x in [1,2], y; y = 3/8.0+3/4.0*x-1/8.0*x*x; return y; }"
        ).main.body[2].expr
        X = eval_plan(X, compile_expr(g, {"x": "x"}), "z")
        t_expr = lang.Sub(lang.Mul(lang.Var("z"), lang.Var("z")), lang.Var("x"))
        form = eval_plan_form(X, compile_expr(t_expr, {"x": "x", "z": "z"}, refine_squares=False))
        iv = form.interval()
        assert iv.lo <= F(-66, 1000) and iv.hi >= 0

    def test_unbound_variable(self):
        with pytest.raises(KeyError):
            compile_expr(lang.Var("nope"), {"x": "x"})

    def test_call_nodes_rejected(self):
        with pytest.raises(ValueError):
            compile_expr(lang.Call("f", (lang.Var("x"),)), {"x": "x"})


class TestMonotonicity:
    def test_transfer_ops_preserve_order(self):
        rng = random.Random(31)
        ops = [
            lambda S: assign_add(S, "t", 0, 1),
            lambda S: assign_scale(S, "t", F(-1, 2), 0),
            lambda S: assign_const(S, "t", 0, 1),
            lambda S: assign_mul(S, "t", 0, 1),
        ]
        for _ in range(40):
            reg = SymbolRegistry()
            eps, eta = fresh_pools(reg, 1, 1)
            X = rand_set(rng, reg, 2, eps, eta, span=2)
            Y = inflate(rng, X, rows=1)
            op = rng.choice(ops)
            RX, RY = aligned(op, X, Y)
            assert leq_exact(RX, RY).result is Verdict.LESS_OR_EQUAL
