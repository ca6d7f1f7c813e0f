from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rddlengine.engine import RandomSource, det, evaluate, inverse
from rddlengine.engine import distributions as D
from rddlengine.errors import EvaluationError, SamplingError
from rddlengine.grounder import infer_type, promote_if
from rddlengine.model import (
    Binary, Call, Const, Dist, If, Nary, Unary, Var, value_kind,
)

from conftest import env_from, simple_instance


def ev(expr, values=None, seed=0):
    return evaluate(expr, values or {}, RandomSource(seed))


class TestEvaluate:

    def test_untaken_branch_is_not_evaluated(self):
        e = If(Const(True), Const(3.0), Binary("/", Const(1), Const(0)))
        assert ev(e) == 3.0

    def test_division_is_real_and_checked(self):
        assert ev(Binary("/", Const(3), Const(2))) == 1.5
        with pytest.raises(EvaluationError, match="division by zero"):
            ev(Binary("/", Const(1.0), Const(0.0)))

    @pytest.mark.parametrize("func, arg", [("ln", 0.0), ("ln", -1.0), ("sqrt", -4.0)])
    def test_domain_errors(self, func, arg):
        with pytest.raises(EvaluationError, match=func):
            ev(Call(func, (Const(arg),)))

    def test_int_overflow(self):
        big = Const(2 ** 62)
        with pytest.raises(EvaluationError, match="overflow"):
            ev(Binary("*", big, Const(4)))
        assert ev(Binary("+", big, Const(1))) == 2 ** 62 + 1

    def test_mixed_arithmetic_promotes(self):
        r = ev(Binary("+", Const(1), Const(0.5)))
        assert r == 1.5 and isinstance(r, float)

    def test_boolean_ops_need_bools(self):
        with pytest.raises(EvaluationError, match="Boolean"):
            ev(Binary("&", Const(True), Const(1)))
        assert ev(Binary("=>", Const(False), Const(False))) is True

    def test_errors_carry_locations(self):
        env = env_from("""
domain bad {
    pvariables { x : { state-fluent, real, default = 0.0 }; };
    cpfs { x' = 1.0 / x; };
    reward = 0;
}""", simple_instance("bad"))
        with pytest.raises(EvaluationError) as info:
            env.step()
        assert info.value.loc is not None and info.value.loc.line == 4


ENUM_DOMAIN = """
domain en {
    types { grade : {@a, @b, @c}; };
    pvariables {
        V(grade) : { non-fluent, real, default = 0.0 };
        pick : { state-fluent, grade, default = @a };
        low : { state-fluent, grade, default = @a };
        up : { state-fluent, grade, default = @c };
        dn : { state-fluent, grade, default = @a };
        cmp : { state-fluent, bool, default = false };
    };
    cpfs {
        pick' = argmax_{?e : grade} [V(?e)];
        low' = argmin_{?e : grade} [V(?e)];
        up' = next(up);
        dn' = prev(dn);
        cmp' = pick' > @a;
    };
    reward = 0;
}"""


class TestEnums:

    def outcome(self, values):
        nf = " ".join(f"V(@{n}) = {v};" for n, v in zip("abc", values))
        env = env_from(ENUM_DOMAIN, simple_instance("en", non_fluents=nf))
        return env.step().observation

    def test_argmax_lowest_index_among_ties(self):
        obs = self.outcome([1.0, 5.0, 5.0])
        assert obs["pick"].name == "b"

    @pytest.mark.parametrize("values", list(itertools.product([0.0, 1.0, 2.0], repeat=3)))
    def test_argmax_argmin_brute_force(self, values):
        obs = self.outcome(values)
        best = max(range(3), key=lambda k: (values[k], -k))
        worst = min(range(3), key=lambda k: (values[k], k))
        assert obs["pick"].index == best
        assert obs["low"].index == worst

    def test_next_prev_saturate(self):
        obs = self.outcome([0.0, 0.0, 0.0])
        assert obs["up"].name == "c" and obs["dn"].name == "a"

    def test_enums_compare_by_index(self):
        assert self.outcome([0.0, 3.0, 0.0])["cmp"] is True
        assert self.outcome([3.0, 0.0, 0.0])["cmp"] is False


class TestMatrix:

    def test_textbook_det(self):
        assert det([[1, 2], [3, 4]]) == pytest.approx(-2.0, abs=1e-15)

    def test_identity(self):
        assert det(np.eye(3).tolist()) == 1.0

    def test_diagonal_inverse(self):
        assert inverse([[2, 0], [0, 4]]) == [[0.5, 0.0], [0.0, 0.25]]

    def test_singular_inverse(self):
        with pytest.raises(EvaluationError, match="singular"):
            inverse([[1, 2], [2, 4]])

    @staticmethod
    def cofactor(m):
        if len(m) == 1:
            return m[0][0]
        return sum((-1) ** j * m[0][j] * TestMatrix.cofactor([r[:j] + r[j + 1:] for r in m[1:]])
                   for j in range(len(m)))

    def test_random_4x4_against_cofactor_expansion(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            m = rng.normal(size=(4, 4)).tolist()
            ref = self.cofactor(m)
            assert abs(det(m) - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_inverse_residual(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 5):
            a = rng.normal(size=(n, n)) + n * np.eye(n)
            residual = np.abs(a @ np.array(inverse(a.tolist())) - np.eye(n)).max()
            assert residual < 1e-9

    def test_det_and_inverse_in_a_domain(self):
        dom = """
domain mat {
    types { ix : object; };
    pvariables {
        A(ix, ix) : { non-fluent, real, default = 0.0 };
        d : { state-fluent, real, default = 0.0 };
        inv(ix, ix) : { state-fluent, real, default = 0.0 };
    };
    cpfs {
        d' = det_{?i : ix, ?j : ix}[A(?i, ?j)];
        inv'(?r, ?c) = inverse_{?i : ix, ?j : ix}[A(?i, ?j)](?r, ?c);
    };
    reward = 0;
}"""
        nf = "A(i1, i1) = 2.0; A(i1, i2) = 1.0; A(i2, i1) = 1.0; A(i2, i2) = 3.0;"
        env = env_from(dom, simple_instance("mat", objects="ix : {i1, i2};", non_fluents=nf))
        obs = env.step().observation
        assert obs["d"] == pytest.approx(5.0)
        got = [[obs["inv___i1__i1"], obs["inv___i1__i2"]], [obs["inv___i2__i1"], obs["inv___i2__i2"]]]
        assert np.allclose(got, np.linalg.inv([[2.0, 1.0], [1.0, 3.0]]), atol=1e-12)


class TestSampling:

    def test_degenerate_families(self):
        rng = RandomSource(1)
        assert D.sample("Bernoulli", [1.0], rng) is True
        assert D.sample("Bernoulli", [0.0], rng) is False
        assert D.sample("DiracDelta", [2.5], rng) == 2.5
        assert D.sample("KronDelta", [7], rng) == 7

    @pytest.mark.parametrize("family, params, needle", [
        ("Bernoulli", [1.5], "Bernoulli"),
        ("Normal", [0.0, -1.0], "Normal"),
        ("Uniform", [2.0, 1.0], "Uniform"),
        ("Exponential", [0.0], "Exponential"),
        ("Gamma", [-1.0, 1.0], "Gamma"),
        ("Poisson", [-2.0], "Poisson"),
        ("Binomial", [3, 1.2], "Binomial"),
    ])
    def test_support_errors_name_family_and_value(self, family, params, needle):
        with pytest.raises(SamplingError) as info:
            D.sample(family, params, RandomSource(0))
        assert needle in str(info.value)
        assert repr(params[-1])[:3] in str(info.value) or repr(params[0])[:3] in str(info.value)

    def test_dirichlet_rejects_non_positive(self):
        with pytest.raises(SamplingError, match="Dirichlet"):
            D.dirichlet(RandomSource(0), [1.0, 0.0])

    def test_discrete_normalization(self):
        assert D.normalized("Discrete", [0.25, 0.75]) == [0.25, 0.75]
        with pytest.raises(SamplingError):
            D.normalized("Discrete", [0.5, 0.6])

    def test_normal_moments(self):
        rng = RandomSource(2024)
        xs = [D.normal(rng, 0.0, 1.0) for _ in range(100_000)]
        assert -0.02 <= np.mean(xs) <= 0.02
        assert 0.97 <= np.var(xs) <= 1.03

    @pytest.mark.parametrize("family, params, mean, var", [
        ("Uniform", [1.0, 3.0], 2.0, 1.0 / 3.0),
        ("Exponential", [2.0], 2.0, 4.0),
        ("Gamma", [3.0, 2.0], 6.0, 12.0),
        ("Gamma", [0.5, 1.0], 0.5, 0.5),
        ("Beta", [2.0, 5.0], 2.0 / 7.0, 10.0 / (49.0 * 8.0)),
        ("Poisson", [4.0], 4.0, 4.0),
        ("Binomial", [20, 0.3], 6.0, 4.2),
        ("Binomial", [200, 0.3], 60.0, 42.0),
        ("Student", [5.0], 0.0, 5.0 / 3.0),
    ])
    def test_scalar_moments(self, family, params, mean, var):
        rng = RandomSource(99)
        xs = np.array([D.sample(family, params, rng) for _ in range(40_000)], dtype=float)
        assert abs(xs.mean() - mean) < 4.5 * math.sqrt(var / len(xs)) + 1e-3
        assert abs(xs.var() - var) < 0.08 * var

    def test_multinomial_sums_exactly(self):
        rng = RandomSource(4)
        for _ in range(2000):
            counts = D.multinomial(rng, 17, [0.2, 0.5, 0.3])
            assert sum(counts) == 17 and min(counts) >= 0

    def test_dirichlet_on_simplex(self):
        rng = RandomSource(8)
        for _ in range(2000):
            x = D.dirichlet(rng, [0.5, 1.0, 2.0, 4.0])
            assert abs(math.fsum(x) - 1.0) <= 1e-12 and min(x) >= 0.0

    def test_multivariate_normal_covariance(self):
        cov = np.array([[2.0, 0.6, 0.0], [0.6, 1.0, -0.3], [0.0, -0.3, 0.5]])
        rng = RandomSource(21)
        xs = np.array([D.multivariate_normal(rng, [1.0, -1.0, 0.0], cov)
                       for _ in range(100_000)])
        sample_cov = np.cov(xs, rowvar=False)
        assert np.linalg.norm(sample_cov - cov) / np.linalg.norm(cov) < 0.05
        assert np.allclose(xs.mean(axis=0), [1.0, -1.0, 0.0], atol=0.02)

    def test_semidefinite_covariance_is_accepted(self):
        x = D.multivariate_normal(RandomSource(0), [0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])
        assert x[0] == pytest.approx(x[1])

    def test_fixed_draw_accounting(self):
        rng = RandomSource(3)
        D.normal(rng, 0.0, 1.0)
        assert rng.draws == 2
        D.bernoulli(rng, 0.3)
        D.poisson(rng, 3.0)
        assert rng.draws == 4


class TestReproducibility:

    def test_rng_stream_is_platform_independent(self):
        # first outputs of xoshiro256** seeded through splitmix64(0)
        rng = RandomSource(0)
        assert [rng.next_u64() for _ in range(3)] == [
            11091344671253066420, 13793997310169335082, 1900383378846508768]

    def test_same_seed_same_values(self):
        e = Nary("+", (Dist("Normal", (Const(0.0), Const(1.0))),
                       Dist("Gamma", (Const(2.0), Const(1.0))),
                       Dist("Poisson", (Const(3.0),))))
        a = [evaluate(e, {}, RandomSource(5)) for _ in range(5)]
        rng = RandomSource(5)
        b = [evaluate(e, {}, rng) for _ in range(50)]
        rng2 = RandomSource(5)
        c = [evaluate(e, {}, rng2) for _ in range(50)]
        assert b == c
        assert a == [b[0]] * 5   # a fresh source per call repeats the first draw
        assert len(set(b)) == 50


# -- type soundness ---------------------------------------------------------

RANGES = {"r": "real", "n": "int", "b": "bool"}
real_or_int = st.sampled_from([Var("r"), Var("n"), Const(2), Const(-1.5), Const(0.25)])
booleans = st.sampled_from([Var("b"), Const(True), Const(False)])


def numeric(children):
    return st.one_of(
        st.builds(Binary, st.sampled_from(["+", "-", "*", "/"]), children, children),
        st.builds(lambda a: Unary("-", a), children),
        st.builds(lambda f, a: Call(f, (a,)),
                  st.sampled_from(["abs", "sgn", "floor", "ceil", "round", "sin", "exp"]),
                  children),
        st.builds(lambda f, a, b: Call(f, (a, b)), st.sampled_from(["min", "max"]),
                  children, children),
        st.builds(lambda op, xs: Nary(op, tuple(xs)), st.sampled_from(["+", "*", "min", "max", "avg"]),
                  st.lists(children, min_size=1, max_size=3)),
        st.builds(lambda c, a, b: promote_if(If(c, a, b), RANGES.__getitem__),
                  booleans, children, children),
    )


num_exprs = st.recursive(real_or_int, numeric, max_leaves=8)
bool_exprs = st.one_of(
    booleans,
    st.builds(Binary, st.sampled_from(["<", "<=", ">", ">=", "==", "~="]), num_exprs, num_exprs),
    st.builds(lambda a, b: Binary("&", a, b), booleans, booleans),
)


@settings(max_examples=400, deadline=None)
@given(st.one_of(num_exprs, bool_exprs), st.floats(-50, 50), st.integers(-20, 20), st.booleans())
def test_value_type_matches_static_type(e, r, n, b):
    try:
        value = evaluate(e, {"r": r, "n": n, "b": b}, RandomSource(0))
    except EvaluationError:
        return
    assert value_kind(value) == infer_type(e, RANGES.__getitem__)


VECTOR_DOMAIN = """
domain vec {
    types { ix : object; };
    pvariables {
        ALPHA(ix) : { non-fluent, real, default = 1.0 };
        P(ix) : { non-fluent, real, default = 0.5 };
        MU(ix) : { non-fluent, real, default = 0.0 };
        COV(ix, ix) : { non-fluent, real, default = 0.0 };
        w(ix) : { state-fluent, real, default = 0.0 };
        c(ix) : { state-fluent, int, default = 0 };
        z(ix) : { state-fluent, real, default = 0.0 };
    };
    cpfs {
        w'(?k) = Dirichlet_{?i : ix}[ALPHA(?i)](?k);
        c'(?k) = Multinomial_{?i : ix}[5, P(?i)](?k);
        z'(?k) = MultivariateNormal_{?i : ix, ?j : ix}[MU(?i), COV(?i, ?j)](?k);
    };
    reward = 0;
}"""


def test_vector_distributions_in_a_domain():
    nf = "COV(i1, i1) = 1.0; COV(i2, i2) = 1.0; MU(i2) = 3.0;"
    env = env_from(VECTOR_DOMAIN, simple_instance("vec", objects="ix : {i1, i2};",
                                                  non_fluents=nf), seed=2)
    for _ in range(5):
        obs = env.step().observation
        assert abs(obs["w___i1"] + obs["w___i2"] - 1.0) <= 1e-12
        assert obs["c___i1"] + obs["c___i2"] == 5
        assert all(isinstance(obs[k], float) for k in ("z___i1", "z___i2"))
