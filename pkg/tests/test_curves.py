import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaylab import curves as C

R4 = [4.0 ** n for n in range(1, 20)]


def spec_identity(t):
    return t


def ex2_spec():
    return C.StaircaseSpec(phi=spec_identity, radii=R4, variant="example2",
                           phi_family="identity")


def ex13_spec():
    return C.StaircaseSpec(phi=spec_identity, radii=R4, variant="example13",
                           phi_family="identity")


class TestNamedCurves:
    def test_exponential(self):
        c = C.make_named_curve("exponential")
        assert c.eval(0.0) == 1.0
        assert c.deriv(1.0) == -math.exp(-1.0)

    def test_power_log_value(self):
        # oracle: direct evaluation of 1/(t log^a t) at t=2, a=1.5
        oracle = 1.0 / (2.0 * math.log(2.0) ** 1.5)
        assert abs(oracle - 0.8664266713284088) < 1e-15
        c = C.make_named_curve("power_log", alpha=1.5)
        assert c.eval(2.0) == pytest.approx(oracle, rel=1e-14)

    def test_power_log_integral(self):
        # closed form (log 2)^{-1/2} / (1/2)
        c = C.make_named_curve("power_log", alpha=1.5)
        assert c.integral == pytest.approx(math.log(2.0) ** -0.5 / 0.5,
                                           rel=1e-14)
        # numeric integral approaches it from below (finite range)
        num = C.integral_estimate(c, 1e6)
        assert num < c.integral + 1e-3

    def test_power_log_rejects_bad_alpha(self):
        with pytest.raises(C.CurveError):
            C.make_named_curve("power_log", alpha=-1.0)

    def test_unknown_family(self):
        with pytest.raises(C.CurveError):
            C.make_named_curve("cubic_spline")

    def test_linear_cutoff_sqrt_integral(self):
        # steep-segment curve: ∫ sqrt(-G_r') = 1/sqrt(r) exactly
        for r in (0.5, 2.0, 16.0):
            c = C.make_named_curve("linear_cutoff", r=r)
            val, err = C.sqrt_deriv_integral(c, 2.0 / r, 4096)
            assert val == pytest.approx(1.0 / math.sqrt(r), abs=3 * err)
            assert c.psi_tail(0.0) == pytest.approx(1.0 / math.sqrt(r),
                                                    rel=1e-12)

    @pytest.mark.parametrize("family,kw", [
        ("exponential", {}), ("inverse_square", {}), ("inverse_linear", {}),
        ("power", {"p": 1.5}), ("power_log", {"alpha": 1.5}),
        ("linear_cutoff", {"r": 2.0}),
    ])
    def test_flags_verify(self, family, kw):
        c = C.verify_flags(C.make_named_curve(family, **kw))
        assert c.flag("monotone_decreasing") == C.VERIFIED
        assert c.flag("convex") == C.VERIFIED
        assert c.flag("limit_zero") == C.VERIFIED

    def test_deriv_mismatch_detected(self):
        bad = C.DecayCurve(eval_fn=lambda t: np.exp(-t),
                           deriv_fn=lambda t: -2.0 * np.exp(-t),
                           t_min=0.0, label="bad")
        with pytest.raises(C.CurveError, match="finite-difference"):
            C.verify_flags(bad)

    def test_psi_tail_consistency(self):
        # ∫_t^∞ sqrt(-g') decreases and matches a fine Riemann sum
        c = C.make_named_curve("inverse_square")
        val, err = C.sqrt_deriv_integral(c, 400.0, 200000)
        assert val == pytest.approx(c.psi_tail(0.0) - c.psi_tail(400.0),
                                    abs=5 * err + 1e-9)

    def test_document_roundtrip(self):
        c = C.make_named_curve("power_log", alpha=1.5)
        c2 = C.curve_from_document(c.to_document())
        ts = np.linspace(2.0, 50.0, 20)
        assert np.allclose(c.eval(ts), c2.eval(ts), rtol=0, atol=0)


class TestLemma1Property:
    @pytest.mark.parametrize("family,kw,T", [
        ("exponential", {}, 60.0),
        ("inverse_square", {}, 1e5),
        ("power", {"p": 2.0}, 1e5),
    ])
    def test_t_g_below_twice_integral(self, family, kw, T):
        # monotone integrable: t g(t) <= 2 ∫ g at the largest grid point
        c = C.make_named_curve(family, **kw)
        total = c.integral if c.integral is not None \
            else C.integral_estimate(c, T)
        t = T
        assert t * c.eval(t) <= 2.0 * total + 1e-12


class TestStaircases:
    def test_example2_integral_n3(self):
        # oracle: sum of 1/sqrt(phi(R_n)) = 1/2 + 1/4 + 1/8
        g = C.make_staircase(ex2_spec(), 3)
        assert g.integral == pytest.approx(0.875, abs=1e-15)
        assert C.staircase_integral_formula(ex2_spec(), 3) == 0.875

    def test_example2_closed_interval(self):
        # 1_{(0, R_n]} includes t = R_n: the n=1 term still counts at R_1
        g = C.make_staircase(ex2_spec(), 3)
        with_term = sum(1.0 / (R4[n] * 2.0 ** (n + 1)) for n in range(3))
        assert g.eval(4.0) == pytest.approx(with_term, rel=1e-15)
        assert g.eval(4.0 + 1e-9) < g.eval(4.0)

    def test_truncation_zero(self):
        g = C.make_staircase(ex2_spec(), 0)
        assert g.eval(1.0) == 0.0 and g.integral == 0.0

    def test_example2_not_convex_flagged(self):
        g = C.make_staircase(ex2_spec(), 5)
        assert g.flag("convex") == C.UNKNOWN

    def test_example13_convex_and_verified(self):
        g = C.verify_flags(C.make_staircase(ex13_spec(), 5),
                           grid=np.linspace(0.0, 2.5 * R4[4], 4001))
        assert g.flag("convex") == C.VERIFIED
        assert g.flag("monotone_decreasing") == C.VERIFIED

    def test_example13_sqrt_integral_formula(self):
        spec = ex13_spec()
        g = C.make_staircase(spec, 4)
        # oracle: 2 sum phi(R_n)^{-1/3}
        oracle = 2.0 * sum((4.0 ** n) ** (-1.0 / 3.0) for n in range(1, 5))
        assert C.staircase_sqrt_deriv_integral(spec, 4) == pytest.approx(
            oracle, rel=1e-15)
        assert g.psi_tail(0.0) == pytest.approx(oracle, rel=1e-12)

    def test_divergent_series_rejected(self):
        # phi growing too slowly: weights 1/sqrt(log R_n) not summable
        spec = C.StaircaseSpec(phi=lambda t: math.log(t), radii=R4,
                               variant="example2", phi_family="log",
                               cauchy_tol=0.5)
        with pytest.raises(C.CurveError):
            C.make_staircase(spec, 12)

    def test_growth_product(self):
        # R_n phi(R_n) g(R_n) ~ sqrt(phi(R_N)): value at N exceeds N-1
        vals = []
        for N in (2, 4, 6):
            g = C.make_staircase(ex2_spec(), N)
            r = R4[N - 1]
            vals.append(r * r * g.eval(r))
        assert vals[0] < vals[1] < vals[2]


class TestSqrtDerivIntegral:
    def test_exponential_closed_form(self):
        # ∫_0^∞ e^{-t/2} dt = 2
        c = C.make_named_curve("exponential")
        val, err = C.sqrt_deriv_integral(c, 80.0, 40000)
        assert val == pytest.approx(2.0, abs=3 * err + 1e-6)

    def test_power_log_divergence(self):
        # ∫ 1/(t log t) dt = log log t -> estimate grows at least like it
        c = C.make_named_curve("power_log", alpha=2.0)
        lo, _ = C.sqrt_deriv_integral(c, 1e3, 2 ** 18)
        hi, _ = C.sqrt_deriv_integral(c, 1e6, 2 ** 18)
        growth_floor = (math.log(math.log(1e6)) - math.log(math.log(1e3)))
        assert hi - lo >= growth_floor - 0.2

    def test_constant_curve_zero(self):
        c = C.DecayCurve(eval_fn=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                         deriv_fn=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                         t_min=0.0, label="const")
        val, err = C.sqrt_deriv_integral(c, 10.0, 100)
        assert val == 0.0

    def test_non_monotone_rejected(self):
        c = C.DecayCurve(eval_fn=lambda t: np.cos(t), deriv_fn=lambda t: -np.sin(t),
                         t_min=0.0, label="cos")
        with pytest.raises(C.CurveError, match="non-monotone"):
            C.sqrt_deriv_integral(c, 10.0, 100)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(min_value=1.1, max_value=4.0),
       t1=st.floats(min_value=2.0, max_value=100.0),
       gap=st.floats(min_value=0.1, max_value=50.0))
def test_convexity_secants_property(alpha, t1, gap):
    # secant slopes of a convex curve are non-decreasing
    c = C.make_named_curve("power_log", alpha=alpha)
    t2, t3 = t1 + gap, t1 + 2.3 * gap
    s12 = (c.eval(t2) - c.eval(t1)) / (t2 - t1)
    s23 = (c.eval(t3) - c.eval(t2)) / (t3 - t2)
    assert s12 <= s23 + 1e-12 * max(abs(s12), abs(s23), 1.0)


def test_immutability():
    c = C.make_named_curve("exponential")
    with pytest.raises(AttributeError):
        c.t_min = 5.0
