import math

import numpy as np
import pytest
from scipy.integrate import quad

from decaylab import _kernels as K
from decaylab import curves as C
from decaylab import spectral as S

E2 = math.e ** 2


@pytest.fixture(scope="module")
def slow_profile():
    return S.build_profile(C.make_named_curve("power", p=1.5), 1e4)


class TestBuildProfile:
    def test_u0_formula(self, slow_profile):
        # u0(s) = sqrt(3 e^2) s^{-3/4} for g = t^{-3/2}
        s = slow_profile.s_grid
        ref = math.sqrt(3.0 * E2) * s ** -0.75
        assert np.max(np.abs(slow_profile.u0 - ref)) < 1e-12

    def test_norm_identity(self, slow_profile):
        # (1/2e^2) ∫_1^R u0^2 = g(1) - R g(R) + ∫_1^R g
        g = slow_profile.curve
        R = slow_profile.s_max
        lhs = slow_profile.norm_sq() / (2.0 * E2)
        rhs = g.eval(1.0) - R * g.eval(R) + C.integral_estimate(g, R)
        assert lhs == pytest.approx(rhs, rel=1e-4)

    def test_zero_curve(self):
        zero = C.DecayCurve(
            eval_fn=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            deriv_fn=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            t_min=0.0,
            flags={"monotone_decreasing": C.ASSERTED}, label="zero")
        prof = S.build_profile(zero, 100.0)
        assert np.all(prof.u0 == 0.0)
        assert S.gf_energy(prof, 3.0) == 0.0

    def test_mode_curvatures_in_unit_interval(self, slow_profile):
        mu = slow_profile.mu
        assert np.all(mu > 0) and np.all(mu <= 1.0)

    def test_bias_formula(self, slow_profile):
        assert slow_profile.bias == pytest.approx(E2 * 1e4 ** -1.5, rel=1e-12)

    def test_increasing_curve_rejected(self):
        up = C.DecayCurve(eval_fn=lambda t: np.asarray(t, dtype=float),
                          deriv_fn=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                          t_min=0.0,
                          flags={"monotone_decreasing": C.ASSERTED},
                          label="up")
        with pytest.raises(S.SpectralError):
            S.build_profile(up, 100.0)


class TestGfEnergy:
    def test_initial_energy_identity(self, slow_profile):
        # F(u0) = (1/2) ∫ u0^2/s = e^2 (g(1) - g(S_max)) exactly
        g = slow_profile.curve
        ref = E2 * (g.eval(1.0) - g.eval(slow_profile.s_max))
        # log-grid trapezoid at 64 nodes/decade carries ~2.6e-4 relative error
        assert S.gf_energy(slow_profile, 0.0) == pytest.approx(ref, rel=1e-3)

    def test_dominates_target(self, slow_profile):
        for t in np.geomspace(1.0, 100.0, 21):
            fnum = S.gf_energy(slow_profile, t)
            assert fnum >= t ** -1.5 - slow_profile.bias

    def test_bound_chain(self, slow_profile):
        # F(t) >= (1/2e^2) Σ_{s>=t} w u0^2/s >= g(t) - truncation loss
        g = slow_profile.curve
        for t in (1.0, 10.0, 100.0):
            mid = S.gf_tail_lower_bound(slow_profile, t)
            assert S.gf_energy(slow_profile, t) >= mid - 1e-12
            drop = g.eval(slow_profile.s_max)
            assert mid >= g.eval(t) - drop - 1e-3 * g.eval(t)

    def test_monotone_in_truncation(self):
        g = C.make_named_curve("power", p=1.5)
        vals = [S.gf_energy(S.build_profile(g, smax), 5.0)
                for smax in (1e2, 1e3, 1e4)]
        assert vals[0] <= vals[1] <= vals[2] + 1e-15

    def test_decreasing_convex_in_t(self, slow_profile):
        ts = np.linspace(0.0, 50.0, 40)
        vals = np.array([S.gf_energy(slow_profile, t) for t in ts])
        assert np.all(np.diff(vals) <= 0)
        sec = np.diff(vals) / np.diff(ts)
        assert np.all(np.diff(sec) >= -1e-12)

    def test_sharpness_witness(self, slow_profile):
        for t in (10.0, 100.0):
            assert t * S.gf_energy(slow_profile, t) >= 0.9 * t ** -0.5

    def test_negative_time_rejected(self, slow_profile):
        with pytest.raises(S.SpectralError):
            S.gf_energy(slow_profile, -1.0)


class TestFlatness:
    def test_exact_energy(self):
        # F(u_n) = (1/2n^2) log(1 + 1/R_n)
        norm, en = S.flatness_sequence(lambda r: r, 10)
        assert norm == 0.1
        assert en == pytest.approx(0.5 / 100.0 * math.log1p(1.0 / 10.0),
                                   rel=1e-14)

    def test_paper_bound(self):
        # phi(r) = r: R_n = n and F(u_n) <= 1/n^2
        for n in (1, 5, 50):
            _, en = S.flatness_sequence(lambda r: r, n)
            assert en <= 1.0 / n ** 2

    def test_n1_norm(self):
        norm, _ = S.flatness_sequence(lambda r: r, 1)
        assert norm == 1.0

    def test_flatness_ratio_vanishes(self):
        # F(u_n)/phi(|u_n|) -> 0
        ratios = [S.flatness_sequence(lambda r: r, n)[1] / (1.0 / n)
                  for n in (1, 10, 100)]
        assert ratios[0] > ratios[1] > ratios[2]


class TestHbEnergy:
    def test_t0_matches_gf(self, slow_profile):
        v, _ = S.hb_energy(slow_profile, 3.0, 0.0, 1e-3)
        assert v == S.gf_energy(slow_profile, 0.0)

    def test_single_mode_amplitude_floor(self):
        # s = 4 (mu = 1/4), alpha = 3: |u(t)| >= e^{-3/4} u0 for t < 3
        mu = np.array([0.25])
        u0 = np.array([1.0])
        for t in (0.5, 1.5, 2.9):
            n = int(round(t / math.sqrt(1e-4)))
            u = K.momentum_scheme_modes(mu, u0, 3.0, 1e-4, n)
            assert u[0] >= math.exp(-0.75)

    def test_lower_bound_holds(self, slow_profile):
        for t in (2.0, 5.0, 10.0):
            val, lower = S.hb_energy(slow_profile, 3.0, t, 1e-4)
            assert val >= lower - 1e-9

    def test_change_of_variables_identity(self):
        # ∫_0^∞ g(sqrt t) dt = 2 ∫_0^∞ g(s) s ds (quadrature oracle, g=e^{-s})
        lhs, _ = quad(lambda t: math.exp(-math.sqrt(t)), 0.0, np.inf)
        rhs, _ = quad(lambda s: 2.0 * math.exp(-s) * s, 0.0, np.inf)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_alpha_below_three_rejected(self, slow_profile):
        with pytest.raises(S.SpectralError):
            S.hb_energy(slow_profile, 2.0, 1.0, 1e-3)
