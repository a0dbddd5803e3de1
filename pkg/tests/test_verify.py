import math

import numpy as np
import pytest

from decaylab import flows as F
from decaylab import verify as V


def make_traj(t, x, f, gnorm, v=None, **meta):
    return F.Trajectory(t=np.asarray(t, dtype=float),
                        x=np.asarray(x, dtype=float),
                        f=np.asarray(f, dtype=float),
                        gnorm=np.asarray(gnorm, dtype=float),
                        v=None if v is None else np.asarray(v, dtype=float),
                        meta=meta)


@pytest.fixture(scope="module")
def quad_flow():
    return F.integrate_gradient_flow(F.Quadratic(0.5), 2.0, t_end=20.0)


class TestLyapunovGf:
    def test_closed_form_decreasing(self, quad_flow):
        # L(t) = t e^{-t} + 2 e^{-t} for the x^2/4 flow from 2; L' <= 0
        rep = V.lyapunov_gf(quad_flow, 0.0)
        assert rep.passed
        ref = quad_flow.t * np.exp(-quad_flow.t) + 2.0 * np.exp(-quad_flow.t)
        L = quad_flow.t * quad_flow.f + 0.5 * np.asarray(quad_flow.x) ** 2
        assert np.max(np.abs(L - ref)) < 1e-6

    def test_constant_at_minimizer(self):
        traj = F.integrate_gradient_flow(F.Quadratic(1.0), 0.0, t_end=5.0)
        rep = V.lyapunov_gf(traj, 0.0)
        assert rep.passed and rep.details["L0"] == 0.0

    def test_consequence_bound(self, quartic_flow):
        # excess <= |x0|^2/(2t) = 4/t, far above the actual 1/(1+t)^2 at t=10
        rep = V.lyapunov_gf(quartic_flow, 0.0)
        assert rep.details["consequence"]["verdict"] == V.PASS
        k = int(np.searchsorted(quartic_flow.t, 10.0))
        assert quartic_flow.f[k] < 4.0 / quartic_flow.t[k] / 30.0

    def test_missing_xstar(self, quad_flow):
        with pytest.raises(F.PreconditionError):
            V.lyapunov_gf(quad_flow, None)


class TestExcessIntegral:
    def test_quartic_integral(self, quartic_flow):
        rep = V.excess_integral(quartic_flow, weight="one", xstar=0.0)
        assert rep.passed
        assert rep.details["integral"] == pytest.approx(1.0, abs=2e-3)
        assert rep.details["bound"] == pytest.approx(4.0)

    def test_zero_trajectory(self):
        traj = make_traj([0.0, 1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0],
                         [0.0, 0.0, 0.0], dynamics="gradient_flow")
        rep = V.excess_integral(traj, weight="one", xstar=0.0)
        assert rep.passed and rep.details["integral"] == 0.0

    def test_weighted_needs_alpha(self, quad_flow):
        with pytest.raises(F.PreconditionError, match="alpha"):
            V.excess_integral(quad_flow, weight="t", xstar=0.0)


class TestDecayProducts:
    def test_t_weight_lim(self, quartic_flow):
        rep = V.decay_products(quartic_flow, "t", threshold=1e-2)
        assert rep.passed
        assert rep.details["tail_sup"] <= 1.1e-2

    def test_t_log2_liminf(self, quartic_flow):
        rep = V.decay_products(quartic_flow, "t*log2t", threshold=1e-1,
                               kind="liminf")
        assert rep.passed

    def test_zero_excess(self):
        t = np.geomspace(1.0, 1e4, 50)
        traj = make_traj(t, np.zeros_like(t), np.zeros_like(t),
                         np.zeros_like(t))
        assert V.decay_products(traj, "t2").passed

    def test_short_horizon_inconclusive(self):
        t = np.linspace(1.0, 3.0, 10)
        traj = make_traj(t, 1.0 / t, 1.0 / t, 1.0 / t)
        rep = V.decay_products(traj, "t", threshold=1e-6)
        assert rep.verdict == V.INCONCLUSIVE

    def test_liminf_never_fails(self):
        t = np.geomspace(1.0, 1e5, 60)
        traj = make_traj(t, 1.0 / t, 1.0 / t, 1.0 / t)  # t*excess == 1
        rep = V.decay_products(traj, "t", threshold=1e-6, kind="liminf")
        assert rep.verdict == V.INCONCLUSIVE


class TestBestIterate:
    def test_window_oracle(self, quartic_flow):
        # grid-minimization oracle over [10, 10 log 10]
        rep = V.best_iterate_bound(quartic_flow, 10.0, xstar=0.0)
        lo, hi = rep.details["window"]
        w = (quartic_flow.t >= lo) & (quartic_flow.t <= hi)
        oracle = float(np.min(quartic_flow.t[w] * quartic_flow.f[w]))
        assert rep.details["best"] == oracle
        assert rep.passed
        # the exact minimum of s/(1+s)^2 over the window sits at its right end
        assert rep.details["argmin"] == pytest.approx(hi, rel=0.01)

    def test_t_below_e_rejected(self, quartic_flow):
        with pytest.raises(F.PreconditionError):
            V.best_iterate_bound(quartic_flow, 2.0)

    def test_insufficient_coverage(self, quad_flow):
        with pytest.raises(F.PreconditionError, match="cover"):
            V.best_iterate_bound(quad_flow, 15.0)  # needs up to 15 log 15


class TestPathLength:
    def test_quadratic_flow_length(self, quad_flow):
        assert V.path_length(quad_flow) == pytest.approx(2.0, abs=1e-3)

    def test_stationary(self):
        traj = F.integrate_gradient_flow(F.Quadratic(1.0), 0.0, t_end=4.0)
        assert V.path_length(traj) == 0.0

    def test_refined_quarter_constant(self, quartic_flow):
        # excess <= length^2/(4t) with the 1/4 constant
        L = V.path_length(quartic_flow)
        pos = quartic_flow.t > 0
        assert np.all(quartic_flow.f[pos]
                      <= L ** 2 / (4.0 * quartic_flow.t[pos]) + 1e-12)


class TestSelfContracting:
    def test_monotone_passes_exactly(self, quad_flow):
        rep = V.self_contracting_check(quad_flow, tolerance=0.0)
        assert rep.passed

    def test_oscillator_fails_with_witness(self, oscillator_trajectory):
        rep = V.self_contracting_check(oscillator_trajectory, tolerance=0.0)
        assert rep.verdict == V.FAIL
        t1, t2, t3 = rep.details["witness_triple"]
        assert t1 < t2 < t3
        # replay the witness against the raw samples
        x = np.asarray(oscillator_trajectory.x)
        t = oscillator_trajectory.t
        i, j, k = (int(np.argmin(np.abs(t - v))) for v in (t1, t2, t3))
        assert abs(x[j] - x[k]) > abs(x[i] - x[k])

    def test_two_samples_vacuous(self):
        traj = make_traj([0.0, 1.0], [1.0, 0.5], [1.0, 0.25], [1.0, 0.5])
        assert V.self_contracting_check(traj).passed

    def test_rerun_identical(self, oscillator_trajectory):
        a = V.self_contracting_check(oscillator_trajectory)
        b = V.self_contracting_check(oscillator_trajectory)
        assert a.worst_margin == b.worst_margin
        assert a.details == b.details


class TestGdSumBound:
    def test_halving_case(self):
        traj = F.run_gd(F.Quadratic(1.0), 1.0, eta=0.5, n_iter=60,
                        lipschitz=1.0)
        rep = V.gd_sum_bound(traj, xstar=0.0)
        assert rep.passed
        assert rep.details["sum"] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert rep.details["bound"] == pytest.approx(2.0 / 3.0)

    def test_eta_equal_inverse_L_specialization(self):
        # eta = 1/L: sum excess <= L|x0-x*|^2/2 + excess_0
        L, x0 = 2.0, 1.5
        traj = F.run_gd(F.Quadratic(L), x0, eta=1.0 / L, n_iter=40,
                        lipschitz=L)
        rep = V.gd_sum_bound(traj, xstar=0.0)
        spec_bound = L * x0 ** 2 / 2.0 + traj.f[0]
        total = float(np.sum(traj.f))
        assert total <= spec_bound + 1e-12
        assert rep.details["bound"] * (1.0 / L) ** -1 == pytest.approx(
            spec_bound)  # lemma form * 1/eta equals the specialization

    def test_start_at_minimizer(self):
        traj = F.run_gd(F.Quadratic(1.0), 0.0, eta=0.5, n_iter=10,
                        lipschitz=1.0)
        rep = V.gd_sum_bound(traj, xstar=0.0)
        assert rep.passed and rep.details["sum"] == 0.0

    def test_metadata_mismatch(self):
        traj = F.run_gd(F.Quadratic(1.0), 1.0, eta=0.5, n_iter=10,
                        lipschitz=1.0)
        with pytest.raises(F.PreconditionError, match="mismatch"):
            V.gd_sum_bound(traj, eta=0.25)

    def test_n_excess_reports(self):
        traj = F.run_gd(F.Quadratic(1.0), 1.0, eta=0.5, n_iter=60,
                        lipschitz=1.0)
        rep = V.gd_sum_bound(traj, xstar=0.0)
        assert rep.details["n_excess_tail"]["verdict"] == V.PASS
        assert rep.details["n_logn_running_inf"]["verdict"] == V.PASS


class TestSgdBounds:
    def test_sigma_zero_reduces_to_gd(self):
        reps = F.run_sgd(F.Quadratic(1.0), 1.0, eta=0.5, sigma=0.0, n_iter=60,
                         seed=0, replicas=2, lipschitz=1.0)
        rep = V.sgd_bounds(reps, xstar=0.0)
        gd = V.gd_sum_bound(F.run_gd(F.Quadratic(1.0), 1.0, eta=0.5,
                                     n_iter=60, lipschitz=1.0), xstar=0.0)
        assert rep.passed == gd.passed
        assert rep.details["mean_sum"] == pytest.approx(
            gd.details["sum"] / 0.5)

    def test_quadratic_testbed(self):
        reps = F.run_sgd(F.Quadratic(1.0), 1.0, eta=0.5, sigma=1.0,
                         n_iter=100, seed=42, replicas=3000, lipschitz=1.0)
        rep = V.sgd_bounds(reps, xstar=0.0)
        assert rep.passed
        assert abs(rep.details["mean_sum"] - 1.0) <= 3.0 * rep.details["stderr"]
        # bound at eta = 1/(L(1+sigma^2)): L(1+s^2)/2 d0^2 + 2(1+s^2) ex_0 = 3
        assert rep.details["bound"] == pytest.approx(3.0)

    def test_heterogeneous_replicas_rejected(self):
        a = F.run_sgd(F.Quadratic(1.0), 1.0, eta=0.5, sigma=1.0, n_iter=10,
                      seed=0, replicas=1, lipschitz=1.0)
        b = F.run_sgd(F.Quadratic(1.0), 1.0, eta=0.4, sigma=1.0, n_iter=10,
                      seed=0, replicas=1, lipschitz=1.0)
        with pytest.raises(F.PreconditionError, match="heterogeneous"):
            V.sgd_bounds(a + b)


class TestHbLyapunov:
    def test_zero_at_rest_on_minimizer(self):
        t = np.linspace(0.1, 5.0, 30)
        traj = make_traj(t, np.zeros_like(t), np.zeros_like(t),
                         np.zeros_like(t), v=np.zeros_like(t),
                         dynamics="heavy_ball_ode", alpha=3.0)
        rep = V.hb_lyapunov(traj, 0.0)
        assert rep.passed and rep.details["L0"] == 0.0

    def test_oscillator_monotone(self, oscillator_trajectory):
        rep = V.hb_lyapunov(oscillator_trajectory, 0.0, tolerance=1e-6)
        assert rep.passed

    def test_post_bound_alpha3_constant2(self, oscillator_trajectory):
        # excess <= (alpha-1)^2 |x0-x*|^2/(2 t^2) = 2/t^2 for alpha = 3
        traj = oscillator_trajectory
        pos = traj.t >= 1.0
        assert np.all(traj.f[pos] <= 2.0 / traj.t[pos] ** 2 + 1e-9)
        rep = V.hb_lyapunov(traj, 0.0)
        assert rep.details["post_bound"]["verdict"] == V.PASS
        assert rep.details["energy_ok"]

    def test_needs_velocities(self, quad_flow):
        with pytest.raises(F.PreconditionError, match="velocities"):
            V.hb_lyapunov(quad_flow, 0.0, alpha=3.0)

    def test_alpha_below_three_rejected(self, oscillator_trajectory):
        with pytest.raises(F.PreconditionError):
            V.hb_lyapunov(oscillator_trajectory, 0.0, alpha=2.0)


class TestHbSpeedBound:
    def test_zero_force_zero_speed(self):
        traj = F.integrate_heavy_ball_ode(F.Monomial(0.0, 2), 1.0, 3.0,
                                          t_end=5.0, t_start=1e-3)
        rep = V.hb_speed_bound(traj)
        assert rep.passed and float(np.max(np.abs(traj.v))) == 0.0

    def test_quadratic_speed_cap(self, oscillator_trajectory):
        rep = V.hb_speed_bound(oscillator_trajectory, tolerance=1e-9)
        cap = math.sqrt(2.0 * oscillator_trajectory.f[0])
        assert rep.passed
        assert float(np.max(np.abs(oscillator_trajectory.v))) <= cap

    def test_nonzero_initial_velocity_rejected(self):
        t = np.linspace(0.1, 2.0, 10)
        traj = make_traj(t, np.ones_like(t), np.ones_like(t),
                         np.ones_like(t), v=np.ones_like(t))
        with pytest.raises(F.PreconditionError):
            V.hb_speed_bound(traj)


def test_three_quantities_dominated_by_envelope(quartic_flow):
    # target g, simulated f, both under min(L0/t, length^2/(4t))
    L0 = 0.5 * quartic_flow.x[0] ** 2
    plen = V.path_length(quartic_flow)
    pos = quartic_flow.t > 0
    env = np.minimum(L0 / quartic_flow.t[pos],
                     plen ** 2 / (4.0 * quartic_flow.t[pos]))
    g = (1.0 + quartic_flow.t[pos]) ** -2.0
    assert np.all(quartic_flow.f[pos] <= env + 1e-12)
    assert np.all(g <= env + 1e-12)
