import numpy as np
import pytest

from decaylab import acceptance, construct, curves, flows


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    acceptance.warmup_kernels()


@pytest.fixture(scope="session")
def exp_curve():
    return curves.make_named_curve("exponential")


@pytest.fixture(scope="session")
def invsq_curve():
    return curves.make_named_curve("inverse_square")


@pytest.fixture(scope="session")
def quartic_objective(invsq_curve):
    return construct.build_objective(invsq_curve, t_end=17500.0,
                                     points_per_decade=128)


@pytest.fixture(scope="session")
def quartic_flow(quartic_objective):
    sched = np.concatenate([[0.0], np.geomspace(1e-3, 1000.0, 4000),
                            np.geomspace(1000.0, 7000.0, 800)[1:]])
    return flows.integrate_gradient_flow(quartic_objective,
                                         quartic_objective.X,
                                         sample_schedule=sched)


@pytest.fixture(scope="session")
def oscillator_trajectory():
    """mu=1, alpha=3 heavy-ball run used by several checks."""
    return flows.integrate_heavy_ball_ode(flows.Quadratic(1.0), 1.0, 3.0,
                                          t_end=60.0, t_start=1.5e-3)
