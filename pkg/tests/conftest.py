import numpy as np
import pytest

from afba.momentum import no_momentum
from afba.problems import make_lasso
from afba.solver import SolveConfig, solve

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def central_gradient(fun, x, rel_step=1e-6):
    h = rel_step * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def grid_prox_scalar(t, mu, lo=-10.0, hi=10.0, step=1e-4):
    """Brute-force minimizer of 0.5 (u - t)^2 + mu |u| on a uniform grid."""
    u = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    return u[np.argmin(0.5 * (u - t) ** 2 + mu * np.abs(u))]


@pytest.fixture(scope="session")
def lasso_ref():
    """Seeded 20x50 LASSO with its FBA fixed point (up to 1e6 iterations).

    Seed 1 is used because its accelerated runs stay above the rounding
    floor throughout the first tenth of a 2e4-iteration horizon.
    """
    problem, A, c = make_lasso(20, 50, 0.1, seed=1)
    x_ref, trace = solve(problem, SolveConfig(no_momentum(), max_iters=10**6,
                                              trace_every=10**6))
    return problem, x_ref, problem.objective(x_ref), trace.iters_run
