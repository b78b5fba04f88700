import numpy as np
import pytest

from shishkin_robin.problem import Problem

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def record_criterion():
    def record(name, ok, detail=""):
        ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok
    return record


def random_nonneg_problem(rng: np.random.Generator) -> Problem:
    """Smooth random data with f, phi >= 0 and a >= alpha > 0."""
    eps = 2.0 ** rng.uniform(-14, -2)
    alpha = rng.uniform(0.1, 2.0)
    ca = rng.uniform(0, 3, size=3)
    cf = rng.uniform(0, 5, size=4)
    cl = rng.uniform(0, 2, size=2)
    cr = rng.uniform(0, 2, size=2)
    cb = rng.uniform(0, 2, size=2)
    wf = rng.uniform(1, 10)

    def a(x, t):
        return alpha + ca[0] + ca[1] * np.asarray(x) ** 2 + ca[2] * np.sin(3 * np.asarray(t)) ** 2

    def f(x, t):
        x = np.asarray(x)
        t = np.asarray(t)
        return cf[0] + cf[1] * x * (1 - x) + cf[2] * np.cos(wf * x) ** 2 + cf[3] * t

    return Problem(
        a=a,
        f=f,
        phi_L=lambda t: cl[0] + cl[1] * np.asarray(t) ** 2,
        phi_R=lambda t: cr[0] + cr[1] * np.sin(np.asarray(t)) ** 2,
        phi_B=lambda x: cb[0] + cb[1] * np.cos(2 * np.asarray(x)) ** 2,
        epsilon=eps,
        alpha=alpha,
        T=1.0,
    )


def data_sup(p: Problem, density: int = 400, x=(), t=()) -> float:
    """max(|phi_L|, |phi_R|, |phi_B|, |f|/alpha) sampled densely and at the given mesh points."""
    xs = np.union1d(np.linspace(0, 1, density + 1), np.asarray(x, dtype=float))
    ts = np.union1d(np.linspace(0, p.T, density + 1), np.asarray(t, dtype=float))
    X, T = np.meshgrid(xs, ts, indexing="ij")
    return max(
        np.abs(p.phi_L(ts)).max(),
        np.abs(p.phi_R(ts)).max(),
        np.abs(p.phi_B(xs)).max(),
        np.abs(p.f(X, T)).max() / p.alpha,
    )
