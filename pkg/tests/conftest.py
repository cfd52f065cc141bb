import numpy as np
import pytest

from qhode import detect_weights, expand, load_system, parse_system, solve_balances
from qhode.report import resolve_system_path

BUNDLED = ("euler", "kowalewski", "riccati", "weierstrass")


def bundled(name):
    return load_system(resolve_system_path(name))


def euler_text(l1, l2, l3):
    return f"""
consts: lambda1 = {l1!r}, lambda2 = {l2!r}, lambda3 = {l3!r}
vars: m1, m2, m3
eq: m1' = (lambda3 - lambda2) * m2 * m3
eq: m2' = (lambda1 - lambda3) * m1 * m3
eq: m3' = (lambda2 - lambda1) * m1 * m2
integral H1 = 0.5*(lambda1*m1^2 + lambda2*m2^2 + lambda3*m3^2)
integral H2 = 0.5*(m1^2 + m2^2 + m3^2)
poisson: [[0, -m3, m2], [m3, 0, -m1], [-m2, m1, 0]]
hamiltonian: H1
"""


def euler_spec(lams):
    return parse_system(euler_text(*lams), title="euler")


class Expanded:
    """Weights, balances and expansions of one system, computed once."""

    def __init__(self, spec, order=20, alpha=2.0):
        self.spec = spec
        self.s = tuple(detect_weights(spec))
        self.balances = solve_balances(spec, self.s)
        self.solutions = [expand(spec, self.s, b, order,
                                 alpha=alpha if b.parameter is not None else None)
                          for b in self.balances]


_CACHE = {}


def expanded(name, order=20, alpha=2.0):
    key = (name, order, alpha)
    if key not in _CACHE:
        _CACHE[key] = Expanded(bundled(name), order, alpha)
    return _CACHE[key]


@pytest.fixture(scope="session")
def euler():
    return expanded("euler")


@pytest.fixture(scope="session")
def kowalewski():
    return expanded("kowalewski", order=16)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
