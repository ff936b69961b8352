import math

import numpy as np
import pytest
from scipy import integrate

ACCEPTANCE = []


def normal_expect(f, sigma, mean=0.0, points=()):
    """Independent oracle: scipy adaptive quadrature of f against the N(mean, sigma^2) density."""
    dens = lambda x: math.exp(-0.5 * ((x - mean) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))  # noqa: E731
    g = lambda x: float(f(np.array([x]))[0]) * dens(x)  # noqa: E731
    lo, hi = mean - 14 * sigma, mean + 14 * sigma
    cuts = sorted({lo, hi, mean, *[p for p in points if lo < p < hi]})
    return sum(
        integrate.quad(g, a, b, epsabs=1e-15, epsrel=1e-13, limit=400)[0] for a, b in zip(cuts[:-1], cuts[1:])
    )


def record(label, ok, detail=""):
    ACCEPTANCE.append((label, bool(ok), detail))
    return ok


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))
