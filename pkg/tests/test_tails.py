import math

import numpy as np
import pytest
from scipy import integrate, optimize

from actsig.activations import STANDARD_ACTIVATIONS, Finiteness, builtin
from actsig.errors import DomainError
from actsig.tails import (
    FIRST_WINDOW, Verdict, abs_normal_moment, compensated_primitive, residual_profile, tv_slope,
    weighted_slope_bound,
)

PI2_12 = sum((-1) ** (k + 1) / k ** 2 for k in range(1, 400001))


def test_relu_profile_is_identically_zero():
    prof = residual_profile(builtin("relu"))
    assert prof.verdict is Verdict.CONVERGED
    assert prof.window == FIRST_WINDOW
    assert np.all(prof.d_values == 0) and np.all(prof.f_asym_values == 0)
    assert compensated_primitive(builtin("relu")) == (0.0, 0.0)


@pytest.mark.parametrize("name", [*STANDARD_ACTIVATIONS, "leaky_relu(0.3)"])
def test_verdicts_follow_finiteness_metadata(name):
    act = builtin(name)
    prof = residual_profile(act)
    converged = prof.verdict is Verdict.CONVERGED
    assert converged == (act.c_phi_finite is Finiteness.FINITE)
    assert math.isfinite(prof.c_phi) == converged


def test_saturating_profiles_diverge():
    for name in ("tanh", "sigmoid"):
        prof = residual_profile(builtin(name))
        assert prof.verdict is Verdict.DIVERGED and math.isinf(prof.c_phi)


def test_swish_matches_series():
    c, loc = compensated_primitive(builtin("swish"))
    assert abs(c - PI2_12) < 1e-6
    # The sup is a limit; the argmax lands in the flat tail, not at a finite extremum.
    assert abs(loc) > 20


def test_gelu_closed_form():
    # F_asym(+inf) = -int_0^inf x Phi(-x) dx = -1/4, and the same on the left.
    c, _ = compensated_primitive(builtin("gelu"))
    assert abs(c - 0.25) < 1e-8


@pytest.mark.parametrize("name", ["mish", "telu", "swish", "gelu"])
def test_c_phi_against_scipy(name):
    act = builtin(name)

    def F(x):
        slope = act.alpha_plus if x >= 0 else act.alpha_minus
        d = lambda t: float(act.value(np.array([t]))[0]) - slope * t  # noqa: E731
        return integrate.quad(d, 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=400)[0]

    candidates = [abs(F(60.0)), abs(F(-60.0))]
    for lo, hi in ((-60, -1e-9), (1e-9, 60)):
        grid = np.linspace(lo, hi, 241)
        i = int(np.argmax([abs(F(x)) for x in grid]))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(lambda x: -abs(F(x)), bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-10})
        candidates.append(-res.fun)
    assert compensated_primitive(act)[0] == pytest.approx(max(candidates), abs=1e-7)


@pytest.mark.parametrize("name", ["relu", "leaky_relu(0.3)", "swish", "gelu", "mish", "telu"])
def test_weighted_bound_dominates(name):
    act = builtin(name)
    assert weighted_slope_bound(act) >= compensated_primitive(act)[0] - 1e-10


def test_weighted_bound_examples():
    assert weighted_slope_bound(builtin("relu")) == 0
    assert weighted_slope_bound(builtin("swish")) >= PI2_12
    with pytest.raises(DomainError):
        weighted_slope_bound(builtin("tanh"))


@pytest.mark.parametrize("name,value", [("relu", 1.0), ("leaky_relu(0.3)", 0.7), ("tanh", 2.0), ("identity", 0.0)])
def test_tv_numeric_matches_analytic(name, value):
    assert abs(tv_slope(builtin(name), prefer_analytic=False) - value) < 1e-8


def test_sigmoid_tv_riemann_oracle():
    x = np.arange(-60, 60, 1e-4)
    act = builtin("sigmoid")
    riemann = float(np.sum(np.abs(act.second_deriv(x))) * 1e-4)
    assert tv_slope(act) == pytest.approx(riemann, abs=1e-8)
    assert tv_slope(act) == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("name", ["swish", "gelu", "mish", "telu"])
def test_tv_smooth_against_scipy(name):
    act = builtin(name)
    g = lambda t: abs(float(act.second_deriv(np.array([t]))[0]))  # noqa: E731
    edges = np.linspace(-60, 60, 1201)
    want = sum(integrate.quad(g, a, b, epsabs=1e-15, epsrel=1e-13)[0] for a, b in zip(edges[:-1], edges[1:]))
    assert tv_slope(act) == pytest.approx(want, abs=1e-9)


def test_superlinear_tv_is_infinite():
    assert math.isinf(tv_slope(builtin("poly(2)")))


def test_abs_normal_moments():
    assert abs_normal_moment(2) == pytest.approx(1.0)
    assert abs_normal_moment(4) == pytest.approx(3.0)
    assert abs_normal_moment(1) == pytest.approx(math.sqrt(2 / math.pi))


def test_profile_csv():
    text = residual_profile(builtin("relu")).to_csv()
    assert text.splitlines()[0] == "t,D,F_asym"
