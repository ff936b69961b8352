"""Contraction and Lyapunov-descent certificates for T(x) = phi(a x + b)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .activations import Activation
from .errors import ArgumentError, ConvergenceError
from .montecarlo import EstimateWithError
from .quadrature import DEFAULT_ORDER, build_rule, integrate_interval
from .rng import normals
from .signature import gaussian_components

SUP_GRID = (-100.0, 100.0, 400001)
FIXED_POINT_TOL = 1e-12


def chebyshev_probes(lo: float = -5.0, hi: float = 5.0, n: int = 64) -> np.ndarray:
    """Chebyshev-Lobatto points on [lo, hi], endpoints included, increasing."""
    if n < 2:
        return np.array([0.5 * (lo + hi)])
    k = np.arange(n)
    return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(np.pi * k / (n - 1))


def sup_slope(act: Activation) -> tuple[float, bool]:
    """(sup |phi'|, approximate?) from metadata, else from a dense grid on [-100, 100]."""
    if act.sup_slope is not None:
        return float(act.sup_slope), False
    lo, hi, n = SUP_GRID
    x = np.concatenate([np.linspace(lo, hi, n), np.asarray(act.breakpoints, dtype=float)])
    return float(np.max(np.abs(act.deriv(x)))), True


def descent_constant(lipschitz: float) -> float:
    """c = (1 + L) / (2 (1 - L)), the constant stated with the contraction theorem."""
    return (1.0 + lipschitz) / (2.0 * (1.0 - lipschitz))


def guaranteed_descent_constant(lipschitz: float) -> float:
    """c = (1 - L) / (2 (1 + L)).

    From |T(x) - x| <= (1 + L)|x - x*| and |T(x) - x*| <= L |x - x*| this
    constant always yields V(T(x)) - V(x) <= -c |T(x) - x|^2; it is sharp
    for linear maps T(x) = -L x.
    """
    return (1.0 - lipschitz) / (2.0 * (1.0 + lipschitz))


@dataclass(frozen=True)
class ContractionCertificate:
    a: float
    b: float
    lipschitz_T: float
    x_star: Optional[float]
    descent_constant: float
    is_contraction: bool
    l2_gain: float
    sigma_ref: float
    sup_slope_approximate: bool = False

    def T(self, act: Activation, x):
        return act.value(self.a * np.asarray(x, dtype=float) + self.b)


def _fixed_point(act, a, b, lipschitz, max_iters=100000):
    x = 0.0
    for _ in range(max_iters):
        xn = float(act.value(np.array([a * x + b]))[0])
        if abs(xn - x) <= FIXED_POINT_TOL * max(1.0, abs(x)):
            # Polish: one more step lands within L * residual of x*.
            return float(act.value(np.array([a * xn + b]))[0])
        x = xn
    raise ConvergenceError(f"fixed-point iteration did not settle (L_T={lipschitz})")


def certify_contraction(
    act: Activation, a: float, b: float = 0.0, sigma_ref: float = 1.0, order: int = DEFAULT_ORDER
) -> ContractionCertificate:
    """Global Lipschitz certificate for T(x) = phi(a x + b)."""
    if not sigma_ref > 0:
        raise ArgumentError(f"sigma_ref must be positive, got {sigma_ref!r}")
    sup, approx = sup_slope(act)
    lip = abs(a) * sup
    g2 = gaussian_components(act, sigma_ref, build_rule(order)).g2
    if lip >= 1.0:
        return ContractionCertificate(a, b, lip, None, math.inf, False, abs(a) * g2, sigma_ref, approx)
    x_star = _fixed_point(act, a, b, lip)
    return ContractionCertificate(a, b, lip, x_star, descent_constant(lip), True, abs(a) * g2, sigma_ref, approx)


@dataclass(frozen=True)
class DescentReport:
    constant: float
    probes: int
    worst_slack: float
    worst_x: float
    violations: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "probes": self.probes,
            "worst_slack": self.worst_slack,
            "worst_x": self.worst_x,
            "passed": self.passed,
            "violations": [{"x": x, "lhs": l, "rhs": r} for x, l, r in self.violations],
        }


def _report(constant, x, lhs, rhs):
    slack = rhs - lhs
    i = int(np.argmin(slack))
    bad = np.flatnonzero(slack < 0)
    violations = tuple((float(x[j]), float(lhs[j]), float(rhs[j])) for j in bad)
    return DescentReport(constant, int(x.size), float(slack[i]), float(x[i]), violations)


def verify_descent(
    cert: ContractionCertificate, act: Activation, probes=None, c: Optional[float] = None
) -> DescentReport:
    """Check V(T(x)) - V(x) <= -c |T(x) - x|^2 + 1e-12 with V(x) = (x - x*)^2 / 2.

    `c` defaults to the certificate's constant. Passing
    ``guaranteed_descent_constant(cert.lipschitz_T)`` checks the version of
    the inequality that follows from contraction alone.
    """
    if not cert.is_contraction:
        raise ArgumentError("verify_descent needs a contraction certificate")
    c = cert.descent_constant if c is None else float(c)
    x = chebyshev_probes() if probes is None else np.asarray(probes, dtype=float)
    tx = cert.T(act, x)
    xs = cert.x_star
    lhs = 0.5 * (tx - xs) ** 2 - 0.5 * (x - xs) ** 2
    rhs = -c * (tx - x) ** 2 + 1e-12
    return _report(c, x, lhs, rhs)


def iterate_contraction_gaps(cert: ContractionCertificate, act: Activation, x0, steps: int = 30) -> np.ndarray:
    """max_k (|T^k(x0) - x*| - L^k |x0 - x*|) over k = 1..steps, per starting point."""
    x = np.asarray(x0, dtype=float).copy()
    d0 = np.abs(x - cert.x_star)
    worst = np.full(x.shape, -np.inf)
    for k in range(1, steps + 1):
        x = cert.T(act, x)
        worst = np.maximum(worst, np.abs(x - cert.x_star) - cert.lipschitz_T ** k * d0)
    return worst


class Primitive:
    """F(x) = integral of phi from 0 to x, accumulated over sorted query points."""

    def __init__(self, act: Activation, abs_tol: float = 1e-13):
        self.act = act
        self.abs_tol = abs_tol

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        flat = pts.ravel()
        out = np.empty_like(flat)
        kinks = self.act.breakpoints
        for sign in (1.0, -1.0):
            idx = np.flatnonzero(flat * sign > 0)
            order = idx[np.argsort(np.abs(flat[idx]))]
            acc, prev = 0.0, 0.0
            for i in order:
                # Each panel runs from the previous query point to the next.
                acc += integrate_interval(self.act.value, prev, flat[i], self.abs_tol, kinks)
                prev = flat[i]
                out[i] = acc
        out[flat == 0] = 0.0
        return out.reshape(pts.shape)


def f_lyapunov_descent(
    act: Activation, a: float, lam: float, probes=None, lipschitz: Optional[float] = None,
    flipped: bool = False,
) -> DescentReport:
    """Check the descent of V(x) = F(a x) - lam x^2 / 2 along T(x) = phi(a x).

    The inequality tested is V(T(x)) - V(x) <= -(lam - a^2 L)/2 |T(x) - x|^2 + 1e-10.
    This V increases along the iterates of any nontrivial contraction of this
    kind, so the check fails away from x = 0. ``flipped=True`` uses
    V(x) = lam x^2 / 2 - F(a x) instead, which does descend.
    """
    if not a >= 0:
        raise ArgumentError(f"a must be nonnegative, got {a!r}")
    zero = float(act.value(np.array([0.0]))[0])
    if abs(zero) > 1e-15:
        raise ArgumentError(f"phi(0) must be 0 for {act.name!r}, got {zero!r}")
    lo, hi, n = SUP_GRID
    grid = np.linspace(lo, hi, n)
    if np.any(act.deriv(grid) < -1e-15):
        raise ArgumentError(f"{act.name!r} is not nondecreasing")
    L = sup_slope(act)[0] if lipschitz is None else float(lipschitz)
    if not math.isfinite(L):
        raise ArgumentError("sup phi' must be finite")
    if not lam > a * a * L:
        raise ArgumentError(f"lambda must exceed a^2 L = {a * a * L!r}, got {lam!r}")
    x = chebyshev_probes(-4.0, 4.0) if probes is None else np.asarray(probes, dtype=float)
    tx = act.value(a * x)
    F = Primitive(act)
    fa = F(np.concatenate([a * x, a * tx]))
    sign = -1.0 if flipped else 1.0
    v_x = sign * (fa[: x.size] - 0.5 * lam * x * x)
    v_tx = sign * (fa[x.size:] - 0.5 * lam * tx * tx)
    const = 0.5 * (lam - a * a * L)
    lhs = v_tx - v_x
    rhs = -const * (tx - x) ** 2 + 1e-10
    return _report(const, x, lhs, rhs)


@dataclass(frozen=True)
class L2ContractionReport:
    a: float
    sigma: float
    g2: float
    l2_gain: float
    is_contraction: bool
    ratios: tuple  # (h, EstimateWithError, within_bound)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.ratios)

    def to_dict(self) -> dict:
        return {
            "a": self.a, "sigma": self.sigma, "g2": self.g2, "l2_gain": self.l2_gain,
            "is_contraction": self.is_contraction, "passed": self.passed,
            "ratios": [
                {"h": h, "value": e.value, "std_error": e.std_error, "within_bound": ok}
                for h, e, ok in self.ratios
            ],
        }


def l2_contraction_check(
    act: Activation, a: float, sigma: float, samples: int, seed: int,
    hs=(0.1, 0.01, 0.001), order: int = DEFAULT_ORDER,
) -> L2ContractionReport:
    """Monte Carlo difference quotients E[(phi(Z+h) - phi(Z))^2]^(1/2) / |h| against g2(sigma).

    A quotient is within bound when it does not exceed g2 + 3 SE, with a
    1e-12 relative allowance for rounding (linear maps have SE ~ 0).
    """
    g2 = gaussian_components(act, sigma, build_rule(order)).g2
    z = sigma * normals(seed, samples)
    rows = []
    for h in hs:
        sq = (act.value(z + h) - act.value(z)) ** 2 / (h * h)
        mean = float(np.mean(sq))
        se_mean = float(np.std(sq, ddof=1)) / math.sqrt(samples)
        ratio = math.sqrt(mean)
        se = se_mean / (2.0 * ratio) if ratio > 0 else math.sqrt(se_mean)
        est = EstimateWithError(ratio, se, samples, seed)
        rows.append((float(h), est, bool(ratio <= g2 + 3.0 * se + 1e-12 * max(1.0, g2))))
    gain = abs(a) * g2
    return L2ContractionReport(float(a), float(sigma), g2, gain, gain < 1.0, tuple(rows))
