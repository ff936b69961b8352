"""Mean-field variance recursion, criticality scans and bias-drift bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .activations import Activation
from .errors import ArgumentError, ConvergenceError, DomainError
from .quadrature import DEFAULT_ORDER, GaussianLaw, build_rule, expectation_points, integrate_line, sign_changes
from .serialize import to_csv
from .signature import gaussian_components
from .tails import compensated_primitive

ESCAPE = 1e12
Q_FLOOR = 1e-12
RESIDUAL_TOL = 1e-10


def _m2(act, s, rule):
    if s == 0:
        return float(act.value(np.array([0.0]))[0]) ** 2
    y, w = expectation_points(rule, GaussianLaw(0.0, s), act.breakpoints, panels=True)
    v = act.value(y)
    return float(np.dot(w, v * v))


def variance_map(act: Activation, q: float, sigma_w: float, sigma_b: float, order: int = DEFAULT_ORDER) -> float:
    """f(q) = sigma_w^2 m2(sqrt q) + sigma_b^2."""
    if not q >= 0:
        raise ArgumentError(f"q must be nonnegative, got {q!r}")
    return sigma_w ** 2 * _m2(act, math.sqrt(q), build_rule(order)) + sigma_b ** 2


def variance_map_derivative(act: Activation, q: float, sigma_w: float, order: int = DEFAULT_ORDER) -> float:
    """f'(q) = sigma_w^2 m2'(sqrt q) / (2 sqrt q), evaluated at q = 1e-12 below that floor."""
    q = max(q, Q_FLOOR)
    s = math.sqrt(q)
    g = gaussian_components(act, s, build_rule(order))
    return sigma_w ** 2 * g.m2_prime / (2.0 * s)


@dataclass(frozen=True)
class FixedPointReport:
    q_star: float
    f_prime: float
    variance_stable: bool
    perturbation_stable: bool
    iterations: int
    trajectory: tuple = field(repr=False)
    converged: bool
    method: str = "iteration"

    def summary(self) -> dict:
        return {
            "q_star": self.q_star,
            "f_prime": self.f_prime,
            "variance_stable": self.variance_stable,
            "perturbation_stable": self.perturbation_stable,
            "converged": self.converged,
        }


def _bracket_root(g, q, direction):
    """Walk geometrically from q in `direction` until g changes sign."""
    g0 = g(q)
    step = max(abs(q) * 1e-3, 1e-6)
    lo = q
    while True:
        hi = lo + direction * step
        if hi < 0:
            hi = 0.0
        if hi > ESCAPE:
            return None
        if g(hi) * g0 <= 0:
            return (min(lo, hi), max(lo, hi))
        if hi == 0.0:
            return None
        lo, step = hi, step * 2.0


def solve_fixed_point(
    act: Activation,
    sigma_w: float,
    sigma_b: float,
    q0: float = 1.0,
    max_iters: int = 1000,
    tol: float = 1e-12,
    order: int = DEFAULT_ORDER,
) -> FixedPointReport:
    """Iterate q -> f(q) from q0 and classify the equilibrium.

    Plain iteration is the primary method. A 2-cycle, or running out of
    iterations while still moving, switches to bracketing plus Brent's method
    on f(q) - q in the direction the iterates were heading. Iterates above
    1e12 count as divergence.
    """
    if not q0 >= 0:
        raise ArgumentError(f"q0 must be nonnegative, got {q0!r}")
    if not tol > 0:
        raise ArgumentError(f"tol must be positive, got {tol!r}")
    if not sigma_w > 0 or not sigma_b >= 0:
        raise ArgumentError("sigma_w must be positive and sigma_b nonnegative")
    rule = build_rule(order)

    def f(q):
        return sigma_w ** 2 * _m2(act, math.sqrt(q), rule) + sigma_b ** 2

    traj = [float(q0)]
    q = float(q0)
    q_star = None
    method = "iteration"
    for _ in range(max_iters):
        qn = f(q)
        traj.append(qn)
        if not math.isfinite(qn) or qn > ESCAPE:
            return FixedPointReport(math.inf, math.nan, False, False, len(traj) - 1, tuple(traj), False)
        if abs(qn - q) <= tol * max(1.0, q):
            q_star = qn
            break
        if len(traj) >= 3 and abs(traj[-1] - traj[-3]) <= tol * max(1.0, q) and qn != q:
            method = "bisection"
            break
        q = qn

    if q_star is None:
        g = lambda x: f(x) - x  # noqa: E731
        if method == "bisection":
            bracket = (min(traj[-1], traj[-2]), max(traj[-1], traj[-2]))
        else:
            method = "brent"
            bracket = _bracket_root(g, traj[-1], 1.0 if g(traj[-1]) > 0 else -1.0)
        if bracket is None:
            return FixedPointReport(math.inf, math.nan, False, False, len(traj) - 1, tuple(traj), False, method)
        lo, hi = bracket
        q_star = lo if g(lo) == 0 else hi if g(hi) == 0 else brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)

    converged = abs(f(q_star) - q_star) <= RESIDUAL_TOL * max(1.0, q_star)
    s = math.sqrt(max(q_star, Q_FLOOR))
    comp = gaussian_components(act, s, rule)
    f_prime = sigma_w ** 2 * comp.m2_prime / (2.0 * s)
    return FixedPointReport(
        q_star=q_star,
        f_prime=f_prime,
        variance_stable=bool(converged and abs(f_prime) < 1.0),
        perturbation_stable=bool(converged and sigma_w * comp.g2 < 1.0),
        iterations=len(traj) - 1,
        trajectory=tuple(traj),
        converged=bool(converged),
        method=method,
    )


@dataclass(frozen=True)
class CriticalityGrid:
    """cells[i][j] belongs to (sigma_w_axis[i], sigma_b_axis[j])."""

    sigma_w_axis: tuple
    sigma_b_axis: tuple
    cells: tuple

    def __post_init__(self):
        if len(self.cells) != len(self.sigma_w_axis) or any(len(r) != len(self.sigma_b_axis) for r in self.cells):
            raise ArgumentError("grid dimensions do not match the axes")

    def boundary(self) -> np.ndarray:
        """True where either stability verdict differs from a 4-neighbour."""
        v = np.array([[c.variance_stable for c in row] for row in self.cells])
        p = np.array([[c.perturbation_stable for c in row] for row in self.cells])
        out = np.zeros(v.shape, dtype=bool)
        for m in (v, p):
            dw = m[1:, :] != m[:-1, :]
            db = m[:, 1:] != m[:, :-1]
            out[1:, :] |= dw
            out[:-1, :] |= dw
            out[:, 1:] |= db
            out[:, :-1] |= db
        return out

    HEADER = ("sigma_w", "sigma_b", "q_star", "f_prime", "variance_stable", "perturbation_stable", "converged")

    def rows(self):
        for i, sw in enumerate(self.sigma_w_axis):
            for j, sb in enumerate(self.sigma_b_axis):
                c = self.cells[i][j]
                yield (sw, sb, c.q_star, c.f_prime, c.variance_stable, c.perturbation_stable, c.converged)

    def to_csv(self) -> str:
        return to_csv(self.HEADER, self.rows())


def criticality_scan(
    act: Activation,
    sigma_w_axis,
    sigma_b_axis,
    q0: float = 1.0,
    order: int = DEFAULT_ORDER,
    max_iters: int = 1000,
) -> CriticalityGrid:
    """Solve the recursion on every (sigma_w, sigma_b) cell.

    A cell that diverges is recorded as such; the scan continues.
    """
    sw = tuple(float(x) for x in sigma_w_axis)
    sb = tuple(float(x) for x in sigma_b_axis)
    if len(sw) < 2 or len(sb) < 1:
        raise ArgumentError("criticality_scan needs at least 2 sigma_w values and 1 sigma_b value")
    cells = tuple(
        tuple(solve_fixed_point(act, w, b, q0=q0, order=order, max_iters=max_iters) for b in sb)
        for w in sw
    )
    return CriticalityGrid(sw, sb, cells)


def axis(start: float, end: float, count: int) -> tuple:
    """Inclusive, evenly spaced axis; count == 1 requires start == end."""
    if count < 1:
        raise ArgumentError("axis count must be >= 1")
    if count == 1:
        if start != end:
            raise ArgumentError("a single-point axis needs start == end")
        return (float(start),)
    return tuple(float(x) for x in np.linspace(start, end, count))


@dataclass(frozen=True)
class BiasDriftReport:
    name: str
    sigma: float
    m1: float
    lhs: float
    rhs: float
    c_phi: float
    holds: bool


def bias_drift_check(act: Activation, sigma: float, order: int = DEFAULT_ORDER, abs_tol: float = 1e-10) -> BiasDriftReport:
    """Compare |m1 - (a+ - a-) sigma / sqrt(2 pi)| with sqrt(2/pi) C(phi) / sigma."""
    if not act.slopes_finite:
        raise DomainError(f"bias drift bound needs finite asymptotic slopes ({act.name!r})")
    if not sigma > 0:
        raise ArgumentError(f"sigma must be positive, got {sigma!r}")
    m1 = gaussian_components(act, sigma, build_rule(order)).m1
    lhs = abs(m1 - (act.alpha_plus - act.alpha_minus) * sigma / math.sqrt(2.0 * math.pi))
    c_phi, _ = compensated_primitive(act, abs_tol)
    rhs = math.sqrt(2.0 / math.pi) * c_phi / sigma
    holds = math.isinf(rhs) or lhs <= rhs + 1e-9
    return BiasDriftReport(act.name, float(sigma), m1, lhs, rhs, c_phi, bool(holds))


def crude_bias_bound(act: Activation, abs_tol: float = 1e-10) -> float:
    """Integral of |phi(x) + phi(-x)| over (0, inf); inf when it diverges.

    Dividing by sqrt(2 pi) sigma bounds |m1(sigma)|.
    """
    even = lambda x: act.value(x) + act.value(-x)  # noqa: E731
    kinks = tuple(sorted({abs(b) for b in act.breakpoints}))
    try:
        return integrate_line(
            lambda x: np.abs(even(x)), abs_tol, lower=0.0,
            breakpoints=kinks + sign_changes(even, 0.0, 50.0, exclude=kinks),
        )
    except ConvergenceError:
        return math.inf
