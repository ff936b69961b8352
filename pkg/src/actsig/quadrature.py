"""Gauss-Hermite rules, Gaussian expectations and adaptive line integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ArgumentError, ConvergenceError, EvaluationError

MAX_ORDER = 1024
DEFAULT_ORDER = 160

# Standardized half-width beyond which exp(-t^2/2) is negligible in double precision.
_PIECEWISE_HALF_WIDTH = 12.0


def panel_nodes(order: int) -> int:
    """Gauss-Legendre nodes per unit panel used by the composite rule at `order`."""
    return max(4, int(order) // 8)

# Zeros of the Airy function Ai, used to seed the outermost Hermite roots.
_AIRY_ZEROS = (
    2.338107410459767,
    4.087949444130971,
    5.520559828095551,
    6.786708090071759,
    7.944133587120853,
)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight exp(-x^2) on the real line."""

    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != (self.order,) or weights.shape != (self.order,):
            raise ArgumentError("nodes and weights must both have length `order`")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class GaussianLaw:
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std)):
            raise ArgumentError(f"GaussianLaw std must be positive, got {self.std!r}")
        if not math.isfinite(self.mean):
            raise ArgumentError(f"GaussianLaw mean must be finite, got {self.mean!r}")


def _hermite_pair(n, x):
    """Orthonormal Hermite polynomials p_n(x), p_{n-1}(x) with a shared log scale.

    Values are rescaled whenever they exceed 1e150 so that large orders do
    not overflow; the Newton ratio p_n / p_{n-1} is scale free.
    """
    p_prev = np.zeros_like(x)
    p = np.full_like(x, math.pi ** -0.25)
    log_scale = np.zeros_like(x)
    for k in range(n):
        p_next = math.sqrt(2.0 / (k + 1)) * x * p - math.sqrt(k / (k + 1)) * p_prev
        p_prev, p = p, p_next
        big = np.abs(p) > 1e150
        if big.any():
            p = np.where(big, p * 1e-150, p)
            p_prev = np.where(big, p_prev * 1e-150, p_prev)
            log_scale = np.where(big, log_scale + 150.0 * math.log(10.0), log_scale)
    return p, p_prev, log_scale


def _initial_nodes(n):
    # Interior: semiclassical counting  pi - t + sin t cos t = 2 pi (k - 1/4) / (2n + 1)
    # with x = sqrt(2n + 1) cos t, solved by bisection.
    r2 = 2.0 * n + 1.0
    k = np.arange(1, n + 1)
    target = (k - 0.25) * 2.0 * math.pi / r2
    lo = np.zeros(n)
    hi = np.full(n, math.pi)
    for _ in range(60):
        t = 0.5 * (lo + hi)
        above = math.pi - t + np.sin(t) * np.cos(t) - target > 0
        lo = np.where(above, t, lo)
        hi = np.where(above, hi, t)
    x = math.sqrt(r2) * np.cos(0.5 * (lo + hi))
    # Edges: Airy-type asymptotics are sharper than the counting formula.
    n_edge = min(len(_AIRY_ZEROS), n // 2) if n >= 20 else min(1, n // 2)
    for j in range(n_edge):
        x[n - 1 - j] = math.sqrt(r2) - _AIRY_ZEROS[j] * 2.0 ** (-1.0 / 3.0) * r2 ** (-1.0 / 6.0)
        x[j] = -x[n - 1 - j]
    return x


@lru_cache(maxsize=32)
def build_rule(order: int) -> QuadratureRule:
    """Order-`order` Gauss-Hermite rule (physicists' weight exp(-x^2)).

    Roots of the degree-n Hermite polynomial are refined by Newton iteration
    on the three-term recurrence. Weights smaller than the smallest double
    (orders above roughly 350) underflow to zero.
    """
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ArgumentError(f"order must be an integer, got {order!r}")
    n = int(order)
    if not 1 <= n <= MAX_ORDER:
        raise ArgumentError(f"order must lie in [1, {MAX_ORDER}], got {n}")
    if n == 1:
        return QuadratureRule(1, np.array([0.0]), np.array([math.sqrt(math.pi)]))

    x = _initial_nodes(n)
    for _ in range(100):
        p, p_prev, _ = _hermite_pair(n, x)
        step = p / (math.sqrt(2.0 * n) * p_prev)
        x = x - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, float(np.max(np.abs(x)))):
            break
    else:  # pragma: no cover - guarded by the initial-guess quality
        raise ConvergenceError(f"Newton refinement of Hermite roots stalled at order {n}")

    x = 0.5 * (x - x[::-1])
    if n % 2:
        x[n // 2] = 0.0
    _, p_prev, log_scale = _hermite_pair(n, x)
    with np.errstate(under="ignore"):
        w = np.exp(-math.log(n) - 2.0 * (np.log(np.abs(p_prev)) + log_scale))
    w = 0.5 * (w + w[::-1])
    if np.any(np.diff(x) <= 0):  # pragma: no cover
        raise ConvergenceError(f"Hermite roots not separated at order {n}")
    return QuadratureRule(n, x, w)


def _check_finite(values, points):
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand is not finite at node {i} (x={points[i]!r}): {values[i]!r}"
        )


@lru_cache(maxsize=16)
def _legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _piecewise_points(law, breakpoints, n_panel):
    """Nodes and probability weights on unit panels of the standardized variable.

    Panels are also cut at every breakpoint inside [-12, 12] standard deviations.
    """
    h = _PIECEWISE_HALF_WIDTH
    cuts = sorted(
        {(b - law.mean) / law.std for b in breakpoints if abs((b - law.mean) / law.std) < h}
    )
    edges = [-h, *cuts, h]
    t_ref, w_ref = _legendre(n_panel)
    ts, ws = [], []
    for left, right in zip(edges[:-1], edges[1:]):
        panels = max(1, math.ceil(right - left))
        grid = np.linspace(left, right, panels + 1)
        half = 0.5 * (grid[1:] - grid[:-1])
        mid = 0.5 * (grid[1:] + grid[:-1])
        ts.append((mid[:, None] + half[:, None] * t_ref).ravel())
        ws.append((half[:, None] * w_ref).ravel())
    t = np.concatenate(ts)
    w = np.concatenate(ws) * np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return law.mean + law.std * t, w


def expectation_points(rule: QuadratureRule, law: GaussianLaw, breakpoints=(), panels=False):
    """Evaluation points and probability weights approximating N(mean, std^2).

    By default this is the Gauss-Hermite rule mapped by
    x -> mean + sqrt(2) std x. With `panels`, or whenever breakpoints are
    given, a composite Gauss-Legendre rule on unit panels of the
    standardized variable is used instead (``panel_nodes(rule.order)`` nodes
    per panel). Kinks and complex singularities close to the real axis
    (tanh at large std, for instance) slow Gauss-Hermite convergence down
    badly; the composite rule is insensitive to both.
    """
    if breakpoints or panels:
        return _piecewise_points(law, breakpoints, panel_nodes(rule.order))
    points = law.mean + math.sqrt(2.0) * law.std * rule.nodes
    return points, rule.weights / math.sqrt(math.pi)


def gauss_expect(rule: QuadratureRule, law: GaussianLaw, f, breakpoints=(), panels=False) -> float:
    """Approximate E[f(Z)] for Z ~ N(law.mean, law.std^2).

    `f` must be vectorized over numpy arrays. See `expectation_points` for
    the meaning of `breakpoints` and `panels`.
    """
    points, weights = expectation_points(rule, law, breakpoints, panels)
    values = np.asarray(f(points), dtype=float)
    if values.shape != points.shape:
        values = np.broadcast_to(values, points.shape)
    _check_finite(values, points)
    return float(np.dot(weights, values))


# --- adaptive line integration -------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_K15_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K15_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G7_WEIGHTS = np.zeros(15)
_G7_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G7_WEIGHTS[[13, 11, 9]] = _WG[:3]
_G7_WEIGHTS[7] = _WG[3]

_MAX_BISECTIONS = 60
_LINE_CAP = 200.0
_LINE_START = 4.0


def _kronrod(f, a, b):
    """G7-K15 estimates on each [a_i, b_i]; returns (integral, error) arrays."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _K15_NODES
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    _check_finite(fx.ravel(), x.ravel())
    k15 = half * (fx @ _K15_WEIGHTS)
    g7 = half * (fx @ _G7_WEIGHTS)
    return k15, np.abs(k15 - g7)


def integrate_interval(f, a: float, b: float, abs_tol: float = 1e-12, breakpoints=()) -> float:
    """Adaptive G7-K15 integral of a vectorized `f` over the finite [a, b]."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    cuts = sorted({float(p) for p in breakpoints if a < p < b})
    edges = np.array([a, *cuts, b], dtype=float)
    lo, hi = edges[:-1], edges[1:]
    total_width = b - a
    total = 0.0
    for _ in range(_MAX_BISECTIONS):
        est, err = _kronrod(f, lo, hi)
        # Each interval gets a share of the budget proportional to its width.
        done = err <= abs_tol * (hi - lo) / total_width
        done |= (hi - lo) < 1e-14 * max(1.0, abs(a), abs(b))
        total += float(np.sum(est[done]))
        lo, hi = lo[~done], hi[~done]
        if lo.size == 0:
            return sign * total
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    raise ConvergenceError(
        f"adaptive integration on [{a}, {b}] did not converge", last_panel=float(np.max(err))
    )


def _one_side(f, start, direction, abs_tol, breakpoints):
    """Integral over the half-line beyond `start` in `direction`, by window doubling.

    Returned with the orientation of the half-line, i.e. always the integral
    from the smaller to the larger end.
    """
    pts = sorted(p for p in breakpoints if (p - start) * direction > 0)
    width = _LINE_START
    inner = start + direction * width
    farthest = max((abs(p - start) for p in pts), default=0.0)
    while abs(inner - start) < farthest:
        width *= 2.0
        inner = start + direction * min(width, _LINE_CAP)
    total = integrate_interval(f, start, inner, abs_tol / 10.0, pts) * direction
    lo = abs(inner - start)
    while True:
        hi = min(2.0 * lo, _LINE_CAP)
        shell = integrate_interval(
            f, start + direction * lo, start + direction * hi, abs_tol / 10.0, pts
        ) * direction
        total += shell
        if abs(shell) < abs_tol / 10.0:
            return total
        if hi >= _LINE_CAP:
            raise ConvergenceError(
                f"integral did not converge within |x| <= {_LINE_CAP:g}; last panel contributed {shell:.3e}",
                last_panel=abs(shell),
            )
        lo = hi


def sign_changes(g, lo: float = -50.0, hi: float = 50.0, n: int = 20001, exclude=()) -> tuple:
    """Roots of a vectorized `g` located by sign changes on a uniform grid, refined by brentq.

    Intended as extra breakpoints for integrands like |g|, whose kinks the
    Kronrod error estimate can miss. Grid cells touching `exclude` points are
    skipped, since jumps there are not roots.
    """
    x = np.unique(np.concatenate([np.linspace(lo, hi, n), np.asarray(exclude, dtype=float)]))
    v = np.asarray(g(x), dtype=float)
    roots = []
    scalar = lambda t: float(np.asarray(g(np.array([t])), dtype=float)[0])  # noqa: E731
    ex = set(float(e) for e in exclude)
    for i in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        a, b = float(x[i]), float(x[i + 1])
        if a in ex or b in ex:
            continue
        roots.append(brentq(scalar, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    s = np.sign(v)
    zero = np.flatnonzero((s[1:-1] == 0) & (s[:-2] * s[2:] < 0)) + 1
    roots.extend(float(x[i]) for i in zero if float(x[i]) not in ex)
    return tuple(sorted(set(roots)))


def integrate_line(f, abs_tol: float = 1e-10, lower=-math.inf, upper=math.inf, breakpoints=()) -> float:
    """Integral of `f` over [lower, upper], at least one end may be infinite.

    Infinite ends are handled by expanding the window (doubling from 4)
    until the newest panel contributes less than abs_tol/10; the expansion
    stops with ConvergenceError at |x| = 200.
    """
    if not abs_tol >= 1e-13:
        raise ArgumentError(f"abs_tol must be >= 1e-13, got {abs_tol!r}")
    if lower >= upper:
        raise ArgumentError("lower must be smaller than upper")
    if math.isfinite(lower) and math.isfinite(upper):
        return integrate_interval(f, lower, upper, abs_tol, breakpoints)
    if math.isfinite(lower):
        return _one_side(f, lower, 1.0, abs_tol, breakpoints)
    if math.isfinite(upper):
        return _one_side(f, upper, -1.0, abs_tol, breakpoints)
    return (
        _one_side(f, 0.0, 1.0, abs_tol / 2.0, breakpoints)
        + _one_side(f, 0.0, -1.0, abs_tol / 2.0, breakpoints)
    )
