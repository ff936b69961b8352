"""Tail and regularity analysis: residuals, compensated primitives, slope variation.

Residuals are measured against the linear asymptotes,

    D(t) = phi(t) - alpha_plus * t   (t >= 0)
    D(t) = phi(t) - alpha_minus * t  (t < 0),

and F_asym(x) is the integral of D from 0 to x.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gamma

from .activations import Activation, Finiteness
from .errors import CapabilityError, ConvergenceError, DomainError
from .quadrature import integrate_line, sign_changes

FIRST_WINDOW = 4.0
WINDOW_CAP = 200.0
POINTS_PER_WINDOW = 2048
DIVERGENCE_SUP = 1e6
DIVERGENCE_STREAK = 3

_CELL_NODES, _CELL_WEIGHTS = np.polynomial.legendre.leggauss(4)


class Verdict(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    CAPPED = "capped"


@dataclass(frozen=True)
class ResidualProfile:
    """D(t) and F_asym(t) sampled on the expanding grid.

    ``t`` is sorted increasingly and contains 0. ``window`` is the final
    half-width reached; ``c_phi`` / ``argmax`` summarize sup |F_asym| on the grid.
    """

    act: Activation = field(repr=False)
    t: np.ndarray = field(repr=False)
    d_values: np.ndarray = field(repr=False)
    f_asym_values: np.ndarray = field(repr=False)
    window: float
    verdict: Verdict
    c_phi: float
    argmax: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,D,F_asym\n")
        for row in zip(self.t, self.d_values, self.f_asym_values):
            buf.write(",".join(f"{v:.9g}" for v in row) + "\n")
        return buf.getvalue()


def _require_finite_slopes(act):
    if not act.slopes_finite:
        raise DomainError(f"C(phi) is undefined for {act.name!r}: asymptotic slopes are infinite")


def _residual(act, sign):
    slope = act.alpha_plus if sign > 0 else act.alpha_minus

    def d(t):
        return act.value(t) - slope * t

    return d


def _cells(grid, d):
    """Integrals of d and |d| over consecutive grid cells (4-point Gauss-Legendre each)."""
    half = 0.5 * np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    x = mid[:, None] + half[:, None] * _CELL_NODES
    v = d(x.ravel()).reshape(x.shape)
    return half * (v @ _CELL_WEIGHTS), np.abs(half) * (np.abs(v) @ _CELL_WEIGHTS)


def _side(act, sign, abs_tol):
    """Walk one half-line outward by window doubling."""
    d = _residual(act, sign)
    kinks = sorted(abs(k) for k in act.breakpoints if k * sign > 0)
    start = FIRST_WINDOW
    while kinks and start < min(kinks[-1], WINDOW_CAP):
        start *= 2.0
    start = min(start, WINDOW_CAP)

    ts, ds, fs = [np.array([0.0])], [d(np.array([0.0]))], [np.array([0.0])]
    running = 0.0
    prev_shell = None
    streak = 0
    lo, hi = 0.0, start
    verdict = Verdict.CAPPED
    while True:
        grid = np.linspace(lo, hi, POINTS_PER_WINDOW + 1)
        extra = [k for k in kinks if lo < k < hi]
        if extra:
            grid = np.unique(np.concatenate([grid, extra]))
        signed_grid = sign * grid
        cell, cell_abs = _cells(signed_grid, d)
        # Orientation: cells run away from 0, so the running integral of
        # D from 0 to x is the cumulative sum with the sign of the direction.
        f_new = running + np.cumsum(cell)
        running = float(f_new[-1])
        ts.append(signed_grid[1:])
        ds.append(d(signed_grid[1:]))
        fs.append(f_new)

        shell = float(np.sum(cell_abs))
        if shell < abs_tol / 10.0:
            verdict = Verdict.CONVERGED
            break
        if prev_shell is not None and shell > 0.5 * prev_shell:
            streak += 1
        else:
            streak = 0
        prev_shell = shell
        if np.max(np.abs(f_new)) > DIVERGENCE_SUP or streak >= DIVERGENCE_STREAK:
            verdict = Verdict.DIVERGED
            break
        if hi >= WINDOW_CAP:
            break
        lo, hi = hi, min(2.0 * hi, WINDOW_CAP)

    t = np.concatenate(ts)
    f = np.concatenate(fs)
    return t, np.concatenate(ds), f, hi, verdict


def residual_profile(act: Activation, abs_tol: float = 1e-10) -> ResidualProfile:
    """Sample D and F_asym on both half-lines until the tails are resolved.

    Each side grows from |t| <= 4 by doubling up to 200. A side converges once
    the newest window contributes less than abs_tol/10 to the integral of |D|.
    It diverges if sup |F_asym| passes 1e6, or if the window contributions
    fail to halve three times in a row (non-vanishing or slowly decaying
    residual). Otherwise the verdict is "capped".
    """
    _require_finite_slopes(act)
    right = _side(act, 1.0, abs_tol)
    left = _side(act, -1.0, abs_tol)
    t = np.concatenate([left[0][:0:-1], right[0]])
    d = np.concatenate([left[1][:0:-1], right[1]])
    f = np.concatenate([left[2][:0:-1], right[2]])
    verdicts = {left[4], right[4]}
    if Verdict.DIVERGED in verdicts:
        verdict = Verdict.DIVERGED
    elif Verdict.CAPPED in verdicts:
        verdict = Verdict.CAPPED
    else:
        verdict = Verdict.CONVERGED
    # Ties (e.g. F_asym identically 0) resolve to the point nearest the origin.
    absf = np.abs(f)
    ties = np.flatnonzero(absf == absf.max())
    i = int(ties[np.argmin(np.abs(t[ties]))])
    c_phi = math.inf if verdict is Verdict.DIVERGED else float(abs(f[i]))
    return ResidualProfile(
        act=act, t=t, d_values=d, f_asym_values=f,
        window=max(left[3], right[3]), verdict=verdict,
        c_phi=c_phi, argmax=float(t[i]),
    )


def compensated_primitive(act: Activation, abs_tol: float = 1e-10) -> tuple[float, float]:
    """(C(phi), location) with C(phi) = sup |F_asym|.

    The location is the grid point where the sup was reached. When |F_asym|
    increases monotonically towards a limit, this is the truncation boundary
    and the value is the limit. Divergent residuals give C = inf.
    """
    prof = residual_profile(act, abs_tol)
    return prof.c_phi, prof.argmax


def weighted_slope_bound(act: Activation, abs_tol: float = 1e-10) -> float:
    """Upper bound on C(phi) from the slope error weighted by |t|."""
    _require_finite_slopes(act)
    if act.c_phi_finite is Finiteness.INFINITE:
        raise DomainError(f"the residuals of {act.name!r} do not vanish at infinity")
    ap, am = act.alpha_plus, act.alpha_minus
    kinks = act.breakpoints
    roots_r = sign_changes(lambda t: act.deriv(t) - ap, 0.0, 50.0, exclude=kinks)
    roots_l = sign_changes(lambda t: act.deriv(t) - am, -50.0, 0.0, exclude=kinks)
    right = integrate_line(
        lambda t: t * np.abs(act.deriv(t) - ap), abs_tol / 2, lower=0.0, breakpoints=kinks + roots_r
    )
    left = integrate_line(
        lambda t: np.abs(t) * np.abs(act.deriv(t) - am), abs_tol / 2, upper=0.0, breakpoints=kinks + roots_l
    )
    return right + left


def tv_slope(act: Activation, abs_tol: float = 1e-10, prefer_analytic: bool = True) -> float:
    """Total variation of phi': integral of |phi''| plus the kink jumps."""
    if prefer_analytic and act.tv_analytic is not None:
        return float(act.tv_analytic)
    if act.second_deriv is None:
        if act.tv_analytic is not None:
            return float(act.tv_analytic)
        raise CapabilityError(f"{act.name!r} has neither second_deriv nor tv_analytic")
    jumps = sum(abs(j) for _, j in act.kinks)
    try:
        cuts = act.breakpoints + sign_changes(act.second_deriv, exclude=act.breakpoints)
        smooth = integrate_line(lambda t: np.abs(act.second_deriv(t)), abs_tol, breakpoints=cuts)
    except ConvergenceError:
        return math.inf
    return smooth + jumps


def abs_normal_moment(k: float) -> float:
    """E|Z|^k for a standard normal Z."""
    return 2.0 ** (k / 2.0) * gamma((k + 1.0) / 2.0) / math.sqrt(math.pi)


def slope_moment_upper_bounds(A: float, B: float, r: float, sigma: float) -> tuple[float, float]:
    """Bounds on (g2, g4) at scale sigma when |phi'(x)| <= A + B |x|^r."""
    m2r = abs_normal_moment(2.0 * r)
    m4r = abs_normal_moment(4.0 * r)
    g2 = math.sqrt(2.0) * math.sqrt(A ** 2 + B ** 2 * sigma ** (2 * r) * m2r)
    g4 = 2.0 ** 0.75 * (A ** 4 + B ** 4 * sigma ** (4 * r) * m4r) ** 0.25
    return g2, g4
