"""Mixed-Hessian bounds for K(x, y) = E[phi(w.x) phi(w.y)] and their Monte Carlo checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .activations import Activation
from .errors import ArgumentError, DomainError
from .montecarlo import EstimateWithError
from .quadrature import DEFAULT_ORDER, build_rule
from .rng import check_seed, normals
from .signature import gaussian_components
from .tails import tv_slope

SQRT3 = math.sqrt(3.0)
NORM_RANGE = (0.25, 4.0)


def g4_at(act: Activation, norm: float, order: int = DEFAULT_ORDER) -> float:
    # w.x ~ N(0, |x|^2) for standard Gaussian w.
    return gaussian_components(act, norm, build_rule(order)).g4


def g4_bound(act: Activation, norm_x: float, norm_y: float, order: int = DEFAULT_ORDER) -> float:
    """sqrt(3) g4(|x|) g4(|y|)."""
    if not (norm_x > 0 and norm_y > 0):
        raise ArgumentError("norms must be positive")
    return SQRT3 * g4_at(act, norm_x, order) * g4_at(act, norm_y, order)


def bv_bound(act: Activation, route: str = "auto") -> float:
    """sqrt(3) M^2 with M = sup|phi'| ("sup") or TV(phi') + |phi'(+inf) - phi'(-inf)| ("tv").

    "auto" prefers the sup route when the metadata carries sup|phi'|.
    """
    if route not in ("auto", "sup", "tv"):
        raise ArgumentError(f"unknown route {route!r}")
    if route in ("auto", "sup") and act.sup_slope is not None:
        m = act.sup_slope
    elif route == "sup":
        raise DomainError(f"{act.name!r} has no sup_slope metadata")
    else:
        tv = tv_slope(act)
        lp, lm = act.derivative_limits()
        m = tv + abs(lp - lm)
    if not math.isfinite(m):
        raise DomainError(f"slope of {act.name!r} is unbounded")
    return SQRT3 * m * m


def _check_vectors(x, y, a, b):
    vs = [np.asarray(v, dtype=float).ravel() for v in (x, y, a, b)]
    d = vs[0].size
    if any(v.size != d for v in vs):
        raise ArgumentError("x, y, a and b must have the same dimension")
    for name, v in zip("ab", vs[2:]):
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ArgumentError(f"{name} must be a unit vector")
    return vs


def mc_mixed_hessian(
    act: Activation, x, y, a, b, samples: int, seed: int, method: str = "projection", stream: int = 0
) -> EstimateWithError:
    """Monte Carlo |E[phi'(w.x) phi'(w.y) (w.a)(w.b)]| with w ~ N(0, I_d).

    The "projection" method samples the four projections jointly from their
    4x4 Gram matrix, which has exactly the law of the direct d-dimensional
    draw. "direct" samples w itself.
    """
    x, y, a, b = _check_vectors(x, y, a, b)
    seed = check_seed(seed)
    if samples < 2:
        raise ArgumentError("samples must be >= 2")
    V = np.stack([x, y, a, b])
    if method == "projection":
        lam, U = np.linalg.eigh(V @ V.T)
        factor = U * np.sqrt(np.clip(lam, 0.0, None))
        P = normals(seed, 4 * samples, stream).reshape(samples, 4) @ factor.T
    elif method == "direct":
        P = normals(seed, x.size * samples, stream).reshape(samples, x.size) @ V.T
    else:
        raise ArgumentError(f"unknown method {method!r}")
    vals = act.deriv(P[:, 0]) * act.deriv(P[:, 1]) * P[:, 2] * P[:, 3]
    se = float(np.std(vals, ddof=1)) / math.sqrt(samples)
    return EstimateWithError(abs(float(np.mean(vals))), se, samples, seed)


@dataclass(frozen=True)
class KernelBoundReport:
    dim: int
    norm_x: float
    norm_y: float
    g4_x: float
    g4_y: float
    bound: float
    bv_bound: float | None
    mc_estimate: EstimateWithError

    @property
    def effective_bound(self) -> float:
        return self.bound if self.bv_bound is None else min(self.bound, self.bv_bound)

    @property
    def satisfied(self) -> bool:
        return self.mc_estimate.value <= self.effective_bound + 3.0 * self.mc_estimate.std_error

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "norm_x": self.norm_x,
            "norm_y": self.norm_y,
            "g4_bound": self.bound,
            "bv_bound": self.bv_bound,
            "mc_value": self.mc_estimate.value,
            "mc_se": self.mc_estimate.std_error,
            "satisfied": self.satisfied,
        }


def _unit(v):
    return v / np.linalg.norm(v)


def _draw(dim, seed):
    # The two norms come first in the stream so that they do not depend on `dim`.
    g = normals(seed, 2 + 4 * dim, stream=1)
    lo, hi = map(math.log, NORM_RANGE)
    nx, ny = (math.exp(lo + (hi - lo) * float(ndtr(u))) for u in g[:2])
    dirs = g[2:].reshape(4, dim)
    return nx, ny, (nx * _unit(dirs[0]), ny * _unit(dirs[1]), _unit(dirs[2]), _unit(dirs[3]))


def stress_geometry(dim: int, seed: int):
    """Random (x, y, a, b): log-uniform norms in [0.25, 4], directions uniform on the sphere."""
    return _draw(dim, seed)[2]


def bound_stress(
    act: Activation, dim: int, trials: int, samples: int, seed: int,
    order: int = DEFAULT_ORDER, method: str = "projection",
) -> tuple[list[KernelBoundReport], int]:
    """One report per random trial plus the number of unsatisfied trials.

    Trial t uses seed + t (mod 2^64) for both its geometry and its Monte Carlo draws.
    """
    if trials < 1 or dim < 1:
        raise ArgumentError("trials and dim must be >= 1")
    seed = check_seed(seed)
    try:
        bv = bv_bound(act)
    except DomainError:
        bv = None
    reports = []
    for t in range(trials):
        s = (seed + t) % (1 << 64)
        nx, ny, (x, y, a, b) = _draw(dim, s)
        gx, gy = g4_at(act, nx, order), g4_at(act, ny, order)
        est = mc_mixed_hessian(act, x, y, a, b, samples, s, method=method)
        reports.append(KernelBoundReport(dim, nx, ny, gx, gy, SQRT3 * gx * gy, bv, est))
    return reports, sum(not r.satisfied for r in reports)
