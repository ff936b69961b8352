"""Activation registry: evaluators plus analytic tail metadata."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.special import erfc, expit

from .errors import ArgumentError, MetadataError, RegistryError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Finiteness(str, Enum):
    """Three-valued verdict for C(phi)."""

    FINITE = "finite"
    INFINITE = "infinite"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Activation:
    """A scalar nonlinearity with its derivatives and tail metadata.

    Evaluators take and return numpy arrays. ``deriv`` is an a.e.
    representative of the slope; at a kink it returns the right limit.
    ``alpha_plus`` / ``alpha_minus`` are the limits of phi(x)/x at +/-inf and
    may be infinite; ``None`` means unset. ``slope_limits`` optionally pins
    (phi'(+inf), phi'(-inf)) when they are known in closed form.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    second_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kinks: tuple = ()
    alpha_plus: Optional[float] = None
    alpha_minus: Optional[float] = None
    tv_analytic: Optional[float] = None
    c_phi_finite: Finiteness = Finiteness.UNKNOWN
    sup_slope: Optional[float] = None
    slope_limits: Optional[tuple] = None

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    @property
    def breakpoints(self) -> tuple:
        return tuple(loc for loc, _ in self.kinks)

    @property
    def slopes_finite(self) -> bool:
        self._require_slopes()
        return math.isfinite(self.alpha_plus) and math.isfinite(self.alpha_minus)

    def _require_slopes(self):
        if self.alpha_plus is None or self.alpha_minus is None:
            raise MetadataError(f"asymptotic slopes of {self.name!r} are not set")

    def derivative_limits(self) -> tuple:
        """(phi'(+inf), phi'(-inf)), from metadata or evaluated at +/-1e6."""
        if self.slope_limits is not None:
            return self.slope_limits
        vals = self.deriv(np.array([1e6, -1e6]))
        return float(vals[0]), float(vals[1])


@dataclass(frozen=True)
class AffineParams:
    """Parameters of x -> c * phi(a x + b) + d."""

    a: float = 1.0
    b: float = 0.0
    c: float = 1.0
    d: float = 0.0

    def __post_init__(self):
        for k in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, k)):
                raise ArgumentError(f"affine parameter {k} must be finite")
        if self.a == 0 or self.c == 0:
            raise ArgumentError("affine parameters a and c must be nonzero")


# --- builtin formulas ------------------------------------------------------

def _relu():
    return Activation(
        name="relu",
        value=lambda x: np.maximum(x, 0.0),
        deriv=lambda x: np.where(x >= 0, 1.0, 0.0),
        second_deriv=lambda x: np.zeros_like(x, dtype=float),
        kinks=((0.0, 1.0),),
        alpha_plus=1.0,
        alpha_minus=0.0,
        tv_analytic=1.0,
        c_phi_finite=Finiteness.FINITE,
        sup_slope=1.0,
        slope_limits=(1.0, 0.0),
    )


def _leaky_relu(alpha):
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"leaky_relu slope must lie in (0, 1), got {alpha!r}")
    return Activation(
        name=f"leaky_relu({alpha:g})",
        value=lambda x: np.where(x >= 0, x, alpha * x),
        deriv=lambda x: np.where(x >= 0, 1.0, alpha),
        second_deriv=lambda x: np.zeros_like(x, dtype=float),
        kinks=((0.0, 1.0 - alpha),),
        alpha_plus=1.0,
        alpha_minus=alpha,
        tv_analytic=1.0 - alpha,
        c_phi_finite=Finiteness.FINITE,
        sup_slope=1.0,
        slope_limits=(1.0, alpha),
    )


def _tanh():
    def d1(x):
        t = np.tanh(x)
        return 1.0 - t * t

    def d2(x):
        t = np.tanh(x)
        return -2.0 * t * (1.0 - t * t)

    return Activation(
        name="tanh", value=np.tanh, deriv=d1, second_deriv=d2,
        alpha_plus=0.0, alpha_minus=0.0, tv_analytic=2.0,
        c_phi_finite=Finiteness.INFINITE, sup_slope=1.0, slope_limits=(0.0, 0.0),
    )


def _sigmoid():
    def d1(x):
        s = expit(x)
        return s * (1.0 - s)

    def d2(x):
        s = expit(x)
        return s * (1.0 - s) * (1.0 - 2.0 * s)

    return Activation(
        name="sigmoid", value=expit, deriv=d1, second_deriv=d2,
        alpha_plus=0.0, alpha_minus=0.0, tv_analytic=None,
        c_phi_finite=Finiteness.INFINITE, sup_slope=0.25, slope_limits=(0.0, 0.0),
    )


def _swish():
    def d1(x):
        s = expit(x)
        return s + x * s * (1.0 - s)

    def d2(x):
        s = expit(x)
        q = s * (1.0 - s)
        return 2.0 * q + x * q * (1.0 - 2.0 * s)

    return Activation(
        name="swish", value=lambda x: x * expit(x), deriv=d1, second_deriv=d2,
        alpha_plus=1.0, alpha_minus=0.0, c_phi_finite=Finiteness.FINITE,
        slope_limits=(1.0, 0.0),
    )


def _gelu():
    def cdf(x):
        return 0.5 * erfc(-x / math.sqrt(2.0))

    def pdf(x):
        return _INV_SQRT_2PI * np.exp(-0.5 * x * x)

    return Activation(
        name="gelu",
        value=lambda x: x * cdf(x),
        deriv=lambda x: cdf(x) + x * pdf(x),
        second_deriv=lambda x: pdf(x) * (2.0 - x * x),
        alpha_plus=1.0, alpha_minus=0.0, c_phi_finite=Finiteness.FINITE,
        slope_limits=(1.0, 0.0),
    )


def _softplus(x):
    # x + log(1 + e^-x) for x > 0, log(1 + e^x) otherwise
    return np.where(x > 0, x + np.log1p(np.exp(-np.abs(x))), np.log1p(np.exp(np.minimum(x, 0.0))))


def _mish():
    def parts(x):
        t = np.tanh(_softplus(x))
        return t, 1.0 - t * t, expit(x)

    def d1(x):
        t, sech2, s = parts(x)
        return t + x * sech2 * s

    def d2(x):
        t, sech2, s = parts(x)
        return 2.0 * sech2 * s + x * sech2 * s * ((1.0 - s) - 2.0 * t * s)

    return Activation(
        name="mish", value=lambda x: x * np.tanh(_softplus(x)), deriv=d1, second_deriv=d2,
        alpha_plus=1.0, alpha_minus=0.0, c_phi_finite=Finiteness.FINITE,
        slope_limits=(1.0, 0.0),
    )


def _telu():
    # tanh(e^x) is exactly 1.0 in double precision for x > 20.
    def parts(x):
        u = np.exp(np.minimum(x, 20.0))
        big = x > 20.0
        t = np.where(big, 1.0, np.tanh(u))
        e = np.exp(-2.0 * u)
        sech2 = np.where(big, 0.0, 4.0 * e / (1.0 + e) ** 2)
        return u, t, sech2

    def value(x):
        _, t, _ = parts(x)
        return x * t

    def d1(x):
        u, t, sech2 = parts(x)
        return t + x * sech2 * u

    def d2(x):
        u, t, sech2 = parts(x)
        return sech2 * u * (2.0 + x * (1.0 - 2.0 * t * u))

    return Activation(
        name="telu", value=value, deriv=d1, second_deriv=d2,
        alpha_plus=1.0, alpha_minus=0.0, c_phi_finite=Finiteness.FINITE,
        slope_limits=(1.0, 0.0),
    )


def _identity():
    return Activation(
        name="identity",
        value=lambda x: np.asarray(x, dtype=float) * 1.0,
        deriv=lambda x: np.ones_like(x, dtype=float),
        second_deriv=lambda x: np.zeros_like(x, dtype=float),
        alpha_plus=1.0, alpha_minus=1.0, tv_analytic=0.0,
        c_phi_finite=Finiteness.FINITE, sup_slope=1.0, slope_limits=(1.0, 1.0),
    )


def _poly(k):
    if k < 2:
        raise ArgumentError(f"poly degree must be an integer >= 2, got {k}")
    return Activation(
        name=f"poly({k})",
        value=lambda x: x ** k,
        deriv=lambda x: k * x ** (k - 1),
        second_deriv=lambda x: k * (k - 1) * x ** (k - 2),
        alpha_plus=math.inf,
        alpha_minus=math.inf if k % 2 else -math.inf,
        tv_analytic=math.inf,
        c_phi_finite=Finiteness.INFINITE,
    )


_SIMPLE = {
    "relu": _relu,
    "tanh": _tanh,
    "sigmoid": _sigmoid,
    "swish": _swish,
    "gelu": _gelu,
    "mish": _mish,
    "telu": _telu,
    "identity": _identity,
}

#: The eight classified builtins, in presentation order.
STANDARD_ACTIVATIONS = ("relu", "leaky_relu", "tanh", "sigmoid", "swish", "gelu", "mish", "telu")
DEFAULT_LEAKY_SLOPE = 0.01

_PARAM_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([^)]*)\s*\)|:\s*(\S+))?\s*$")


def builtin(name: str) -> Activation:
    """Look up a builtin activation.

    Accepted identifiers: relu, leaky_relu, leaky_relu(α) or leaky_relu:α,
    tanh, sigmoid, swish, gelu, mish, telu, identity, poly(k) or poly:k.
    """
    m = _PARAM_RE.match(str(name).lower())
    if not m:
        raise RegistryError(f"unknown activation {name!r}")
    base, arg = m.group(1), m.group(2) if m.group(2) is not None else m.group(3)
    if base in _SIMPLE and arg is None:
        return _SIMPLE[base]()
    if base == "leaky_relu":
        if arg is None:
            return _leaky_relu(DEFAULT_LEAKY_SLOPE)
        try:
            alpha = float(arg)
        except ValueError:
            raise ArgumentError(f"leaky_relu slope must be a number, got {arg!r}") from None
        return _leaky_relu(alpha)
    if base == "poly" and arg is not None:
        try:
            k = int(arg)
        except ValueError:
            raise ArgumentError(f"poly degree must be an integer, got {arg!r}") from None
        return _poly(k)
    raise RegistryError(f"unknown activation {name!r}")


def affine_wrap(base: Activation, p: AffineParams) -> Activation:
    """The activation x -> c * base(a x + b) + d with transformed metadata."""
    a, b, c, d = p.a, p.b, p.c, p.d
    ca = c * a

    def value(x):
        return c * base.value(a * x + b) + d

    def deriv(x):
        return ca * base.deriv(a * x + b)

    second = None
    if base.second_deriv is not None:
        def second(x):
            return ca * a * base.second_deriv(a * x + b)

    ap, am = base.alpha_plus, base.alpha_minus
    if ap is not None and am is not None:
        ap, am = (ca * ap, ca * am) if a > 0 else (ca * am, ca * ap)
        ap, am = ap + 0.0, am + 0.0  # drop signed zeros

    # Under a reflection (a < 0) left and right limits trade places, so
    # every jump picks up sign(a): the new jump is c |a| times the old one.
    kinks = tuple(sorted(((loc - b) / a, c * abs(a) * jump) for loc, jump in base.kinks))

    flag = base.c_phi_finite
    if d != 0:
        flag = Finiteness.INFINITE
    elif b != 0 and flag is not Finiteness.INFINITE and ap is not None and (ap != 0 or am != 0):
        # phi(a t + b) - alpha a t leaves the constant alpha b in each tail.
        flag = Finiteness.INFINITE

    limits = None
    if base.slope_limits is not None:
        lp, lm = base.slope_limits
        limits = (ca * lp, ca * lm) if a > 0 else (ca * lm, ca * lp)

    scale = abs(ca)
    return Activation(
        name=f"{c:g}*{base.name}({a:g}x{b:+g}){d:+g}",
        value=value,
        deriv=deriv,
        second_deriv=second,
        kinks=kinks,
        alpha_plus=ap,
        alpha_minus=am,
        tv_analytic=None if base.tv_analytic is None else scale * base.tv_analytic,
        c_phi_finite=flag,
        sup_slope=None if base.sup_slope is None else scale * base.sup_slope,
        slope_limits=limits,
    )


@dataclass(frozen=True)
class TaxonomyClass:
    family: str
    label: str

    def __str__(self):
        return f"{self.family} ({self.label})"


def classify(act: Activation) -> TaxonomyClass:
    """Taxonomy class from the asymptotic slopes; kinks mark non-smooth members."""
    act._require_slopes()
    ap, am = act.alpha_plus, act.alpha_minus
    if math.isnan(ap) or math.isnan(am):
        raise MetadataError(f"asymptotic slopes of {act.name!r} are NaN")
    if not (math.isfinite(ap) and math.isfinite(am)):
        return TaxonomyClass("A_gt1", "superlinear growth")
    if ap == 0 and am == 0:
        return TaxonomyClass("A0", "bounded, saturating")
    return TaxonomyClass("A1", "linear-growth, asymmetric" if act.kinks else "linear-growth, smooth")


def probe_points(n: int = 64, lo: float = -6.0, hi: float = 6.0, kinks=(), radius: float = 1e-3):
    """Equispaced probes on [lo, hi] with points near kinks removed."""
    x = np.linspace(lo, hi, n)
    for loc in kinks:
        x = x[np.abs(x - loc) > radius]
    return x


def derivative_errors(act: Activation, n: int = 64) -> dict:
    """Maximum finite-difference residuals of deriv, second_deriv and kink jumps."""
    x = probe_points(n, kinks=act.breakpoints)
    h = 1e-5
    fd1 = (act.value(x + h) - act.value(x - h)) / (2 * h)
    out = {"deriv": float(np.max(np.abs(fd1 - act.deriv(x))))}
    if act.second_deriv is not None:
        fd2 = (act.deriv(x + h) - act.deriv(x - h)) / (2 * h)
        out["second_deriv"] = float(np.max(np.abs(fd2 - act.second_deriv(x))))
    jumps = [
        abs(float(act.deriv(np.array([loc + 1e-8]))[0] - act.deriv(np.array([loc - 1e-8]))[0]) - jump)
        for loc, jump in act.kinks
    ]
    out["kinks"] = max(jumps, default=0.0)
    return out


def with_name(act: Activation, name: str) -> Activation:
    return replace(act, name=name)
