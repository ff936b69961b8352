"""The nine-dimensional integral signature and its affine transformation law."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .activations import Activation, AffineParams, Finiteness
from .errors import ActsigError, SignatureError
from .quadrature import DEFAULT_ORDER, GaussianLaw, QuadratureRule, _check_finite, build_rule, expectation_points
from .tails import compensated_primitive, tv_slope

NINE = ("m1", "g1", "g2", "m2", "eta", "alpha_plus", "alpha_minus", "tv", "c_phi")
GAUSSIAN = ("m1", "g1", "g2", "m2", "eta")


class GaussianComponents(NamedTuple):
    """Gaussian statistics of phi under Y ~ N(mean, sigma^2).

    ``eta`` is the centered alignment E[(Y - mean) phi(Y)]. The primes are
    derivatives with respect to sigma at fixed mean.
    """

    m1: float
    g1: float
    g2: float
    m2: float
    eta: float
    g4: float
    m2_prime: float
    m1_prime: float


def gaussian_components(
    act: Activation, sigma: float, rule: QuadratureRule | None = None, mean: float = 0.0
) -> GaussianComponents:
    """All Gaussian statistics of `act` from a single set of quadrature points.

    The composite panel rule of `expectation_points` is used for every
    activation, cut at the kinks; `rule.order` sets the node density.

    Both sigma-derivatives come from Gaussian integration by parts:
    d/dsigma E[h(Y)] = E[h'(Y)(Y - mean)] / sigma.
    """
    rule = build_rule(DEFAULT_ORDER) if rule is None else rule
    law = GaussianLaw(mean, sigma)
    y, w = expectation_points(rule, law, act.breakpoints, panels=True)
    v = np.asarray(act.value(y), dtype=float)
    dv = np.asarray(act.deriv(y), dtype=float)
    _check_finite(v, y)
    _check_finite(dv, y)
    z = y - mean
    dv2 = dv * dv
    g4 = float(np.dot(w, dv2 * dv2)) ** 0.25
    return GaussianComponents(
        m1=float(np.dot(w, v)),
        g1=float(np.dot(w, dv)),
        g2=math.sqrt(float(np.dot(w, dv2))),
        m2=float(np.dot(w, v * v)),
        eta=float(np.dot(w, z * v)),
        g4=g4,
        m2_prime=float(np.dot(w, 2.0 * v * dv * z)) / sigma,
        m1_prime=float(np.dot(w, dv * z)) / sigma,
    )


@dataclass(frozen=True)
class Signature:
    """S_sigma(phi) plus the auxiliaries g4, dm2/dsigma and dm1/dsigma."""

    name: str
    sigma: float
    m1: float
    g1: float
    g2: float
    m2: float
    eta: float
    alpha_plus: float
    alpha_minus: float
    tv: float
    c_phi: float
    g4: float
    m2_prime: float
    m1_prime: float = math.nan
    order: int = DEFAULT_ORDER

    def nine(self) -> tuple:
        return tuple(getattr(self, k) for k in NINE)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("m1_prime")
        keys = ("name", "sigma", *NINE, "g4", "m2_prime", "order")
        return {k: d[k] for k in keys}

    def invariant_violations(self) -> list[str]:
        out = []
        if self.m2 < self.m1 ** 2 - 1e-10:
            out.append("m2 >= m1^2")
        if self.g2 < abs(self.g1) - 1e-10:
            out.append("g2 >= |g1|")
        if self.g4 < self.g2 - 1e-10:
            out.append("g4 >= g2")
        if abs(self.eta - self.sigma ** 2 * self.g1) > 1e-8 * max(1.0, abs(self.eta)):
            out.append("eta == sigma^2 g1")
        return out

    def check(self) -> "Signature":
        bad = self.invariant_violations()
        if bad:
            raise SignatureError(f"signature of {self.name!r} violates: {', '.join(bad)}", component=bad[0])
        return self


def _component(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except SignatureError:
        raise
    except ActsigError as exc:
        raise SignatureError(f"{name}: {exc}", component=name) from exc


def _c_phi(act, abs_tol):
    if not act.slopes_finite:
        if act.c_phi_finite is Finiteness.INFINITE:
            return math.inf
    return compensated_primitive(act, abs_tol)[0]


def full_signature(act: Activation, sigma: float, order: int = DEFAULT_ORDER, abs_tol: float = 1e-10) -> Signature:
    """Compute every component of S_sigma(act) and check the type invariants."""
    if not sigma > 0:
        raise SignatureError(f"sigma must be positive, got {sigma!r}", component="sigma")
    act._require_slopes()
    rule = build_rule(order)
    g = _component("gaussian", gaussian_components, act, sigma, rule)
    tv = _component("tv", tv_slope, act, abs_tol)
    c_phi = _component("c_phi", _c_phi, act, abs_tol)
    return Signature(
        name=act.name, sigma=float(sigma),
        m1=g.m1, g1=g.g1, g2=g.g2, m2=g.m2, eta=g.eta,
        alpha_plus=float(act.alpha_plus), alpha_minus=float(act.alpha_minus),
        tv=float(tv), c_phi=float(c_phi), g4=g.g4, m2_prime=g.m2_prime, m1_prime=g.m1_prime,
        order=rule.order,
    ).check()


def signature_under_law(act: Activation, p: AffineParams, sigma: float, order: int = DEFAULT_ORDER,
                        abs_tol: float = 1e-10) -> Signature:
    """Base signature with Gaussian parts taken under Y ~ N(b, (a sigma)^2)."""
    rule = build_rule(order)
    g = gaussian_components(act, abs(p.a) * sigma, rule, mean=p.b)
    return Signature(
        name=act.name, sigma=abs(p.a) * sigma,
        m1=g.m1, g1=g.g1, g2=g.g2, m2=g.m2, eta=g.eta,
        alpha_plus=float(act.alpha_plus), alpha_minus=float(act.alpha_minus),
        tv=float(tv_slope(act, abs_tol)), c_phi=float(_c_phi(act, abs_tol)),
        g4=g.g4, m2_prime=g.m2_prime, m1_prime=g.m1_prime, order=rule.order,
    )


def affine_signature_law(base: Signature, p: AffineParams, sigma: float) -> Signature:
    """Signature of c*phi(a x + b) + d at scale sigma from base statistics under Y.

    C is scaled exactly by |c|/|a| when b = d = 0. A nonzero d makes it
    infinite, as does b != 0 when a tail slope is nonzero. Any other shifted
    case is reported as NaN because only an upper bound is available.
    """
    a, b, c, d = p.a, p.b, p.c, p.d
    ca = c * a
    g1 = ca * base.g1
    ap, am = (ca * base.alpha_plus, ca * base.alpha_minus) if a > 0 else (ca * base.alpha_minus, ca * base.alpha_plus)
    if d != 0 or math.isinf(base.c_phi):
        c_phi = math.inf
    elif b == 0:
        c_phi = abs(c) / abs(a) * base.c_phi
    elif base.alpha_plus != 0 or base.alpha_minus != 0:
        c_phi = math.inf
    else:
        c_phi = math.nan
    return Signature(
        name=f"{c:g}*{base.name}({a:g}x{b:+g}){d:+g}",
        sigma=float(sigma),
        m1=c * base.m1 + d,
        g1=g1,
        g2=abs(ca) * base.g2,
        m2=c * c * base.m2 + 2 * c * d * base.m1 + d * d,
        eta=sigma ** 2 * g1,
        alpha_plus=ap + 0.0,
        alpha_minus=am + 0.0,
        tv=abs(ca) * base.tv,
        c_phi=c_phi,
        g4=abs(ca) * base.g4,
        m2_prime=abs(a) * (c * c * base.m2_prime + 2 * c * d * base.m1_prime),
        m1_prime=abs(a) * c * base.m1_prime,
        order=base.order,
    )
