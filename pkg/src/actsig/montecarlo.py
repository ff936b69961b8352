"""Seeded Monte Carlo estimates of the Gaussian signature components."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activations import Activation
from .errors import ArgumentError
from .rng import check_seed, normals

MIN_SAMPLES = 1000


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    samples: int
    seed: int

    def z_score(self, reference: float) -> float:
        diff = self.value - reference
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def sample_mean(values: np.ndarray, seed: int) -> EstimateWithError:
    n = values.size
    if n < 2:
        raise ArgumentError("at least two samples are required")
    std = float(np.std(values, ddof=1))
    return EstimateWithError(float(np.mean(values)), std / math.sqrt(n), n, seed)


def mc_components(act: Activation, sigma: float, samples: int, seed: int, stream: int = 0) -> dict:
    """Monte Carlo estimates of m1, g1, g2, m2 and eta for Z ~ N(0, sigma^2).

    g2 is the square root of the mean of phi'(Z)^2; its standard error
    follows from the delta method.
    """
    seed = check_seed(seed)
    if samples < MIN_SAMPLES:
        raise ArgumentError(f"samples must be >= {MIN_SAMPLES}, got {samples}")
    if not sigma > 0:
        raise ArgumentError(f"sigma must be positive, got {sigma!r}")
    z = sigma * normals(seed, samples, stream)
    v = act.value(z)
    dv = act.deriv(z)
    sq = sample_mean(dv * dv, seed)
    g2 = math.sqrt(sq.value)
    g2_se = sq.std_error / (2.0 * g2) if g2 > 0 else math.sqrt(sq.std_error)
    return {
        "m1": sample_mean(v, seed),
        "g1": sample_mean(dv, seed),
        "g2": EstimateWithError(g2, g2_se, samples, seed),
        "m2": sample_mean(v * v, seed),
        "eta": sample_mean(z * v, seed),
    }
