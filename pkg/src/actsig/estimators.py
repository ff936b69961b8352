"""scikit-learn adapter: map input scales sigma to signature components."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .activations import Activation, builtin
from .errors import ArgumentError
from .quadrature import DEFAULT_ORDER, build_rule
from .signature import gaussian_components

_AVAILABLE = ("m1", "g1", "g2", "m2", "eta", "g4", "m2_prime", "m1_prime")


class SignatureTransformer(TransformerMixin, BaseEstimator):
    """Transform a column of scales sigma into Gaussian signature components.

    Parameters
    ----------
    activation : str or Activation
        Registry identifier (e.g. ``"gelu"``, ``"leaky_relu(0.2)"``) or an
        Activation instance.
    order : int
        Quadrature order.
    components : sequence of str
        Output columns, any of m1, g1, g2, m2, eta, g4, m2_prime, m1_prime.

    Examples
    --------
    >>> SignatureTransformer("relu").fit_transform([[1.0]]).round(6)
    array([[0.398942, 0.5     , 0.707107, 0.5     , 0.5     ]])
    """

    def __init__(self, activation="relu", order=DEFAULT_ORDER, components=("m1", "g1", "g2", "m2", "eta")):
        self.activation = activation
        self.order = order
        self.components = components

    def fit(self, X=None, y=None):
        act = self.activation
        self.activation_ = act if isinstance(act, Activation) else builtin(act)
        unknown = [c for c in self.components if c not in _AVAILABLE]
        if unknown:
            raise ArgumentError(f"unknown components: {unknown}")
        self.rule_ = build_rule(self.order)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "activation_")
        sig = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        if np.any(sig <= 0):
            raise ArgumentError("all sigma values must be positive")
        rows = []
        for s in sig:
            g = gaussian_components(self.activation_, float(s), self.rule_)._asdict()
            rows.append([g[c] for c in self.components])
        return np.asarray(rows, dtype=float).reshape(len(sig), len(self.components))

    def get_feature_names_out(self, input_features=None):
        return np.asarray(list(self.components), dtype=object)
