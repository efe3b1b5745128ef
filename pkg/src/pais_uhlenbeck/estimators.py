"""scikit-learn style wrappers around the linear maps on jet space.

Each transformer takes rows (q, q', q'', q''').  ``fit`` only validates the
physical parameters and caches the linear map, so the objects drop into a
Pipeline and clone cleanly.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .darboux import darboux_map
from .dynamics import integral_names
from .invariants import hamiltonian_value, integrals_of_motion
from .poisson import sector_of
from .regime import Parameters, classify_regime, fit_linear_coefficients, mode_matrix

JET_FEATURES = ("q", "dq", "d2q", "d3q")


def check_jets(X) -> np.ndarray:
    """Validate an (n_samples, 4) array of finite jet states."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 4:
        raise ValueError(f"expected 4 jet components per row, got {X.shape[1]}")
    return X


class _JetTransformer(TransformerMixin, BaseEstimator):
    def _validated_params(self) -> Parameters:
        return Parameters(self.m, self.omega_sq, self.lam)

    def _check_input(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        return check_jets(X)

    def fit(self, X=None, y=None):
        self.params_ = self._validated_params()
        self.regime_ = classify_regime(self.params_)
        if X is not None:
            check_jets(X)
        self.n_features_in_ = 4
        return self


class DarbouxTransformer(_JetTransformer):
    """Jets to Darboux coordinates (q1, p1, q2, p2) for the beta-structure."""

    def __init__(self, m=1.0, omega_sq=0.8, lam=0.2, beta=math.pi / 4):
        self.m = m
        self.omega_sq = omega_sq
        self.lam = lam
        self.beta = beta

    def fit(self, X=None, y=None):
        super().fit(X, y)
        self.sector_ = sector_of(self.beta, self.regime_)
        self.map_ = darboux_map(self.params_, self.beta)
        return self

    def transform(self, X):
        return self._check_input(X) @ self.map_.forward.T

    def inverse_transform(self, Z):
        return self._check_input(Z) @ self.map_.inverse.T

    def get_feature_names_out(self, input_features=None):
        return np.array(["q1", "p1", "q2", "p2"], dtype=object)


class IntegralsTransformer(_JetTransformer):
    """Jets to the regime's two quadratic integrals, plus H(beta) when ``beta`` is set."""

    def __init__(self, m=1.0, omega_sq=0.8, lam=0.2, beta=None):
        self.m = m
        self.omega_sq = omega_sq
        self.lam = lam
        self.beta = beta

    def fit(self, X=None, y=None):
        super().fit(X, y)
        if self.beta is not None:
            sector_of(self.beta, self.regime_)
        return self

    def transform(self, X):
        X = self._check_input(X)
        cols = [integrals_of_motion(self.params_, X)]
        if self.beta is not None:
            cols.append(np.atleast_1d(hamiltonian_value(self.params_, self.beta, X))[:, None])
        return np.hstack(cols)

    def get_feature_names_out(self, input_features=None):
        names = list(integral_names(self.params_))
        if self.beta is not None:
            names.append("H")
        return np.array(names, dtype=object)


class ModeFitTransformer(_JetTransformer):
    """Jets to real mode-basis coefficients at t=0; the inverse evaluates at ``t``."""

    def __init__(self, m=1.0, omega_sq=0.8, lam=0.2, t=0.0):
        self.m = m
        self.omega_sq = omega_sq
        self.lam = lam
        self.t = t

    def transform(self, X):
        return fit_linear_coefficients(self.params_, self._check_input(X))

    def inverse_transform(self, C):
        check_is_fitted(self, "params_")
        C = check_array(C, dtype=np.float64)
        return C @ mode_matrix(self.params_, self.t).T
