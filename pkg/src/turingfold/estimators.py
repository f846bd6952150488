"""scikit-learn style wrapper around the plane-wave stability classification."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .absystem import CLASSES, CanonicalAB, closed_form_class, plane_wave, scan_growth


class PlaneWaveClassifier(ClassifierMixin, BaseEstimator):
    """Predict the stability class of plane waves from rows ``(K, R)``.

    Nothing is learned: ``fit`` only validates the AB coefficients and fixes
    the label set, so the estimator can sit inside pipelines and grid searches.
    With ``method="scan"`` the labels come from the eigenvalue scan
    (``stable`` / ``unstable`` / ``nonexistent``) instead of the closed forms.
    """

    def __init__(self, alpha=0.5, d=0.5, beta=8.0, method="closed_form"):
        self.alpha = alpha
        self.d = d
        self.beta = beta
        self.method = method

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (K, R), got {X.shape[1]}")
        if self.method not in ("closed_form", "scan"):
            raise ValueError(f"unknown method {self.method!r}")
        self.ab_ = CanonicalAB(self.alpha, self.d, self.beta)
        if self.method == "closed_form":
            self.classes_ = np.array(CLASSES, dtype=object)
        else:
            self.classes_ = np.array(["nonexistent", "stable", "unstable"], dtype=object)
        self.n_features_in_ = 2
        return self

    def _label(self, K, R):
        ab = self.ab_.with_R(R)
        cls, _ = closed_form_class(ab, K)
        if self.method == "closed_form" or cls == "nonexistent":
            return cls
        growth, _ = scan_growth(ab, plane_wave(ab, K))
        return "stable" if growth <= 1e-9 else "unstable"

    def predict(self, X):
        check_is_fitted(self, "ab_")
        X = check_array(X)
        return np.array([self._label(float(K), float(R)) for K, R in X], dtype=object)

    def max_growth(self, X):
        """Largest growth rate over the scanned wavenumbers (NaN where no wave exists)."""
        check_is_fitted(self, "ab_")
        X = check_array(X)
        out = np.full(len(X), np.nan)
        for i, (K, R) in enumerate(X):
            ab = self.ab_.with_R(float(R))
            wave = plane_wave(ab, float(K))
            if wave is not None:
                out[i] = scan_growth(ab, wave)[0]
        return out
