"""scikit-learn front end for the oracle PCR estimator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DomainError
from .pcrsim import pcr_fit


class OraclePCR(RegressorMixin, BaseEstimator):
    """Least squares on the ``n_components`` top population components.

    Parameters
    ----------
    n_components : int
        Number of retained components ``p``.  When it exceeds the number of
        samples the fit is the minimum-norm interpolant.
    eigenvalues : array-like of shape (n_features,), optional
        Population eigenvalues of a diagonal covariance, used to rank the
        features.  By default the columns are assumed to be sorted already.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    support_ : ndarray of int
        Indices of the retained features, in decreasing eigenvalue order.
    """

    def __init__(self, n_components=1, eigenvalues=None):
        self.n_components = n_components
        self.eigenvalues = eigenvalues

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        n_features = X.shape[1]
        p = int(self.n_components)
        if not 0 <= p <= n_features:
            raise DomainError(f"n_components must lie in [0, {n_features}], got {self.n_components}")
        if self.eigenvalues is None:
            order = np.arange(n_features)
        else:
            lam = np.asarray(self.eigenvalues, dtype=float)
            if lam.shape != (n_features,):
                raise DomainError(f"eigenvalues must have shape ({n_features},), got {lam.shape}")
            order = np.argsort(-lam, kind="stable")
        coef = np.zeros(n_features)
        coef[order] = pcr_fit(X[:, order], y, p)
        self.support_ = order[:p]
        self.coef_ = coef
        self.n_features_in_ = n_features
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_
