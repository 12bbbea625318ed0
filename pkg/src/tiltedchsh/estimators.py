"""scikit-learn style wrappers so parameter grids compose with pipelines.

Nothing here learns from data. ``fit`` only validates the input shape and
records ``n_features_in_``; ``transform`` maps each row of parameters to
the computed quantities.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import closed_form, npa, qubit, tilting


class _RowMap(TransformerMixin, BaseEstimator):
    columns = ()

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns, got {X.shape[1]}")
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.array([self._row(*row) for row in X], dtype=np.float64).reshape(len(X), -1)

    def get_feature_names_out(self, input_features=None):
        return np.array(self.columns, dtype=object)


class EfficiencyToTilt(_RowMap):
    """``(etaA, etaB)`` rows to ``(alpha, beta)`` rows."""

    columns = ("alpha", "beta")

    def _row(self, etaA, etaB):
        return tilting.tilts_from_efficiencies(etaA, etaB)

    def inverse_transform(self, X):
        X = check_array(X, dtype=np.float64)
        return np.array([tilting.efficiencies_from_tilts(a, b) for a, b in X])


class QuantumValueTransformer(_RowMap):
    """Rows of ``(alpha, beta)`` (or efficiencies) to ``cQ, cA, cB, schmidt``.

    Points outside the violation region give the classical value and NaN
    for the strategy columns.

    Parameters
    ----------
    inputs : {"tilts", "efficiencies"}
        How to read the two input columns.
    """

    columns = ("cQ", "cA", "cB", "schmidt")

    def __init__(self, inputs="tilts"):
        self.inputs = inputs

    def _row(self, u, v):
        if self.inputs == "efficiencies":
            u, v = tilting.tilts_from_efficiencies(u, v)
        elif self.inputs != "tilts":
            raise ValueError(f"inputs must be 'tilts' or 'efficiencies', got {self.inputs!r}")
        cq = closed_form.quantum_value(u, v)
        if u + v >= 2.0:
            return cq, np.nan, np.nan, np.nan
        s = qubit.optimal_state(u, v)
        return cq, s.cA, s.cB, s.schmidt


class NPABoundTransformer(_RowMap):
    """Rows of ``(alpha, beta)`` to the NPA upper bound at ``level``."""

    columns = ("npaBound",)

    def __init__(self, level="1+AB", tol=npa.DEFAULT_TOL):
        self.level = level
        self.tol = tol

    def _row(self, alpha, beta):
        return (npa.npa_bound(alpha, beta, self.level, self.tol),)
