import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from tiltedchsh import closed_form
from tiltedchsh.estimators import EfficiencyToTilt, NPABoundTransformer, QuantumValueTransformer


def test_efficiency_to_tilt_round_trip():
    X = np.array([[0.85, 0.85], [1.0, 2 / 3], [0.9, 0.8]])
    t = EfficiencyToTilt().fit(X)
    T = t.transform(X)
    np.testing.assert_allclose(T[0], [6 / 17, 6 / 17])
    np.testing.assert_allclose(T[1], [1.0, 0.0])
    np.testing.assert_allclose(t.inverse_transform(T), X)
    assert list(t.get_feature_names_out()) == ["alpha", "beta"]


def test_pipeline_from_efficiencies():
    X = np.array([[0.85, 0.85], [0.6, 0.6]])
    out = make_pipeline(EfficiencyToTilt(), QuantumValueTransformer()).fit_transform(X)
    assert out[0, 0] == pytest.approx(2.98098, abs=5e-6)
    # outside the violation region: classical value, no strategy
    assert out[1, 0] == pytest.approx(2 + 2 * 2 * 0.4 / 0.6)
    assert np.isnan(out[1, 1:]).all()


def test_quantum_value_efficiency_inputs():
    q = QuantumValueTransformer(inputs="efficiencies")
    out = q.fit_transform([[1.0, 1.0]])
    np.testing.assert_allclose(out[0], [2 * math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-12)
    with pytest.raises(ValueError):
        QuantumValueTransformer(inputs="bad").fit_transform([[0.1, 0.1]])


def test_params_and_clone():
    n = NPABoundTransformer(level="2", tol=1e-8)
    assert n.get_params() == {"level": "2", "tol": 1e-8}
    c = clone(n).set_params(level="1")
    assert c.level == "1" and n.level == "2"


def test_npa_transformer():
    out = NPABoundTransformer(level="1+AB").fit_transform([[0.5, 0.0], [0.3, 0.3]])
    assert out[0, 0] == pytest.approx(math.sqrt(8.5), abs=1e-6)
    assert out[1, 0] >= closed_form.quantum_value(0.3, 0.3) - 1e-7


def test_input_validation():
    with pytest.raises(NotFittedError):
        QuantumValueTransformer().transform([[0.1, 0.1]])
    with pytest.raises(ValueError):
        QuantumValueTransformer().fit([[0.1, 0.1, 0.1]])
    t = QuantumValueTransformer().fit([[0.1, 0.1]])
    with pytest.raises(ValueError):
        t.transform([[0.1]])
    with pytest.raises(ValueError):
        t.transform([[np.nan, 0.1]])
