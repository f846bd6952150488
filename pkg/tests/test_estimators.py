import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from turingfold.estimators import PlaneWaveClassifier

X = np.array([[0.3, 0.0], [0.1, 0.5], [0.5, 0.6], [1.1, 2.0], [0.92, 2.2]])


def test_closed_form_predictions():
    clf = PlaneWaveClassifier().fit(X)
    assert list(clf.predict(X)) == ["nonexistent", "stable", "sideband_unstable", "ode_unstable", "stable"]


def test_scan_predictions_see_the_oscillatory_mode():
    clf = PlaneWaveClassifier(method="scan").fit(X)
    assert list(clf.predict(X)) == ["nonexistent", "stable", "unstable", "unstable", "unstable"]


def test_max_growth():
    g = PlaneWaveClassifier().fit(X).max_growth(X)
    assert np.isnan(g[0])
    assert g[1] <= 1e-9
    assert g[2] > 0


def test_validation():
    with pytest.raises(NotFittedError):
        PlaneWaveClassifier().predict(X)
    with pytest.raises(ValueError):
        PlaneWaveClassifier().fit(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        PlaneWaveClassifier(method="magic").fit(X)


def test_clone_and_params():
    clf = clone(PlaneWaveClassifier(alpha=0.8, d=1 / 3, beta=1.0))
    assert clf.get_params()["alpha"] == 0.8
    assert clf.fit(X).ab_.beta == 1.0
