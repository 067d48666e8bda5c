import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from strategies import CYCLE_TARGET, square, unit_sphere, wheel
from topokit import AlphaPersistence, LPVIInterpolator, TopologyAwareFitter


def test_alpha_persistence_transform():
    est = AlphaPersistence(min_persistence=0).fit(square())
    rows = est.transform(square())
    assert rows.shape == (5, 3)
    assert rows[-1].tolist() == [1, 0.25, 0.5]
    assert est.betti(0.3) == (1, 1, 0)
    assert est.n_features_in_ == 2


def test_alpha_persistence_not_fitted():
    with pytest.raises(NotFittedError):
        AlphaPersistence().transform(square())


def test_get_params_and_clone():
    est = LPVIInterpolator(K=10, K_prime=5, tau=0.3)
    assert est.get_params() == {"K": 10, "K_prime": 5, "tau": 0.3, "locality_factor": 2.0}
    assert clone(est).get_params() == est.get_params()
    est.set_params(tau=0.4)
    assert est.tau == 0.4


def test_lpvi_fit_transform():
    X = unit_sphere(40, seed=1)
    est = LPVIInterpolator(K=10, K_prime=5)
    out = est.fit_transform(X)
    np.testing.assert_array_equal(out[:40], X)
    assert est.report_.points_added == len(out) - 40
    np.testing.assert_array_equal(est.transform(X), out)


def test_fitter_reaches_target_from_target():
    est = TopologyAwareFitter(simplices=wheel(), persloss_period=1)
    W = est.fit(None, CYCLE_TARGET).predict()
    np.testing.assert_array_equal(W, CYCLE_TARGET)
    assert est.n_iter_ == 1


def test_fitter_reduces_loss():
    start = np.random.default_rng(0).random(8)
    est = TopologyAwareFitter(simplices=wheel(), lambda_topo=0.05, supv_weight=10.0,
                              persloss_period=1).fit(start, CYCLE_TARGET)
    rows = est.trace_.rows
    assert rows[-1].G_t1_Wt1 < rows[0].G_t_Wt
    assert est.stop_reason_ == "converged"
    assert clone(est).get_params()["lambda_topo"] == 0.05


def test_fitter_shape_mismatch():
    with pytest.raises(ValueError):
        TopologyAwareFitter(simplices=wheel()).fit(np.zeros(3), CYCLE_TARGET)
