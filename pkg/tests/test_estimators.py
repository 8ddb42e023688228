import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from resonant.estimators import OptimalConverter, ResonanceTuner, check_distribution

from conftest import S3


def test_check_distribution():
    p = check_distribution([[0.5, 0.5]], [1, 3])
    np.testing.assert_allclose(p.gibbs, [0.25, 0.75])
    with pytest.raises(ValueError):
        check_distribution([0.5, np.inf])


def test_optimal_converter():
    est = OptimalConverter(theory="thermodynamic")
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.score()
    est.fit([0.6, 0.4], [0.9, 0.1], gibbs=[0.5, 0.5])
    assert est.infidelity_ == pytest.approx(0.1261, abs=1e-4)
    assert est.score() == est.fidelity_
    assert not est.feasible_exact_
    est.set_params(n_initial=3, n_target=3).fit([0.9, 0.1], [0.9, 0.1], gibbs=[0.5, 0.5])
    assert est.infidelity_ == 0.0


def test_resonance_tuner():
    est = ResonanceTuner(n=10).fit(S3["p1"], S3["p2"], S3["q"])
    assert est.lambda_ == pytest.approx(0.5526, abs=1e-4)
    assert est.nu_at(est.lambda_) == pytest.approx(1.0, abs=1e-12)
    assert est.nu_[0] < 1 < est.nu_[1]
    assert est.lambdas_.size == 11
    assert 0.4 <= est.best_lambda_ <= 0.7
    assert not hasattr(ResonanceTuner().fit(S3["p1"], S3["p2"], S3["q"]), "lambdas_")
