import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from matmdp import IndexOutOfRange, ValidationError, builtin_m1, generate_random_mdp
from matmdp.estimators import PolicyImprover, TransitionEstimator
from matmdp.model_io import sample_transitions


class TestTransitionEstimator:
    def test_params_and_clone(self):
        est = TransitionEstimator(3, 2, smoothing=0.5)
        assert est.get_params() == {"num_states": 3, "num_actions": 2, "smoothing": 0.5}
        twin = clone(est)
        assert twin is not est and twin.get_params() == est.get_params()
        est.set_params(smoothing=1.0)
        assert est.smoothing == 1.0

    def test_fit_triples(self):
        m1 = builtin_m1()
        est = TransitionEstimator(2, 2).fit(sample_transitions(m1, 20, seed=0))
        np.testing.assert_array_equal(est.transition_matrix_, m1.P)
        assert est.counts_.sum() == 80
        assert not est.unvisited_.any()

    def test_fit_with_targets(self):
        X = np.array([[0, 0], [0, 0], [1, 1]])
        est = TransitionEstimator(2, 2).fit(X, [1, 1, 0])
        np.testing.assert_array_equal(est.predict([[0, 0], [1, 1]]), [1, 0])
        np.testing.assert_array_equal(est.unvisited_, [False, True, True, False])

    def test_predict_proba_rows_sum_to_one(self):
        mdp = generate_random_mdp(0, 4, 2, 0.9)
        est = TransitionEstimator(4, 2, smoothing=1.0).fit(sample_transitions(mdp, 30, seed=1))
        np.testing.assert_allclose(est.predict_proba([[0, 1], [3, 0]]).sum(axis=1), 1.0)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            TransitionEstimator(2, 2).predict([[0, 0]])

    def test_bad_query(self):
        est = TransitionEstimator(2, 2).fit([[0, 0, 1]])
        with pytest.raises(IndexOutOfRange):
            est.predict([[2, 0]])
        with pytest.raises(ValidationError):
            est.predict_proba([[0, 0, 0]])

    def test_to_mdp(self):
        m1 = builtin_m1()
        est = TransitionEstimator(2, 2).fit(sample_transitions(m1, 5, seed=0))
        assert est.to_mdp(m1.r, m1.gamma, m1.rho0) == m1


class TestPolicyImprover:
    def test_params_and_clone(self):
        imp = PolicyImprover(max_iters=10, anneal=False)
        params = clone(imp).get_params()
        assert params["max_iters"] == 10 and params["anneal"] is False

    def test_fit_m1(self):
        imp = PolicyImprover().fit(builtin_m1())
        assert imp.eta_ == pytest.approx(2.0, abs=1e-6)
        np.testing.assert_array_equal(imp.predict([0, 1]), [0, 1])
        assert imp.score(builtin_m1()) >= -1e-6
        assert imp.n_iter_ == len(imp.trace_.iterations) - 1

    def test_predict_proba_shape(self):
        mdp = generate_random_mdp(3, 4, 3, 0.9)
        imp = PolicyImprover(max_iters=5).fit(mdp)
        np.testing.assert_allclose(imp.predict_proba(np.arange(4)).sum(axis=1), 1.0)
        with pytest.raises(IndexOutOfRange):
            imp.predict([4])

    def test_rejects_non_mdp(self):
        with pytest.raises(ValidationError):
            PolicyImprover().fit(np.zeros((2, 2)))

    def test_bad_hyperparameter_raises_at_fit(self):
        with pytest.raises(ValidationError):
            PolicyImprover(step_size=-1.0).fit(builtin_m1())
