"""scikit-learn compatible front ends.

``TransitionEstimator`` learns ``P_hat`` from ``(s, a, s_next)`` rows and
``PolicyImprover`` fits a policy to a known :class:`~matmdp.core.MdpInstance`.
Both support ``get_params``/``set_params``/``clone`` through ``BaseEstimator``.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .core import MdpInstance
from .evaluation import objective
from .exceptions import IndexOutOfRange, ValidationError
from .model_io import estimate_transitions
from .optimizer import ImprovementConfig, improve, value_iteration_oracle


class TransitionEstimator(BaseEstimator):
    """Count-based dynamics estimate with optional Laplace smoothing.

    Parameters
    ----------
    num_states, num_actions : int
    smoothing : float, default 0.0
        Pseudo-count added to every successor.

    Attributes
    ----------
    transition_matrix_ : ndarray of shape (S*A, S)
    counts_ : ndarray of shape (S*A, S)
    unvisited_ : ndarray of bool, shape (S*A,)
    """

    def __init__(self, num_states, num_actions, smoothing=0.0):
        self.num_states = num_states
        self.num_actions = num_actions
        self.smoothing = smoothing

    def fit(self, X, y=None):
        """``X`` holds one ``(s, a, s_next)`` row per observed transition.

        If ``y`` is given, ``X`` is taken as ``(s, a)`` rows and ``y`` as the
        successor states.
        """
        X = np.asarray(X)
        if y is not None:
            X = check_array(X, dtype=np.int64, ensure_min_samples=0)
            y = np.asarray(y, dtype=np.int64).reshape(-1, 1)
            X = np.hstack([X, y])
        elif X.size:
            X = check_array(X, dtype=np.int64)
        est = estimate_transitions(X, self.num_states, self.num_actions, self.smoothing)
        self.transition_matrix_ = est.P_hat
        self.counts_ = est.counts
        self.unvisited_ = est.unvisited
        return self

    def predict_proba(self, X):
        """Successor distributions for ``(s, a)`` rows of ``X``."""
        check_is_fitted(self, "transition_matrix_")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != 2:
            raise ValidationError("expected (s, a) rows")
        s, a = X[:, 0], X[:, 1]
        if np.any((s < 0) | (s >= self.num_states) | (a < 0) | (a >= self.num_actions)):
            raise IndexOutOfRange("state or action index out of range")
        return self.transition_matrix_[s * self.num_actions + a]

    def predict(self, X):
        """Most likely successor for each ``(s, a)`` row."""
        return np.argmax(self.predict_proba(X), axis=1)

    def to_mdp(self, rewards, gamma, rho0):
        check_is_fitted(self, "transition_matrix_")
        return MdpInstance(self.transition_matrix_, rewards, gamma, rho0, num_actions=self.num_actions)


class PolicyImprover(BaseEstimator):
    """Monotonic softmax-policy improvement on a known MDP.

    ``fit(mdp)`` runs :func:`matmdp.optimizer.improve`; the hyperparameters
    map one-to-one onto :class:`~matmdp.optimizer.ImprovementConfig`.
    """

    def __init__(self, max_iters=500, step_size=1.0, backtracking=0.5, tol=1e-10,
                 anneal=True, anneal_factor=0.5, penalty_floor=1e-8):
        self.max_iters = max_iters
        self.step_size = step_size
        self.backtracking = backtracking
        self.tol = tol
        self.anneal = anneal
        self.anneal_factor = anneal_factor
        self.penalty_floor = penalty_floor

    def _config(self):
        return ImprovementConfig(
            max_iters=self.max_iters, step_size=self.step_size, backtracking=self.backtracking,
            tol=self.tol, anneal=self.anneal, anneal_factor=self.anneal_factor,
            penalty_floor=self.penalty_floor,
        )

    def fit(self, X, y=None, theta0=None):
        if not isinstance(X, MdpInstance):
            raise ValidationError("PolicyImprover.fit expects an MdpInstance")
        trace = improve(X, theta0, self._config())
        self.trace_ = trace
        self.policy_ = trace.final_policy
        self.theta_ = trace.final_theta
        self.eta_ = float(trace.etas[-1])
        self.n_iter_ = len(trace.iterations) - 1
        self.num_states_ = X.num_states
        self.num_actions_ = X.num_actions
        return self

    def predict_proba(self, X):
        """Action distributions for an array of state indices."""
        check_is_fitted(self, "policy_")
        states = np.asarray(X, dtype=np.int64).ravel()
        if np.any((states < 0) | (states >= self.num_states_)):
            raise IndexOutOfRange("state index out of range")
        return self.policy_.table[states]

    def predict(self, X):
        """Most probable action per state (lowest index on ties)."""
        return np.argmax(self.predict_proba(X), axis=1)

    def score(self, X, y=None):
        """Negative gap to the value-iteration optimum, ``eta - rho0^T V*``."""
        check_is_fitted(self, "policy_")
        V_star, _ = value_iteration_oracle(X)
        return objective(X, self.policy_) - float(X.rho0 @ V_star)
