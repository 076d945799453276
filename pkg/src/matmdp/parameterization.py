"""Per-state softmax policy parameterization and its Jacobian."""

import numpy as np

from ._validation import check_positive_int, check_vector
from .core import Policy
from .exceptions import DimensionMismatch

__all__ = ["softmax_policy", "softmax_jacobian", "ParameterizedPolicy"]


def _logit_table(theta, num_states, num_actions):
    num_states = check_positive_int(num_states, "num_states")
    num_actions = check_positive_int(num_actions, "num_actions")
    theta = check_vector(theta, "theta", num_states * num_actions)
    return theta.reshape(num_states, num_actions)


def _softmax_rows(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_policy(theta, num_states, num_actions):
    """Policy with ``pi(a|s) = exp(theta[s,a]) / sum_b exp(theta[s,b])``."""
    probs = _softmax_rows(_logit_table(theta, num_states, num_actions))
    return Policy(probs.ravel(), num_states, num_actions)


def softmax_jacobian(theta, num_states, num_actions):
    """Blocks ``J[s, a, b] = d pi(a|s) / d theta(s, b)``.

    The full Jacobian is block diagonal across states, so only the
    ``(S, A, A)`` diagonal blocks are returned. Each block is
    ``diag(p) - p p^T`` and has zero row and column sums.
    """
    p = _softmax_rows(_logit_table(theta, num_states, num_actions))
    return np.einsum("sa,ab->sab", p, np.eye(p.shape[1])) - p[:, :, None] * p[:, None, :]


class ParameterizedPolicy:
    """Unconstrained logits ``theta`` together with the softmax policy they induce."""

    def __init__(self, theta, num_states, num_actions):
        self.num_states = check_positive_int(num_states, "num_states")
        self.num_actions = check_positive_int(num_actions, "num_actions")
        theta = check_vector(theta, "theta", self.num_states * self.num_actions)
        self.theta = theta.copy()
        self.theta.setflags(write=False)
        self.policy = softmax_policy(self.theta, self.num_states, self.num_actions)

    @classmethod
    def zeros(cls, num_states, num_actions):
        return cls(np.zeros(num_states * num_actions), num_states, num_actions)

    def jacobian(self):
        return softmax_jacobian(self.theta, self.num_states, self.num_actions)

    def pullback(self, grad_pi):
        """Chain a gradient w.r.t. the flat ``pi`` vector back to ``theta``."""
        grad_pi = np.asarray(grad_pi, dtype=float)
        if grad_pi.shape != self.theta.shape:
            raise DimensionMismatch(f"expected gradient of shape {self.theta.shape}")
        g = grad_pi.reshape(self.num_states, self.num_actions)
        return np.einsum("sab,sa->sb", self.jacobian(), g).ravel()

    def shifted(self, direction, step):
        return ParameterizedPolicy(self.theta + step * np.asarray(direction, dtype=float),
                                   self.num_states, self.num_actions)
