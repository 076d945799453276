"""Disentangled tabular MDP representation.

The environment lives in a state-action-to-state dynamics matrix ``P`` of
shape ``(S*A, S)`` and a reward vector ``r`` of length ``S*A``. A policy lives
in a block-diagonal matrix ``Pi`` of shape ``(S, S*A)``. Neither depends on
the other, so every policy-dependent quantity is a matrix product:

    P_pi  = Pi @ P      state -> state
    P'_pi = P @ Pi      state-action -> state-action
    r_pi  = Pi @ r

State-action pair ``(s, a)`` always maps to flat index ``s * A + a``.
"""

import numpy as np

from ._validation import (
    SIMPLEX_TOL,
    check_distribution,
    check_gamma,
    check_matrix,
    check_positive_int,
    check_row_stochastic,
    check_vector,
    frozen,
)
from .exceptions import DimensionMismatch, SimplexViolation

__all__ = [
    "MdpInstance",
    "Policy",
    "Marginalizer",
    "build_policy_matrix",
    "build_marginalizer",
    "state_transition",
    "state_action_transition",
    "check_compatible",
]


def _pair_label(num_actions):
    return lambda i: f"row {i} (s={i // num_actions}, a={i % num_actions})"


class MdpInstance:
    """Immutable finite MDP with uniform action count.

    Parameters
    ----------
    P : array of shape (S*A, S)
        ``P[s*A + a, s'] = p(s' | s, a)``.
    r : array of shape (S*A,)
        Expected immediate reward for each state-action pair.
    gamma : float
        Discount in ``[0, 1)``.
    rho0 : array of shape (S,)
        Initial state distribution.
    num_actions : int, optional
        Inferred from ``P.shape[0] / P.shape[1]`` when omitted.
    """

    def __init__(self, P, r, gamma, rho0, num_actions=None, tol=SIMPLEX_TOL):
        P = check_matrix(P, "P")
        num_states = P.shape[1]
        if num_states < 1:
            raise DimensionMismatch("P must have at least one column")
        if num_actions is None:
            if P.shape[0] % num_states:
                raise DimensionMismatch(
                    f"P has {P.shape[0]} rows, not a multiple of {num_states} states"
                )
            num_actions = P.shape[0] // num_states
        num_actions = check_positive_int(num_actions, "num_actions")
        if P.shape[0] != num_states * num_actions:
            raise DimensionMismatch(
                f"P must have {num_states * num_actions} rows, got {P.shape[0]}"
            )
        check_row_stochastic(P, "P", tol, row_label=_pair_label(num_actions))
        r = check_vector(r, "r", num_states * num_actions)
        rho0 = check_vector(rho0, "rho0", num_states)
        check_distribution(rho0, "rho0", tol)

        self._P = frozen(P)
        self._r = frozen(r)
        self._rho0 = frozen(rho0)
        self._gamma = check_gamma(gamma)
        self._num_states = num_states
        self._num_actions = num_actions

    P = property(lambda self: self._P)
    r = property(lambda self: self._r)
    rho0 = property(lambda self: self._rho0)
    gamma = property(lambda self: self._gamma)
    num_states = property(lambda self: self._num_states)
    num_actions = property(lambda self: self._num_actions)

    @property
    def num_pairs(self):
        return self._num_states * self._num_actions

    def replace(self, **changes):
        """Return a copy with some of ``P``, ``r``, ``gamma``, ``rho0`` swapped out."""
        kwargs = dict(P=self._P, r=self._r, gamma=self._gamma, rho0=self._rho0)
        kwargs.update(changes)
        return MdpInstance(num_actions=self._num_actions, **kwargs)

    def __eq__(self, other):
        if not isinstance(other, MdpInstance):
            return NotImplemented
        return (
            self._num_actions == other._num_actions
            and self._gamma == other._gamma
            and np.array_equal(self._P, other._P)
            and np.array_equal(self._r, other._r)
            and np.array_equal(self._rho0, other._rho0)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"MdpInstance(num_states={self._num_states}, "
            f"num_actions={self._num_actions}, gamma={self._gamma})"
        )


class Policy:
    """Stationary stochastic policy in both flat and block-diagonal form.

    ``pi[s*A + a] = pi(a | s)``; ``Pi[s, s*A + a] = pi(a | s)`` and zero
    outside state ``s``'s block.
    """

    def __init__(self, pi, num_states, num_actions, tol=SIMPLEX_TOL):
        num_states = check_positive_int(num_states, "num_states")
        num_actions = check_positive_int(num_actions, "num_actions")
        pi = check_vector(pi, "pi", num_states * num_actions).copy()
        blocks = pi.reshape(num_states, num_actions)
        if np.any(blocks < -tol):
            s = int(np.where((blocks < -tol).any(axis=1))[0][0])
            raise SimplexViolation(f"pi block for state {s} has negative entries")
        sums = blocks.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > tol)[0]
        if bad.size:
            s = int(bad[0])
            raise SimplexViolation(f"pi block for state {s} sums to {sums[s]!r}, expected 1")
        np.maximum(blocks, 0.0, out=blocks)
        # Only touch blocks that are not already exactly normalized, so
        # Policy(p.pi, ...) reproduces p.pi bit for bit.
        off = blocks.sum(axis=1) != 1.0
        if np.any(off):
            blocks[off] /= blocks[off].sum(axis=1, keepdims=True)

        self._pi = frozen(pi)
        self._num_states = num_states
        self._num_actions = num_actions
        Pi = np.zeros((num_states, num_states * num_actions))
        for s in range(num_states):
            Pi[s, s * num_actions:(s + 1) * num_actions] = blocks[s]
        self._Pi = frozen(Pi)

    pi = property(lambda self: self._pi)
    Pi = property(lambda self: self._Pi)
    num_states = property(lambda self: self._num_states)
    num_actions = property(lambda self: self._num_actions)

    @property
    def table(self):
        """``(S, A)`` view with one row per state."""
        return self._pi.reshape(self._num_states, self._num_actions)

    @classmethod
    def from_matrix(cls, Pi, num_actions, tol=SIMPLEX_TOL):
        Pi = check_matrix(Pi, "Pi")
        num_states = Pi.shape[0]
        if Pi.shape[1] != num_states * num_actions:
            raise DimensionMismatch(
                f"Pi must have shape ({num_states}, {num_states * num_actions}), got {Pi.shape}"
            )
        blocks = Pi.reshape(num_states, num_states, num_actions)
        diag = blocks[np.arange(num_states), np.arange(num_states)]
        mask = np.ones((num_states, num_states), dtype=bool)
        np.fill_diagonal(mask, False)
        if np.any(blocks[mask] != 0.0):
            raise SimplexViolation("Pi has nonzero entries outside its diagonal blocks")
        return cls(diag.ravel(), num_states, num_actions, tol=tol)

    @classmethod
    def uniform(cls, num_states, num_actions):
        return cls(np.full(num_states * num_actions, 1.0 / num_actions), num_states, num_actions)

    @classmethod
    def deterministic(cls, actions, num_actions):
        actions = np.asarray(actions, dtype=int)
        pi = np.zeros((actions.size, num_actions))
        pi[np.arange(actions.size), actions] = 1.0
        return cls(pi.ravel(), actions.size, num_actions)

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return self._num_actions == other._num_actions and np.array_equal(self._pi, other._pi)

    __hash__ = None

    def __repr__(self):
        return f"Policy(num_states={self._num_states}, num_actions={self._num_actions})"


class Marginalizer:
    """Block-diagonal 0/1 matrix ``Xi`` of shape ``(S, S*A)``.

    ``Xi @ x`` sums a state-action vector over actions; ``Xi.T @ v``
    replicates a state vector across each state's actions.
    """

    def __init__(self, num_states, num_actions):
        num_states = check_positive_int(num_states, "num_states")
        num_actions = check_positive_int(num_actions, "num_actions")
        self._Xi = frozen(np.kron(np.eye(num_states), np.ones((1, num_actions))))
        self.num_states = num_states
        self.num_actions = num_actions

    Xi = property(lambda self: self._Xi)


def build_policy_matrix(pi, num_states, num_actions, tol=SIMPLEX_TOL):
    """Validate a flat policy vector and return it as a :class:`Policy`."""
    return Policy(pi, num_states, num_actions, tol=tol)


def build_marginalizer(num_states, num_actions):
    return Marginalizer(num_states, num_actions)


def check_compatible(mdp, *policies):
    for policy in policies:
        if (policy.num_states, policy.num_actions) != (mdp.num_states, mdp.num_actions):
            raise DimensionMismatch(
                f"policy is {policy.num_states}x{policy.num_actions} but MDP is "
                f"{mdp.num_states}x{mdp.num_actions}"
            )


def state_transition(policy, mdp):
    """``Pi @ P``: the state-to-state chain induced by ``policy``."""
    check_compatible(mdp, policy)
    return policy.Pi @ mdp.P


def state_action_transition(mdp, policy):
    """``P @ Pi``: the state-action-to-state-action chain induced by ``policy``."""
    check_compatible(mdp, policy)
    return mdp.P @ policy.Pi
