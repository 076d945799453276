"""Total variation and KL divergence between action distributions.

KL uses the natural log. An unbounded KL (``q_i = 0 < p_i``) is returned as
``math.inf`` rather than raised so callers sweeping over many pairs can skip
those cases.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_distribution
from .exceptions import DimensionMismatch

__all__ = [
    "tv_distance",
    "kl_divergence",
    "PolicyDivergenceReport",
    "max_divergences",
    "per_state_kl",
    "per_state_tv",
]


def _pair(p, q):
    p = check_distribution(p, "p")
    q = check_distribution(q, "q")
    if p.shape != q.shape:
        raise DimensionMismatch(f"distributions have lengths {p.size} and {q.size}")
    return p, q


def tv_distance(p, q):
    """``0.5 * sum |p_i - q_i|``."""
    p, q = _pair(p, q)
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def kl_divergence(p, q):
    """``sum p_i log(p_i / q_i)`` with ``0 log(0/q) = 0``; ``inf`` off support."""
    p, q = _pair(p, q)
    return _kl_rows(p[None, :], q[None, :])[0]


def _kl_rows(p, q):
    p = np.maximum(p, 0.0)
    q = np.maximum(q, 0.0)
    support = p > 0
    infinite = np.any(support & (q <= 0), axis=1)
    safe = support & (q > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(np.where(safe, p, 1.0)) - np.log(np.where(safe, q, 1.0))
    terms = np.where(safe, p * ratio, 0.0)
    out = terms.sum(axis=1)
    # Tiny negatives are rounding; KL is nonnegative.
    out = np.maximum(out, 0.0)
    out[infinite] = math.inf
    return out


def per_state_tv(policy, policy_tilde):
    _same_shape(policy, policy_tilde)
    return np.minimum(1.0, 0.5 * np.abs(policy.table - policy_tilde.table).sum(axis=1))


def per_state_kl(policy, policy_tilde):
    """``KL(policy(.|s) || policy_tilde(.|s))`` for every state."""
    _same_shape(policy, policy_tilde)
    return _kl_rows(policy.table, policy_tilde.table)


def _same_shape(a, b):
    if (a.num_states, a.num_actions) != (b.num_states, b.num_actions):
        raise DimensionMismatch("policies have different state/action dimensions")


@dataclass(frozen=True)
class PolicyDivergenceReport:
    """Per-state distances between two policies and their maxima over states.

    ``kl_per_state`` is ``KL(pi(.|s) || pi_tilde(.|s))``; the ``_reverse``
    fields swap the arguments.
    """

    tv_per_state: np.ndarray
    kl_per_state: np.ndarray
    kl_reverse_per_state: np.ndarray
    tv_max: float
    kl_max: float
    kl_reverse_max: float

    @property
    def kl_finite(self):
        return math.isfinite(self.kl_max)


def max_divergences(policy, policy_tilde):
    tv = per_state_tv(policy, policy_tilde)
    kl = per_state_kl(policy, policy_tilde)
    kl_rev = per_state_kl(policy_tilde, policy)
    return PolicyDivergenceReport(
        tv_per_state=tv,
        kl_per_state=kl,
        kl_reverse_per_state=kl_rev,
        tv_max=float(tv.max()),
        kl_max=float(kl.max()),
        kl_reverse_max=float(kl_rev.max()),
    )
