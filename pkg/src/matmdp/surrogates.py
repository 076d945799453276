"""Local approximations of the return of a new policy and their error bounds.

Write ``eta(pi~) = eta(pi) + f(pi~)`` with the exact advantage flow

    f(pi~) = rho0^T  Pi~ (I - g P Pi~)^{-1} A_pi
           = rho0^T (I - g Pi~ P)^{-1} Pi~ A_pi.

Freezing some occurrences of ``Pi~`` at the base ``Pi`` gives six
surrogates ``L1 .. L6`` (``g`` is the discount):

    L1 = eta + rho0^T Pi~ (I - g P Pi~)^{-1} A     exact
    L2 = eta + rho0^T Pi  (I - g P Pi~)^{-1} A
    L3 = eta + rho0^T Pi~ (I - g P Pi )^{-1} A
    L4 = eta + rho0^T (I - g Pi P)^{-1} Pi~ A      the TRPO surrogate
    L5 = eta + rho0^T (I - g Pi~ P)^{-1} Pi A      == eta since Pi A = 0
    L6 = eta + rho0^T Pi  (I - g P Pi )^{-1} A     == eta

Each is computed literally from its formula, so the identities above are
checks rather than shortcuts.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import check_compatible
from .distances import max_divergences
from .evaluation import SOLVE_TOL, evaluate, resolvent_solve

__all__ = [
    "SURROGATE_INDICES",
    "f_advantage_flow",
    "surrogate",
    "surrogate_values",
    "matrix_gradient",
    "surrogate_gradient",
    "penalty_coefficient",
    "SurrogateReport",
    "bound_report",
]

SURROGATE_INDICES = (1, 2, 3, 4, 5, 6)
BOUND_SLACK = 1e-9


def _state_resolvent(mdp, Pi):
    return np.eye(mdp.num_states) - mdp.gamma * (Pi @ mdp.P)


def _pair_resolvent(mdp, Pi):
    return np.eye(mdp.num_pairs) - mdp.gamma * (mdp.P @ Pi)


def f_advantage_flow(mdp, policy, policy_tilde, base=None):
    """``rho0^T (I - g Pi~ P)^{-1} Pi~ A_pi``, so that ``eta(pi) + f = eta(pi~)``."""
    check_compatible(mdp, policy, policy_tilde)
    base = base or evaluate(mdp, policy)
    y = resolvent_solve(_state_resolvent(mdp, policy_tilde.Pi), mdp.rho0, transpose=True)
    return float(y @ (policy_tilde.Pi @ base.A))


def surrogate_values(mdp, policy, policy_tilde, base=None, tol=SOLVE_TOL):
    """All six surrogates as a tuple ``(L1, ..., L6)``."""
    check_compatible(mdp, policy, policy_tilde)
    base = base or evaluate(mdp, policy, tol)
    Pi, Pt, A, rho0 = policy.Pi, policy_tilde.Pi, base.A, mdp.rho0
    eta = base.eta

    pair_tilde = resolvent_solve(_pair_resolvent(mdp, Pt), A, tol=tol)
    pair_base = resolvent_solve(_pair_resolvent(mdp, Pi), A, tol=tol)
    state_tilde_T = resolvent_solve(_state_resolvent(mdp, Pt), rho0, transpose=True, tol=tol)

    return (
        eta + float(rho0 @ (Pt @ pair_tilde)),
        eta + float(rho0 @ (Pi @ pair_tilde)),
        eta + float(rho0 @ (Pt @ pair_base)),
        eta + float(base.rho_pi @ (Pt @ A)),
        eta + float(state_tilde_T @ (Pi @ A)),
        eta + float(rho0 @ (Pi @ pair_base)),
    )


def surrogate(k, mdp, policy, policy_tilde, base=None):
    if k not in SURROGATE_INDICES:
        raise ValueError(f"surrogate index must be one of {SURROGATE_INDICES}, got {k!r}")
    return surrogate_values(mdp, policy, policy_tilde, base)[k - 1]


def _state_weights(k, mdp, policy, base):
    # dL_k = w_k^T dPi A at the base policy.
    if k == 3:
        return mdp.rho0.copy()
    if k == 4:
        return base.rho_pi
    if k == 2:
        rhs = mdp.gamma * ((policy.Pi @ mdp.P).T @ mdp.rho0)
        return resolvent_solve(_state_resolvent(mdp, policy.Pi), rhs, transpose=True)
    raise ValueError(f"gradients are defined for surrogates 2, 3, 4; got {k!r}")


def matrix_gradient(k, mdp, policy, base=None):
    """Transposed gradient ``A_pi w_k^T`` of ``L_k`` w.r.t. ``Pi~`` at ``Pi~ = Pi``.

    Shape ``(S*A, S)``:  ``w_2^T = rho0^T g Pi P (I - g Pi P)^{-1}``,
    ``w_3 = rho0`` and ``w_4^T = rho0^T (I - g Pi P)^{-1}``.
    """
    check_compatible(mdp, policy)
    base = base or evaluate(mdp, policy)
    return np.outer(base.A, _state_weights(k, mdp, policy, base))


def surrogate_gradient(k, mdp, param_policy, base=None):
    """Gradient of ``L_k`` w.r.t. ``theta`` at the policy's own logits."""
    policy = param_policy.policy
    G = matrix_gradient(k, mdp, policy, base)
    # trace(G dPi) only sees the block entries Pi[s, s*A + a].
    states = np.repeat(np.arange(mdp.num_states), mdp.num_actions)
    grad_pi = G[np.arange(mdp.num_pairs), states]
    return param_policy.pullback(grad_pi)


def penalty_coefficient(gamma, epsilon):
    """``C = 4 eps gamma / (1 - gamma)^2``."""
    return 4.0 * epsilon * gamma / (1.0 - gamma) ** 2


def _bounds(kl_max, gamma, adv_l1):
    if not math.isfinite(kl_max):
        return {2: math.inf, 3: math.inf, 4: math.inf}
    root = math.sqrt(2.0 * kl_max)
    return {
        2: root / (1.0 - gamma) * adv_l1,
        3: gamma * root / (1.0 - gamma) * adv_l1,
        4: 2.0 * gamma * kl_max * adv_l1 / (1.0 - gamma) ** 2,
    }


@dataclass(frozen=True)
class SurrogateReport:
    """Surrogate values for ``(pi, pi~)`` with error bounds and pass flags.

    ``bounds`` use ``KL(pi || pi~)``; ``bounds_reverse`` use ``KL(pi~ || pi)``.
    Bounds with infinite KL are ``inf`` and the report is marked vacuous.
    """

    values: tuple
    eta_base: float
    eta_target: float
    errors: dict
    bounds: dict
    bounds_reverse: dict
    bound_holds: dict
    bound_holds_reverse: dict
    trpo_bound_rhs: float
    trpo_bound_rhs_reverse: float
    trpo_holds: bool
    trpo_holds_reverse: bool
    epsilon: float
    penalty: float
    kl_max: float
    kl_reverse_max: float
    tv_max: float
    dpi_norm: float
    advantage_l1: float
    vacuous: bool = field(default=False)

    def as_dict(self):
        return {
            "values": list(self.values),
            "eta_base": self.eta_base,
            "eta_target": self.eta_target,
            "errors": {f"L{k}": v for k, v in self.errors.items()},
            "bounds": {f"L{k}": v for k, v in self.bounds.items()},
            "bounds_reverse": {f"L{k}": v for k, v in self.bounds_reverse.items()},
            "bound_holds": {f"L{k}": v for k, v in self.bound_holds.items()},
            "bound_holds_reverse": {f"L{k}": v for k, v in self.bound_holds_reverse.items()},
            "trpo_bound_rhs": self.trpo_bound_rhs,
            "trpo_bound_rhs_reverse": self.trpo_bound_rhs_reverse,
            "trpo_holds": self.trpo_holds,
            "trpo_holds_reverse": self.trpo_holds_reverse,
            "epsilon": self.epsilon,
            "penalty": self.penalty,
            "kl_max": self.kl_max,
            "kl_reverse_max": self.kl_reverse_max,
            "tv_max": self.tv_max,
            "dpi_norm": self.dpi_norm,
            "advantage_l1": self.advantage_l1,
            "vacuous": self.vacuous,
        }


def bound_report(mdp, policy, policy_tilde, slack=BOUND_SLACK):
    check_compatible(mdp, policy, policy_tilde)
    base = evaluate(mdp, policy)
    target = evaluate(mdp, policy_tilde)
    values = surrogate_values(mdp, policy, policy_tilde, base)
    div = max_divergences(policy, policy_tilde)

    adv_l1 = float(np.abs(base.A).sum())
    epsilon = float(np.abs(base.A).max())
    C = penalty_coefficient(mdp.gamma, epsilon)
    # Induced inf-norm of Pi~ - Pi: the largest per-state L1 change.
    dpi_norm = float(np.abs(policy_tilde.Pi - policy.Pi).sum(axis=1).max())

    errors = {k: abs(target.eta - values[k - 1]) for k in (2, 3, 4)}
    bounds = _bounds(div.kl_max, mdp.gamma, adv_l1)
    bounds_rev = _bounds(div.kl_reverse_max, mdp.gamma, adv_l1)

    def rhs(kl):
        return values[3] - C * kl if math.isfinite(kl) else -math.inf

    trpo = rhs(div.kl_max)
    trpo_rev = rhs(div.kl_reverse_max)
    return SurrogateReport(
        values=values,
        eta_base=base.eta,
        eta_target=target.eta,
        errors=errors,
        bounds=bounds,
        bounds_reverse=bounds_rev,
        bound_holds={k: errors[k] <= bounds[k] + slack for k in errors},
        bound_holds_reverse={k: errors[k] <= bounds_rev[k] + slack for k in errors},
        trpo_bound_rhs=trpo,
        trpo_bound_rhs_reverse=trpo_rev,
        trpo_holds=target.eta >= trpo - slack,
        trpo_holds_reverse=target.eta >= trpo_rev - slack,
        epsilon=epsilon,
        penalty=C,
        kl_max=div.kl_max,
        kl_reverse_max=div.kl_reverse_max,
        tv_max=div.tv_max,
        dpi_norm=dpi_norm,
        advantage_l1=adv_l1,
        vacuous=not (math.isfinite(div.kl_max) and math.isfinite(div.kl_reverse_max)),
    )
