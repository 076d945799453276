"""Monotonic policy improvement through the KL-penalized majorizer.

With base policy ``pi_i`` the majorizer is

    M_i(pi) = L4_{pi_i}(pi) - C * max_s KL(pi_i(.|s) || pi(.|s)),
    C = 4 eps gamma / (1 - gamma)^2,  eps = max |A_{pi_i}|.

``M_i(pi_i) = eta(pi_i)`` and ``M_i(pi) <= eta(pi)``, so any step that does
not decrease ``M_i`` does not decrease ``eta``. :func:`improve` takes
gradient-ascent steps on the softmax logits with a backtracking line search
that enforces exactly that.

The theoretical ``C`` is very conservative. With annealing enabled the
penalty is scaled by a multiplier ``c <= 1`` and a step is accepted only if
the inequality ``eta(pi) >= L4(pi) - c C KL`` is verified exactly at the
candidate, which keeps the monotonicity argument intact for the smaller
penalty. When the check fails, ``c`` is doubled back towards one.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_vector
from .core import Policy
from .distances import per_state_kl
from .evaluation import evaluate, objective
from .exceptions import ValidationError
from .parameterization import ParameterizedPolicy, softmax_jacobian, softmax_policy
from .surrogates import penalty_coefficient, surrogate_gradient

__all__ = [
    "ImprovementConfig",
    "IterationRecord",
    "ImprovementTrace",
    "majorization_value",
    "improve",
    "value_iteration_oracle",
    "finite_difference_gradient",
    "softmax_policy",
    "softmax_jacobian",
    "ParameterizedPolicy",
]


@dataclass(frozen=True)
class ImprovementConfig:
    max_iters: int = 500
    step_size: float = 1.0
    backtracking: float = 0.5
    tol: float = 1e-10
    max_backtracks: int = 60
    step_growth: float = 2.0
    anneal: bool = True
    anneal_factor: float = 0.5
    penalty_floor: float = 1e-8

    def __post_init__(self):
        if isinstance(self.max_iters, bool) or not isinstance(self.max_iters, int) or self.max_iters < 0:
            raise ValidationError(f"max_iters must be a non-negative integer, got {self.max_iters!r}")
        if not (self.step_size > 0 and math.isfinite(self.step_size)):
            raise ValidationError(f"step_size must be positive, got {self.step_size!r}")
        if not (0 < self.backtracking < 1):
            raise ValidationError(f"backtracking must lie in (0, 1), got {self.backtracking!r}")
        if not self.tol >= 0:
            raise ValidationError(f"tol must be non-negative, got {self.tol!r}")
        if self.max_backtracks < 1:
            raise ValidationError("max_backtracks must be at least 1")
        if self.step_growth < 1:
            raise ValidationError("step_growth must be at least 1")
        if not (0 < self.anneal_factor < 1):
            raise ValidationError("anneal_factor must lie in (0, 1)")
        if not (0 < self.penalty_floor <= 1):
            raise ValidationError("penalty_floor must lie in (0, 1]")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    eta: float
    kl_max: float
    majorizer: float
    step_size: float
    penalty_scale: float = 1.0


@dataclass
class ImprovementTrace:
    iterations: list
    final_policy: Policy
    final_theta: np.ndarray
    converged: bool
    reason: str
    extras: dict = field(default_factory=dict)

    @property
    def etas(self):
        return np.array([rec.eta for rec in self.iterations])

    def is_monotone(self, slack=1e-12):
        etas = self.etas
        return bool(np.all(np.diff(etas) >= -slack))

    def as_dict(self):
        return {
            "iterations": [asdict(rec) for rec in self.iterations],
            "final_policy": self.final_policy.pi.tolist(),
            "final_theta": self.final_theta.tolist(),
            "converged": self.converged,
            "reason": self.reason,
        }


def _majorizer(mdp, base_eval, base_policy, candidate, scale=1.0):
    kl_max = float(per_state_kl(base_policy, candidate).max())
    l4 = base_eval.eta + float(base_eval.rho_pi @ (candidate.Pi @ base_eval.A))
    if not math.isfinite(kl_max):
        return -math.inf, l4, kl_max
    C = penalty_coefficient(mdp.gamma, float(np.abs(base_eval.A).max()))
    return l4 - scale * C * kl_max, l4, kl_max


def majorization_value(mdp, base_policy, candidate_policy, penalty_scale=1.0):
    """``M(candidate) = L4_base(candidate) - C * KL^max(base || candidate)``.

    Returns ``-inf`` when the KL term is infinite.
    """
    base_eval = evaluate(mdp, base_policy)
    return _majorizer(mdp, base_eval, base_policy, candidate_policy, penalty_scale)[0]


def improve(mdp, theta0=None, config=None):
    """Run monotonic improvement from logits ``theta0`` (zeros by default)."""
    config = config or ImprovementConfig()
    S, A = mdp.num_states, mdp.num_actions
    theta0 = np.zeros(S * A) if theta0 is None else theta0
    theta0 = check_vector(theta0, "theta0", S * A)

    current = ParameterizedPolicy(theta0, S, A)
    base = evaluate(mdp, current.policy)
    records = [IterationRecord(0, base.eta, 0.0, base.eta, 0.0, 1.0)]
    scale = 1.0
    step = config.step_size
    converged, reason = False, "max_iters reached"

    for it in range(1, config.max_iters + 1):
        grad = surrogate_gradient(4, mdp, current, base)
        if np.linalg.norm(grad) <= config.tol:
            converged, reason = True, "gradient norm below tol"
            break

        accepted = None
        t = step
        for _ in range(config.max_backtracks):
            cand = current.shifted(grad, t)
            m_val, l4, kl_max = _majorizer(mdp, base, current.policy, cand.policy, scale)
            if m_val >= base.eta:
                cand_eval = evaluate(mdp, cand.policy)
                if scale == 1.0:
                    accepted = (cand, cand_eval, m_val, kl_max)
                    break
                C = penalty_coefficient(mdp.gamma, float(np.abs(base.A).max()))
                # Exact check of eta >= L4 - scale*C*KL at the candidate.
                if cand_eval.eta >= l4 - scale * C * kl_max:
                    accepted = (cand, cand_eval, m_val, kl_max)
                    break
                scale = min(1.0, scale * 2.0)
                continue
            t *= config.backtracking

        if accepted is None:
            converged, reason = True, "line search found no ascent step"
            break

        current, base, m_val, kl_max = accepted
        records.append(IterationRecord(it, base.eta, kl_max, m_val, t, scale))
        step = t * config.step_growth
        if config.anneal:
            scale = max(config.penalty_floor, scale * config.anneal_factor)

    return ImprovementTrace(
        iterations=records,
        final_policy=current.policy,
        final_theta=np.array(current.theta),
        converged=converged,
        reason=reason,
    )


def value_iteration_oracle(mdp, tol=1e-12, max_iters=100_000, tie_tol=1e-12):
    """Optimal values by value iteration and the greedy deterministic policy.

    Iterates until ``|V_{k+1} - V_k|_inf <= tol (1 - gamma) / (2 gamma)``.
    Greedy ties (within ``tie_tol``) go to the lowest action index.
    """
    S, A, g = mdp.num_states, mdp.num_actions, mdp.gamma
    r = mdp.r.reshape(S, A)
    V = np.zeros(S)
    threshold = tol * (1.0 - g) / (2.0 * g) if g > 0 else math.inf
    for _ in range(max_iters):
        V_new = (r + g * (mdp.P @ V).reshape(S, A)).max(axis=1)
        delta = np.max(np.abs(V_new - V))
        V = V_new
        if delta <= threshold:
            break
    Q = r + g * (mdp.P @ V).reshape(S, A)
    best = Q >= Q.max(axis=1, keepdims=True) - tie_tol
    actions = np.argmax(best, axis=1)
    return V, Policy.deterministic(actions, A)


def finite_difference_gradient(mdp, theta, h=1e-6):
    """Central differences of ``eta(softmax(theta))``, one coordinate at a time."""
    if not h > 0:
        raise ValidationError(f"h must be positive, got {h!r}")
    S, A = mdp.num_states, mdp.num_actions
    theta = check_vector(theta, "theta", S * A)
    grad = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        up = objective(mdp, softmax_policy(theta + e, S, A))
        down = objective(mdp, softmax_policy(theta - e, S, A))
        grad[j] = (up - down) / (2.0 * h)
    return grad
