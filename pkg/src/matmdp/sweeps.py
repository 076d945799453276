"""Randomized verification routines: gradient checks, slope fits, bound sweeps.

These back the ``gradcheck`` and ``boundsweep`` commands and the acceptance
tests. All randomness flows from integer seeds through ``default_rng``.
"""

import math

import numpy as np

from .evaluation import evaluate, objective
from .model_io import generate_random_mdp, random_policy
from .optimizer import finite_difference_gradient
from .parameterization import ParameterizedPolicy, softmax_policy
from .surrogates import bound_report, surrogate_gradient, surrogate_values

__all__ = [
    "GAMMA_CYCLE",
    "DEFAULT_GRID",
    "random_instance",
    "random_parameterized_instance",
    "gradient_check",
    "slope_fit",
    "bound_sweep",
    "policy_pairs",
]

GAMMA_CYCLE = (0.5, 0.9, 0.99)
DEFAULT_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
# A first-order error term counts as nonzero when its directional
# coefficient is at least this fraction of |grad eta|.
FIRST_ORDER_FLOOR = 1e-2


def random_instance(seed, max_states=10, max_actions=4, gamma=None):
    rng = np.random.default_rng([seed, 0])
    S = int(rng.integers(2, max_states + 1))
    A = int(rng.integers(2, max_actions + 1))
    if gamma is None:
        gamma = GAMMA_CYCLE[seed % len(GAMMA_CYCLE)]
    return generate_random_mdp(seed, S, A, gamma)


def random_parameterized_instance(seed, max_states=10, max_actions=4, gamma=None):
    """``(mdp, ParameterizedPolicy, unit direction)`` with ``N(0, 1)`` logits."""
    mdp = random_instance(seed, max_states, max_actions, gamma)
    rng = np.random.default_rng([seed, 1])
    theta = rng.normal(size=mdp.num_pairs)
    d = rng.normal(size=mdp.num_pairs)
    d /= np.linalg.norm(d)
    return mdp, ParameterizedPolicy(theta, mdp.num_states, mdp.num_actions), d


def _rel_err(a, b):
    scale = max(np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def gradient_check(mdp, param_policy, h=1e-6):
    """Compare analytic surrogate gradients with central differences of ``eta``."""
    base = evaluate(mdp, param_policy.policy)
    g2 = surrogate_gradient(2, mdp, param_policy, base)
    g3 = surrogate_gradient(3, mdp, param_policy, base)
    g4 = surrogate_gradient(4, mdp, param_policy, base)
    # Policy-gradient form sum_s rho(s) sum_a grad pi(a|s) Q(s,a), built from Q not A.
    g_pg = param_policy.pullback(np.repeat(base.rho_pi, mdp.num_actions) * base.Q)
    fd = finite_difference_gradient(mdp, param_policy.theta, h)
    return {
        "rel_err_l4": _rel_err(g4, fd),
        "rel_err_l2_plus_l3": _rel_err(g2 + g3, fd),
        "rel_err_eta": _rel_err(g_pg, fd),
        "decomposition_residual": float(np.max(np.abs(g2 + g3 - g4))),
        "grad_l2_max_abs": float(np.max(np.abs(g2))),
        "grad_l2": g2.tolist(),
        "grad_l3": g3.tolist(),
        "grad_l4": g4.tolist(),
        "grad_fd": fd.tolist(),
    }


def slope_fit(mdp, param_policy, direction, grid=DEFAULT_GRID):
    """Log-log slopes of ``|eta(pi_t) - L_k|`` for ``pi_t = softmax(theta + t d)``.

    The error of ``L2`` is first order with coefficient ``grad L3 . d`` and
    the error of ``L3`` with ``grad L2 . d``; ``nonzero_first_order`` flags
    whether that coefficient clears ``FIRST_ORDER_FLOOR * |grad eta|``.
    """
    grid = np.asarray(grid, dtype=float)
    policy = param_policy.policy
    base = evaluate(mdp, policy)
    errs = {2: [], 3: [], 4: []}
    for t in grid:
        target = softmax_policy(param_policy.theta + t * direction, mdp.num_states, mdp.num_actions)
        values = surrogate_values(mdp, policy, target, base)
        eta = objective(mdp, target)
        for k in errs:
            errs[k].append(abs(eta - values[k - 1]))
    slopes = {}
    for k, e in errs.items():
        e = np.asarray(e)
        slopes[k] = float(np.polyfit(np.log(grid), np.log(e), 1)[0]) if np.all(e > 0) else math.nan
    g2 = surrogate_gradient(2, mdp, param_policy, base)
    g3 = surrogate_gradient(3, mdp, param_policy, base)
    norm = float(np.linalg.norm(g2 + g3))
    coeff = {2: float(g3 @ direction), 3: float(g2 @ direction)}
    floor = FIRST_ORDER_FLOOR * norm
    return {
        "slopes": slopes,
        "errors": {k: [float(x) for x in v] for k, v in errs.items()},
        "first_order_coeff": coeff,
        "nonzero_first_order": {k: abs(c) >= floor and norm > 0 for k, c in coeff.items()},
    }


def policy_pairs(seed, mdp, num_pairs):
    """Strictly positive policy pairs: alternately independent and perturbed."""
    S, A = mdp.num_states, mdp.num_actions
    rng = np.random.default_rng([seed, 2])
    pairs = []
    for j in range(num_pairs):
        if j % 2 == 0:
            a = random_policy(int(rng.integers(2**63)), S, A)
            b = random_policy(int(rng.integers(2**63)), S, A)
        else:
            theta = rng.normal(size=S * A)
            scale = 10.0 ** rng.uniform(-3, 0.5)
            a = softmax_policy(theta, S, A)
            b = softmax_policy(theta + scale * rng.normal(size=S * A), S, A)
        pairs.append((a, b))
    return pairs


def bound_sweep(seed, num_instances=100, num_pairs=10, grid=DEFAULT_GRID, slack=1e-9):
    """Count bound violations over random instances and fit error slopes."""
    ss = np.random.SeedSequence(seed)
    child_seeds = [int(c.generate_state(1)[0]) for c in ss.spawn(num_instances)]
    rows = []
    counts = {"pairs": 0, "finite_kl_pairs": 0, "trpo_violations": 0, "trpo_reverse_violations": 0,
              "L2_violations": 0, "L3_violations": 0, "L4_violations": 0}
    slopes = {2: [], 3: [], 4: []}
    for i, inst_seed in enumerate(child_seeds):
        mdp, param, d = random_parameterized_instance(inst_seed)
        for j, (a, b) in enumerate(policy_pairs(inst_seed, mdp, num_pairs)):
            rep = bound_report(mdp, a, b, slack=slack)
            counts["pairs"] += 1
            if rep.vacuous:
                continue
            counts["finite_kl_pairs"] += 1
            counts["trpo_violations"] += int(not rep.trpo_holds)
            counts["trpo_reverse_violations"] += int(not rep.trpo_holds_reverse)
            for k in (2, 3, 4):
                counts[f"L{k}_violations"] += int(not rep.bound_holds[k])
            rows.append({
                "instance": i, "pair": j, "gamma": mdp.gamma,
                "eta_target": rep.eta_target, "l4": rep.values[3],
                "trpo_rhs": rep.trpo_bound_rhs, "kl_max": rep.kl_max,
                "err_l2": rep.errors[2], "bound_l2": rep.bounds[2],
                "err_l3": rep.errors[3], "bound_l3": rep.bounds[3],
                "err_l4": rep.errors[4], "bound_l4": rep.bounds[4],
            })
        fit = slope_fit(mdp, param, d, grid)
        slopes[4].append(fit["slopes"][4])
        for k in (2, 3):
            if fit["nonzero_first_order"][k]:
                slopes[k].append(fit["slopes"][k])
    summary = {}
    for k, vals in slopes.items():
        vals = np.asarray(vals)
        summary[f"L{k}"] = {
            "count": int(vals.size),
            "min": float(vals.min()) if vals.size else math.nan,
            "median": float(np.median(vals)) if vals.size else math.nan,
            "max": float(vals.max()) if vals.size else math.nan,
        }
    return {"counts": counts, "slopes": summary, "table": rows}
