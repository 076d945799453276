"""Exact policy evaluation.

Every quantity is an explicit function of ``(Pi, P, r, gamma, rho0)``:

    V     = (I - gamma Pi P)^{-1} Pi r
    Q     = r + gamma P V
    A     = Q - Xi^T V
    eta   = rho0^T V
    rho^T = rho0^T (I - gamma Pi P)^{-1}

The two solves share one LU factorization of ``I - gamma Pi P``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import Marginalizer, check_compatible, state_transition
from .exceptions import ConsistencyError, NotUniqueError, SingularSystem

__all__ = [
    "EvaluationResult",
    "value_function",
    "q_function",
    "advantage",
    "objective",
    "visitation",
    "stationary_distribution",
    "evaluate",
    "bellman_residual",
]

SOLVE_TOL = 1e-9
EIGEN_TOL = 1e-8
NEGATIVE_TOL = 1e-12


@dataclass(frozen=True)
class EvaluationResult:
    V: np.ndarray
    Q: np.ndarray
    A: np.ndarray
    eta: float
    rho_pi: np.ndarray


def _factor(M):
    try:
        with np.errstate(all="raise"):
            lu = scipy.linalg.lu_factor(M, check_finite=True)
    except (FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(f"could not factor Bellman operator: {exc}") from exc
    pivots = np.abs(np.diag(lu[0]))
    if pivots.size and pivots.min() <= np.finfo(float).eps * pivots.max():
        raise SingularSystem("Bellman operator is numerically singular")
    return lu


def _bellman_operator(mdp, policy):
    return np.eye(mdp.num_states) - mdp.gamma * state_transition(policy, mdp)


def resolvent_solve(M, b, transpose=False, tol=SOLVE_TOL):
    """Solve ``M x = b`` (or ``M^T x = b``) by LU and check the residual.

    The residual tolerance is relative to ``max(1, |x|_inf)`` so that large
    reward scales do not trip the check.
    """
    lu = _factor(M)
    x = scipy.linalg.lu_solve(lu, b, trans=1 if transpose else 0)
    A = M.T if transpose else M
    resid = np.max(np.abs(A @ x - b), initial=0.0)
    if not np.isfinite(resid) or resid > tol * max(1.0, np.max(np.abs(x), initial=0.0)):
        raise SingularSystem(f"linear solve residual {resid:.3g} exceeds tolerance")
    return x


def value_function(mdp, policy, tol=SOLVE_TOL):
    check_compatible(mdp, policy)
    return resolvent_solve(_bellman_operator(mdp, policy), policy.Pi @ mdp.r, tol=tol)


def q_function(mdp, policy, tol=SOLVE_TOL):
    V = value_function(mdp, policy, tol)
    return mdp.r + mdp.gamma * (mdp.P @ V)


def advantage(mdp, policy, tol=SOLVE_TOL):
    V = value_function(mdp, policy, tol)
    Q = mdp.r + mdp.gamma * (mdp.P @ V)
    Xi = Marginalizer(mdp.num_states, mdp.num_actions).Xi
    return Q - Xi.T @ V


def objective(mdp, policy, tol=SOLVE_TOL):
    """Discounted return ``eta = rho0^T V`` from the initial distribution."""
    return float(mdp.rho0 @ value_function(mdp, policy, tol))


def _clean_visitation(rho):
    if np.any(rho < -NEGATIVE_TOL):
        raise ConsistencyError(f"visitation has negative entry {rho.min():.3g}")
    return np.maximum(rho, 0.0)


def visitation(mdp, policy, tol=SOLVE_TOL):
    """Discounted visitation ``rho0^T (I - gamma Pi P)^{-1}``; sums to ``1/(1-gamma)``."""
    check_compatible(mdp, policy)
    rho = resolvent_solve(_bellman_operator(mdp, policy), mdp.rho0, transpose=True, tol=tol)
    return _clean_visitation(rho)


def stationary_distribution(mdp, policy, tol=EIGEN_TOL):
    """Probability vector ``mu`` with ``mu^T Pi P = mu^T``.

    Raises NotUniqueError when the left eigenspace at eigenvalue 1 has
    dimension greater than one (counted as singular values of
    ``(Pi P)^T - I`` at or below ``tol``).
    """
    P_pi = state_transition(policy, mdp)
    n = mdp.num_states
    _, sv, vt = np.linalg.svd(P_pi.T - np.eye(n))
    null_dim = int(np.sum(sv <= tol))
    if null_dim != 1:
        if null_dim == 0:
            raise ConsistencyError("induced chain has no stationary vector at tolerance")
        raise NotUniqueError(f"stationary eigenspace has dimension {null_dim}")
    mu = vt[-1]
    mu = mu / mu.sum()
    if np.any(mu < -tol):
        raise ConsistencyError("stationary vector has mixed signs")
    mu = np.maximum(mu, 0.0)
    return mu / mu.sum()


def evaluate(mdp, policy, tol=SOLVE_TOL):
    check_compatible(mdp, policy)
    M = _bellman_operator(mdp, policy)
    lu = _factor(M)
    V = scipy.linalg.lu_solve(lu, policy.Pi @ mdp.r)
    rho = scipy.linalg.lu_solve(lu, mdp.rho0, trans=1)
    scale = max(1.0, np.max(np.abs(V)), np.max(np.abs(rho)))
    resid = max(
        np.max(np.abs(M @ V - policy.Pi @ mdp.r)), np.max(np.abs(M.T @ rho - mdp.rho0))
    )
    if not np.isfinite(resid) or resid > tol * scale:
        raise SingularSystem(f"linear solve residual {resid:.3g} exceeds tolerance")
    Q = mdp.r + mdp.gamma * (mdp.P @ V)
    Xi = Marginalizer(mdp.num_states, mdp.num_actions).Xi
    A = Q - Xi.T @ V
    return EvaluationResult(V=V, Q=Q, A=A, eta=float(mdp.rho0 @ V), rho_pi=_clean_visitation(rho))


def bellman_residual(mdp, policy, V):
    """``|V - Pi r - gamma Pi P V|_inf`` for a candidate value vector."""
    P_pi = state_transition(policy, mdp)
    return float(np.max(np.abs(V - policy.Pi @ mdp.r - mdp.gamma * (P_pi @ V))))
