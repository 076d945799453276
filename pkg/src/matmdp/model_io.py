"""Instance generation, MDP/policy files, and empirical dynamics estimation.

MDP files are JSON objects::

    {
      "format_version": 1,
      "num_states": 2,
      "num_actions": 2,
      "gamma": 0.5,
      "transitions": [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
      "rewards": [1.0, 0.0, 0.0, 1.0],
      "initial_distribution": [1.0, 0.0]
    }

Row ``s * num_actions + a`` of ``transitions`` is ``p(. | s, a)``. Floats are
written with ``repr`` so a write/parse round trip is exact. Unknown keys are
rejected.

Random instances use numpy's ``default_rng`` (PCG64) seeded with the given
integer; :data:`GENERATOR_VERSION` changes whenever the draw order changes.
"""

import json
import numbers
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_gamma, check_positive_int
from .core import MdpInstance, Policy
from .exceptions import IndexOutOfRange, ParseError, ValidationError

__all__ = [
    "FORMAT_VERSION",
    "GENERATOR_VERSION",
    "TransitionSample",
    "TransitionEstimate",
    "generate_random_mdp",
    "random_policy",
    "builtin_m1",
    "parse_mdp",
    "write_mdp",
    "load_mdp",
    "save_mdp",
    "parse_policy",
    "write_policy",
    "parse_samples",
    "write_samples",
    "sample_transitions",
    "estimate_transitions",
]

FORMAT_VERSION = 1
GENERATOR_VERSION = "pcg64-v1"

_MDP_KEYS = (
    "format_version",
    "num_states",
    "num_actions",
    "gamma",
    "transitions",
    "rewards",
    "initial_distribution",
)
_POLICY_KEYS = ("format_version", "num_states", "num_actions", "pi")
_SAMPLE_KEYS = ("format_version", "num_states", "num_actions", "samples")


class TransitionSample(NamedTuple):
    s: int
    a: int
    s_next: int


def generate_random_mdp(seed, num_states, num_actions, gamma, reward_range=(0.0, 1.0)):
    """Random dense MDP: Dirichlet(1) rows, uniform rewards, uniform ``rho0``."""
    num_states = check_positive_int(num_states, "num_states")
    num_actions = check_positive_int(num_actions, "num_actions")
    gamma = check_gamma(gamma)
    lo, hi = (float(v) for v in reward_range)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise ValidationError(f"reward_range must be finite with low <= high, got {reward_range!r}")
    rng = np.random.default_rng(seed)
    # Normalized standard exponentials are uniform on the simplex.
    E = rng.standard_exponential((num_states * num_actions, num_states))
    P = E / E.sum(axis=1, keepdims=True)
    r = rng.uniform(lo, hi, size=num_states * num_actions)
    rho0 = np.full(num_states, 1.0 / num_states)
    return MdpInstance(P, r, gamma, rho0, num_actions=num_actions)


def random_policy(seed, num_states, num_actions):
    """Policy with each state's distribution drawn uniformly from the simplex."""
    rng = np.random.default_rng(seed)
    E = rng.standard_exponential((num_states, num_actions))
    return Policy((E / E.sum(axis=1, keepdims=True)).ravel(), num_states, num_actions)


def builtin_m1():
    """Two states, two actions: action ``a`` moves to state ``a``; reward 1 for staying."""
    P = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    r = np.array([1.0, 0.0, 0.0, 1.0])
    return MdpInstance(P, r, 0.5, np.array([1.0, 0.0]))


def _load_object(document, keys, kind):
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{kind} document is not valid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{kind} document must be a JSON object")
    unknown = sorted(set(obj) - set(keys))
    if unknown:
        raise ParseError(f"unknown key in {kind} document", field=unknown[0])
    for key in keys:
        if key not in obj:
            raise ParseError(f"missing required key in {kind} document", field=key)
    version = obj["format_version"]
    if not _is_int(version) or version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r}", field="format_version")
    return obj


def _is_int(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def _is_number(x):
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


def _int_field(obj, key):
    value = obj[key]
    if not _is_int(value) or value < 1:
        raise ParseError("expected a positive integer", field=key)
    return int(value)


def _number_list(value, key, length):
    if not isinstance(value, list) or not all(_is_number(x) for x in value):
        raise ParseError("expected an array of numbers", field=key)
    if len(value) != length:
        raise ParseError(f"expected {length} entries, got {len(value)}", field=key)
    return np.array(value, dtype=float)


def parse_mdp(document):
    """Parse an MDP document. Raises ParseError or ValidationError."""
    obj = _load_object(document, _MDP_KEYS, "MDP")
    S = _int_field(obj, "num_states")
    A = _int_field(obj, "num_actions")
    gamma = obj["gamma"]
    if not _is_number(gamma):
        raise ParseError("expected a number", field="gamma")
    rows = obj["transitions"]
    if not isinstance(rows, list) or len(rows) != S * A:
        raise ParseError(f"expected {S * A} rows", field="transitions")
    P = np.vstack([_number_list(row, f"transitions[{i}]", S) for i, row in enumerate(rows)])
    r = _number_list(obj["rewards"], "rewards", S * A)
    rho0 = _number_list(obj["initial_distribution"], "initial_distribution", S)
    return MdpInstance(P, r, gamma, rho0, num_actions=A)


def _floats(arr):
    return [float(x) for x in np.asarray(arr).ravel()]


def write_mdp(mdp):
    obj = {
        "format_version": FORMAT_VERSION,
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "gamma": float(mdp.gamma),
        "transitions": [_floats(row) for row in mdp.P],
        "rewards": _floats(mdp.r),
        "initial_distribution": _floats(mdp.rho0),
    }
    return json.dumps(obj, indent=2) + "\n"


def load_mdp(path):
    with open(path, encoding="utf-8") as fh:
        return parse_mdp(fh.read())


def save_mdp(mdp, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_mdp(mdp))


def parse_policy(document):
    obj = _load_object(document, _POLICY_KEYS, "policy")
    S = _int_field(obj, "num_states")
    A = _int_field(obj, "num_actions")
    return Policy(_number_list(obj["pi"], "pi", S * A), S, A)


def write_policy(policy):
    obj = {
        "format_version": FORMAT_VERSION,
        "num_states": policy.num_states,
        "num_actions": policy.num_actions,
        "pi": _floats(policy.pi),
    }
    return json.dumps(obj, indent=2) + "\n"


def parse_samples(document):
    """Parse a transition-sample document into ``(samples, num_states, num_actions)``."""
    obj = _load_object(document, _SAMPLE_KEYS, "samples")
    S = _int_field(obj, "num_states")
    A = _int_field(obj, "num_actions")
    raw = obj["samples"]
    if not isinstance(raw, list):
        raise ParseError("expected an array of [s, a, s_next] triples", field="samples")
    samples = []
    for i, item in enumerate(raw):
        if not (isinstance(item, list) and len(item) == 3 and all(_is_int(x) for x in item)):
            raise ParseError("expected an integer triple", field=f"samples[{i}]")
        samples.append(TransitionSample(*item))
    return samples, S, A


def write_samples(samples, num_states, num_actions):
    obj = {
        "format_version": FORMAT_VERSION,
        "num_states": num_states,
        "num_actions": num_actions,
        "samples": [[int(s), int(a), int(t)] for s, a, t in samples],
    }
    return json.dumps(obj) + "\n"


def sample_transitions(mdp, samples_per_pair, seed):
    """Draw ``samples_per_pair`` successors for every ``(s, a)`` from ``mdp.P``.

    Returns an integer array of shape ``(S*A*n, 3)`` with columns ``s, a, s_next``.
    """
    rng = np.random.default_rng(seed)
    S, A = mdp.num_states, mdp.num_actions
    n = int(samples_per_pair)
    if n < 0:
        raise ValidationError("samples_per_pair must be non-negative")
    out = np.empty((S * A * n, 3), dtype=np.int64)
    cdf = np.cumsum(mdp.P, axis=1)
    cdf[:, -1] = 1.0
    for j in range(S * A):
        u = rng.random(n)
        rows = slice(j * n, (j + 1) * n)
        out[rows, 0] = j // A
        out[rows, 1] = j % A
        out[rows, 2] = np.searchsorted(cdf[j], u, side="right")
    return out


@dataclass(frozen=True)
class TransitionEstimate:
    """Estimated dynamics ``P_hat`` with per-pair counts.

    ``unvisited[j]`` is set when pair ``j`` had no samples. Its row is then
    uniform, which is also what any positive smoothing produces.
    """

    P_hat: np.ndarray
    counts: np.ndarray
    unvisited: np.ndarray

    def to_mdp(self, rewards, gamma, rho0):
        num_actions = self.counts.shape[0] // self.counts.shape[1]
        return MdpInstance(self.P_hat, rewards, gamma, rho0, num_actions=num_actions)


def estimate_transitions(samples, num_states, num_actions, smoothing=0.0):
    """Count-based estimate ``(n(s,a,s') + k) / (n(s,a) + k S)``."""
    S = check_positive_int(num_states, "num_states")
    A = check_positive_int(num_actions, "num_actions")
    smoothing = float(smoothing)
    if not (smoothing >= 0 and np.isfinite(smoothing)):
        raise ValidationError(f"smoothing must be a finite non-negative number, got {smoothing!r}")
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    if arr.size == 0:
        arr = np.empty((0, 3), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"samples must be (s, a, s_next) triples, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValidationError("sample indices must be integers")
        arr = arr.astype(np.int64)
    for col, (name, bound) in enumerate((("s", S), ("a", A), ("s_next", S))):
        bad = np.where((arr[:, col] < 0) | (arr[:, col] >= bound))[0]
        if bad.size:
            i = int(bad[0])
            raise IndexOutOfRange(f"sample {i}: {name}={int(arr[i, col])} outside [0, {bound})")

    counts = np.zeros((S * A, S))
    np.add.at(counts, (arr[:, 0] * A + arr[:, 1], arr[:, 2]), 1.0)
    totals = counts.sum(axis=1)
    unvisited = totals == 0
    seen = ~unvisited
    P_hat = np.empty_like(counts)
    P_hat[seen] = (counts[seen] + smoothing) / (totals[seen, None] + smoothing * S)
    P_hat[unvisited] = 1.0 / S
    return TransitionEstimate(P_hat=P_hat, counts=counts, unvisited=unvisited)
