"""Command-line front end for exact tabular MDP analysis.

Every command prints a JSON run report::

    {"command": ..., "input_digest": ..., "config": ..., "result": ...,
     "duration_seconds": ...}

Everything except ``duration_seconds`` is a deterministic function of the
inputs and seeds. Exit codes: 0 success, 1 failed invariant check, 2 bad input.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import asdict

import numpy as np

from . import model_io
from .core import Policy
from .evaluation import bellman_residual, evaluate, value_function
from .exceptions import MdpError
from .model_io import GENERATOR_VERSION
from .optimizer import ImprovementConfig, improve, value_iteration_oracle
from .parameterization import ParameterizedPolicy, softmax_policy
from .surrogates import bound_report
from .sweeps import DEFAULT_GRID, bound_sweep, gradient_check, random_instance

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


# -- input resolution -------------------------------------------------------


def _load_mdp(args, max_states=10, max_actions=4, gamma=None):
    if args.mdp:
        if args.mdp == "builtin:m1":
            mdp = model_io.builtin_m1()
        else:
            try:
                mdp = model_io.load_mdp(args.mdp)
            except OSError as exc:
                raise InputError(f"cannot read MDP file {args.mdp!r}: {exc.strerror}") from exc
    elif args.seed is not None:
        mdp = random_instance(args.seed, max_states, max_actions, gamma)
    else:
        raise InputError("either --mdp or --seed is required")
    if args.gamma_override is not None:
        mdp = mdp.replace(gamma=args.gamma_override)
    return mdp


def _policy(spec, mdp):
    S, A = mdp.num_states, mdp.num_actions
    if spec == "uniform":
        return Policy.uniform(S, A)
    kind, _, value = spec.partition(":")
    if kind == "file":
        try:
            with open(value, encoding="utf-8") as fh:
                policy = model_io.parse_policy(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read policy file {value!r}: {exc.strerror}") from exc
        if (policy.num_states, policy.num_actions) != (S, A):
            raise InputError("policy file dimensions do not match the MDP")
        return policy
    if kind == "seed":
        return model_io.random_policy(_int(value, spec), S, A)
    if kind == "actions":
        try:
            actions = [int(x) for x in value.split(",")]
        except ValueError as exc:
            raise InputError(f"bad action list in {spec!r}") from exc
        if len(actions) != S or not all(0 <= a < A for a in actions):
            raise InputError(f"{spec!r} must list one action in [0, {A}) per state")
        return Policy.deterministic(actions, A)
    raise InputError(f"unknown policy spec {spec!r}; use uniform, file:<path>, seed:<n>, actions:<list>")


def _theta(spec, mdp):
    if spec == "zeros":
        return np.zeros(mdp.num_pairs)
    kind, _, value = spec.partition(":")
    if kind == "seed":
        return np.random.default_rng(_int(value, spec)).normal(size=mdp.num_pairs)
    raise InputError(f"unknown theta spec {spec!r}; use zeros or seed:<n>")


def _int(text, context):
    try:
        return int(text)
    except ValueError as exc:
        raise InputError(f"expected an integer in {context!r}") from exc


def _floats(text, name):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"{name} must be a comma-separated list of numbers") from exc


def _digest(mdp=None, **seeds):
    h = hashlib.sha256()
    if mdp is not None:
        h.update(model_io.write_mdp(mdp).encode())
    h.update(json.dumps(_jsonable(seeds), sort_keys=True).encode())
    return h.hexdigest()


# -- commands ---------------------------------------------------------------


def cmd_evaluate(args):
    mdp = _load_mdp(args)
    policy = _policy(args.policy, mdp)
    res = evaluate(mdp, policy)
    result = {
        "V": res.V, "Q": res.Q, "A": res.A, "eta": res.eta, "rho_pi": res.rho_pi,
        "residuals": {
            "bellman": bellman_residual(mdp, policy, res.V),
            "pi_advantage": float(np.max(np.abs(policy.Pi @ res.A))),
            "visitation_mass": float(abs(res.rho_pi.sum() - 1.0 / (1.0 - mdp.gamma))),
        },
    }
    return mdp, {"policy": args.policy}, result, EXIT_OK


def cmd_surrogates(args):
    mdp = _load_mdp(args)
    base = _policy(args.base, mdp)
    target = _policy(args.target, mdp)
    rep = bound_report(mdp, base, target)
    status = EXIT_OK if rep.trpo_holds and rep.trpo_holds_reverse else EXIT_INVARIANT
    return mdp, {"base": args.base, "target": args.target}, rep.as_dict(), status


def cmd_gradcheck(args):
    mdp = _load_mdp(args)
    theta_spec = args.theta or ("zeros" if args.mdp else f"seed:{args.seed}")
    theta = _theta(theta_spec, mdp)
    if not args.h > 0:
        raise InputError("--h must be positive")
    param = ParameterizedPolicy(theta, mdp.num_states, mdp.num_actions)
    result = gradient_check(mdp, param, args.h)
    ok = (
        result["rel_err_l4"] <= args.rel_tol
        and result["rel_err_l2_plus_l3"] <= args.rel_tol
        and result["rel_err_eta"] <= args.rel_tol
        and result["decomposition_residual"] <= 1e-9
    )
    result["pass"] = ok
    config = {"theta": theta_spec, "h": args.h, "rel_tol": args.rel_tol}
    return mdp, config, result, EXIT_OK if ok else EXIT_INVARIANT


def cmd_boundsweep(args):
    seed = 0 if args.seed is None else args.seed
    if args.num_instances < 1 or args.num_pairs < 1:
        raise InputError("--num-instances and --num-pairs must be positive")
    grid = _floats(args.perturbation_grid, "--perturbation-grid")
    if len(grid) < 2 or any(t <= 0 for t in grid):
        raise InputError("--perturbation-grid needs at least two positive values")
    sweep = bound_sweep(seed, args.num_instances, args.num_pairs, grid)
    slopes = sweep["slopes"]
    sweep["slope_checks"] = {
        "L4_ge_1.9": slopes["L4"]["min"] >= 1.9,
        "L2_in_0.9_1.1": 0.9 <= slopes["L2"]["min"] and slopes["L2"]["max"] <= 1.1,
        "L3_in_0.9_1.1": 0.9 <= slopes["L3"]["min"] and slopes["L3"]["max"] <= 1.1,
    }
    sweep["gamma_scan"] = _gamma_scan(seed, _floats(args.gamma_grid, "--gamma-grid"))
    config = {
        "num_instances": args.num_instances, "num_pairs": args.num_pairs,
        "perturbation_grid": grid, "generator": GENERATOR_VERSION,
    }
    status = EXIT_OK if sweep["counts"]["trpo_violations"] == 0 else EXIT_INVARIANT
    return None, config, sweep, status, {"seed": seed}


def _gamma_scan(seed, gammas):
    """Bound right-hand sides for one fixed instance and pair as gamma varies."""
    if not gammas:
        return []
    base_mdp = random_instance(seed, gamma=0.5)
    S, A = base_mdp.num_states, base_mdp.num_actions
    rng = np.random.default_rng([seed, 3])
    theta = rng.normal(size=S * A)
    a = softmax_policy(theta, S, A)
    b = softmax_policy(theta + 0.1 * rng.normal(size=S * A), S, A)
    rows = []
    for g in gammas:
        rep = bound_report(base_mdp.replace(gamma=g), a, b)
        rows.append({"gamma": g, "bound_l2": rep.bounds[2], "bound_l3": rep.bounds[3],
                     "bound_l4": rep.bounds[4], "penalty": rep.penalty})
    return rows


def cmd_improve(args):
    mdp = _load_mdp(args, max_states=8, max_actions=3, gamma=0.9)
    theta0 = _theta(args.theta0, mdp)
    config = ImprovementConfig(
        max_iters=args.max_iters, step_size=args.step_size, backtracking=args.backtracking,
        tol=args.tol, anneal=not args.no_anneal,
    )
    trace = improve(mdp, theta0, config)
    V_star, greedy = value_iteration_oracle(mdp)
    optimum = float(mdp.rho0 @ V_star)
    result = trace.as_dict()
    result["etas"] = trace.etas
    result["oracle_eta"] = optimum
    result["gap"] = optimum - float(trace.etas[-1])
    result["initial_gap"] = optimum - float(trace.etas[0])
    result["oracle_greedy_actions"] = np.argmax(greedy.table, axis=1)
    result["monotone"] = trace.is_monotone()
    cfg = {**asdict(config), "theta0": args.theta0}
    return mdp, cfg, result, EXIT_OK if result["monotone"] else EXIT_INVARIANT


def cmd_estimate(args):
    smoothing = args.smoothing
    if args.samples:
        try:
            with open(args.samples, encoding="utf-8") as fh:
                samples, S, A = model_io.parse_samples(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read samples file {args.samples!r}: {exc.strerror}") from exc
        est = model_io.estimate_transitions(samples, S, A, smoothing)
        result = {"num_samples": len(samples), "P_hat": est.P_hat, "unvisited": est.unvisited}
        mdp = None
        if args.mdp or args.seed is not None:
            mdp = _load_mdp(args)
            result.update(_estimation_errors(mdp, est))
        return mdp, {"smoothing": smoothing, "samples": args.samples}, result, EXIT_OK

    mdp = _load_mdp(args)
    seed = 0 if args.seed is None else args.seed
    sizes = [int(n) for n in _floats(args.samples_per_pair, "--samples-per-pair")]
    rows = []
    for n in sizes:
        if n < 0:
            raise InputError("--samples-per-pair values must be non-negative")
        data = model_io.sample_transitions(mdp, n, [seed, n])
        est = model_io.estimate_transitions(data, mdp.num_states, mdp.num_actions, smoothing)
        rows.append({"samples_per_pair": n, **_estimation_errors(mdp, est),
                     "num_unvisited": int(est.unvisited.sum())})
    result = {"table": rows}
    if len(sizes) == 1:
        result["unvisited"] = est.unvisited
    config = {"smoothing": smoothing, "samples_per_pair": sizes, "generator": GENERATOR_VERSION}
    return mdp, config, result, EXIT_OK, {"seed": seed}


def _estimation_errors(mdp, est):
    policy = Policy.uniform(mdp.num_states, mdp.num_actions)
    V = value_function(mdp, policy)
    V_hat = value_function(est.to_mdp(mdp.r, mdp.gamma, mdp.rho0), policy)
    return {
        "p_hat_max_error": float(np.max(np.abs(est.P_hat - mdp.P))),
        "v_hat_max_error": float(np.max(np.abs(V_hat - V))),
    }


def cmd_generate(args):
    seed = 0 if args.seed is None else args.seed
    gamma = args.gamma if args.gamma_override is None else args.gamma_override
    mdp = model_io.generate_random_mdp(
        seed, args.num_states, args.num_actions, gamma, (args.reward_low, args.reward_high)
    )
    return mdp


# -- plumbing ---------------------------------------------------------------


def _to_csv(result):
    buf = io.StringIO()
    table = None
    if isinstance(result, dict):
        table = result.get("table") or result.get("iterations")
    if table:
        writer = csv.DictWriter(buf, fieldnames=list(table[0]), lineterminator="\n")
        writer.writeheader()
        for row in table:
            writer.writerow(_jsonable(row))
        return buf.getvalue()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            writer.writerow([prefix, json.dumps(obj) if isinstance(obj, list) else obj])

    walk("", _jsonable(result))
    return buf.getvalue()


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p, seed_help="integer seed"):
    p.add_argument("--mdp", help="MDP file path, or builtin:m1")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--gamma-override", type=float, help="replace the instance discount")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="matmdp", description=__doc__.splitlines()[0],
                                     epilog="exit codes: 0 ok, 1 failed invariant check, 2 bad input")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="exact policy evaluation")
    _add_common(p)
    p.add_argument("--policy", default="uniform")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("surrogates", help="all six surrogates with error bounds")
    _add_common(p)
    p.add_argument("--base", default="uniform")
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_surrogates)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    _add_common(p)
    p.add_argument("--theta", help="zeros or seed:<n> (default: zeros with --mdp, else seed)")
    p.add_argument("--h", type=float, default=1e-6)
    p.add_argument("--rel-tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("boundsweep", help="bound violations and error slopes over random pairs")
    _add_common(p)
    p.add_argument("--num-instances", type=int, default=100)
    p.add_argument("--num-pairs", type=int, default=10)
    p.add_argument("--perturbation-grid", default=",".join(repr(t) for t in DEFAULT_GRID))
    p.add_argument("--gamma-grid", default="0.0,0.1,0.3,0.5,0.7,0.9")
    p.set_defaults(func=cmd_boundsweep)

    p = sub.add_parser("improve", help="monotonic policy improvement")
    _add_common(p)
    p.add_argument("--theta0", default="zeros")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--step-size", type=float, default=1.0)
    p.add_argument("--backtracking", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--no-anneal", action="store_true", help="keep the full penalty coefficient")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("estimate", help="estimate dynamics from transition samples")
    _add_common(p)
    p.add_argument("--samples", help="samples file; otherwise samples are drawn from the MDP")
    p.add_argument("--samples-per-pair", default="100,1000,10000")
    p.add_argument("--smoothing", type=float, default=0.0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("generate", help="write a random MDP file")
    _add_common(p)
    p.add_argument("--num-states", type=int, required=True)
    p.add_argument("--num-actions", type=int, required=True)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--reward-low", type=float, default=0.0)
    p.add_argument("--reward-high", type=float, default=1.0)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "generate":
            _emit(model_io.write_mdp(args.func(args)), args.output)
            return EXIT_OK
        out = args.func(args)
    except (InputError, MdpError) as exc:
        print(f"matmdp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    mdp, config, result, status = out[:4]
    seeds = out[4] if len(out) > 4 else {"seed": args.seed}
    if args.format == "csv":
        text = _to_csv(result)
    else:
        report = {
            "command": args.command,
            "input_digest": _digest(mdp, **seeds),
            "config": config,
            "result": result,
            "duration_seconds": round(time.perf_counter() - start, 6),
        }
        text = json.dumps(_jsonable(report), indent=2) + "\n"
    try:
        _emit(text, args.output)
    except OSError as exc:
        print(f"matmdp {args.command}: error: cannot write {args.output!r}: {exc.strerror}",
              file=sys.stderr)
        return EXIT_INPUT
    return status


if __name__ == "__main__":
    sys.exit(main())
