import json
import subprocess
import sys

import numpy as np
import pytest

from matmdp import builtin_m1, write_mdp
from matmdp.cli import EXIT_INPUT, EXIT_OK, main
from matmdp.model_io import write_policy, write_samples, sample_transitions
from matmdp import Policy


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    return json.loads(out)


class TestEvaluate:
    def test_m1_uniform(self, capsys):
        rep = payload(capsys, "evaluate", "--mdp", "builtin:m1")
        assert rep["command"] == "evaluate"
        assert rep["result"]["eta"] == pytest.approx(1.0)
        assert set(rep) == {"command", "input_digest", "config", "result", "duration_seconds"}

    def test_gamma_zero_file(self, capsys, tmp_path):
        path = tmp_path / "g0.json"
        path.write_text(write_mdp(builtin_m1().replace(gamma=0.0)))
        pol = Policy([0.25, 0.75, 0.6, 0.4], 2, 2)
        ppath = tmp_path / "pol.json"
        ppath.write_text(write_policy(pol))
        rep = payload(capsys, "evaluate", "--mdp", str(path), "--policy", f"file:{ppath}")
        np.testing.assert_allclose(rep["result"]["V"], pol.Pi @ builtin_m1().r)

    def test_bad_path(self, capsys):
        code, out, err = run(capsys, "evaluate", "--mdp", "/nonexistent/m.json")
        assert code == EXIT_INPUT and out == "" and "error" in err

    def test_bad_policy_spec(self, capsys):
        code, _, err = run(capsys, "evaluate", "--mdp", "builtin:m1", "--policy", "actions:0,7")
        assert code == EXIT_INPUT and "actions" in err

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format_version": 1}')
        code, _, err = run(capsys, "evaluate", "--mdp", str(path))
        assert code == EXIT_INPUT and "missing" in err

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "evaluate", "--mdp", "builtin:m1", "--format", "csv")
        assert code == EXIT_OK and "eta" in out


class TestOtherCommands:
    def test_surrogates_m1(self, capsys):
        rep = payload(capsys, "surrogates", "--mdp", "builtin:m1", "--base", "uniform",
                      "--target", "actions:0,1")
        np.testing.assert_allclose(rep["result"]["values"], [2.0, 1.5, 1.5, 2.0, 1.0, 1.0], atol=1e-12)
        assert rep["result"]["kl_max"] == "inf"

    def test_gradcheck_m1(self, capsys):
        rep = payload(capsys, "gradcheck", "--mdp", "builtin:m1", "--theta", "zeros", "--h", "1e-6")
        res = rep["result"]
        for key in ("rel_err_l4", "rel_err_l2_plus_l3", "rel_err_eta"):
            assert res[key] <= 1e-5

    def test_gradcheck_gamma_zero(self, capsys):
        rep = payload(capsys, "gradcheck", "--mdp", "builtin:m1", "--gamma-override", "0",
                      "--theta", "seed:3")
        assert rep["result"]["grad_l2_max_abs"] == 0.0

    def test_gradcheck_seeded(self, capsys):
        rep = payload(capsys, "gradcheck", "--seed", "5")
        assert rep["result"]["decomposition_residual"] <= 1e-9

    def test_boundsweep_small(self, capsys):
        rep = payload(capsys, "boundsweep", "--seed", "0", "--num-instances", "5", "--num-pairs", "4")
        counts = rep["result"]["counts"]
        assert counts["pairs"] == 20 and counts["trpo_violations"] == 0
        scan = rep["result"]["gamma_scan"]
        l4 = [row["bound_l4"] for row in scan]
        assert l4 == sorted(l4)

    def test_improve_m1(self, capsys):
        rep = payload(capsys, "improve", "--mdp", "builtin:m1")
        assert rep["result"]["gap"] <= 1e-6 and rep["result"]["monotone"]

    def test_improve_zero_iters(self, capsys):
        rep = payload(capsys, "improve", "--mdp", "builtin:m1", "--max-iters", "0")
        assert len(rep["result"]["iterations"]) == 1
        assert rep["result"]["gap"] == rep["result"]["initial_gap"]

    def test_improve_csv_has_iteration_rows(self, capsys):
        code, out, _ = run(capsys, "improve", "--mdp", "builtin:m1", "--max-iters", "3", "--format", "csv")
        assert code == EXIT_OK and out.splitlines()[0].startswith("iteration")

    def test_estimate_m1(self, capsys):
        rep = payload(capsys, "estimate", "--mdp", "builtin:m1", "--samples-per-pair", "1000")
        assert rep["result"]["table"][0]["p_hat_max_error"] == 0.0

    def test_estimate_empty_samples(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(write_samples([], 2, 2))
        rep = payload(capsys, "estimate", "--samples", str(path))
        assert rep["result"]["unvisited"] == [True] * 4

    def test_estimate_sample_file_against_truth(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(write_samples(sample_transitions(builtin_m1(), 10, 0), 2, 2))
        rep = payload(capsys, "estimate", "--samples", str(path), "--mdp", "builtin:m1")
        assert rep["result"]["p_hat_max_error"] == 0.0

    def test_generate_round_trips(self, capsys, tmp_path):
        out = tmp_path / "g.json"
        assert main(["generate", "--seed", "4", "--num-states", "3", "--num-actions", "2",
                     "--output", str(out)]) == EXIT_OK
        rep = payload(capsys, "evaluate", "--mdp", str(out))
        assert len(rep["result"]["V"]) == 3

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["evaluate", "--bogus"])
        assert info.value.code == 2


def strip_duration(text):
    rep = json.loads(text)
    rep.pop("duration_seconds")
    return json.dumps(rep, sort_keys=True)


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["evaluate", "--seed", "11"],
        ["improve", "--seed", "3", "--max-iters", "20"],
        ["estimate", "--seed", "2", "--samples-per-pair", "100,1000"],
    ])
    def test_repeated_subprocess_runs(self, argv):
        outs = [subprocess.run([sys.executable, "-m", "matmdp", *argv], capture_output=True, text=True,
                               check=True).stdout for _ in range(2)]
        assert strip_duration(outs[0]) == strip_duration(outs[1])

    def test_digest_tracks_seed(self, capsys):
        a = payload(capsys, "evaluate", "--seed", "1")["input_digest"]
        b = payload(capsys, "evaluate", "--seed", "2")["input_digest"]
        assert a != b
