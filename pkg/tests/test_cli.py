import pytest

from smdp import circuit as ct
from smdp import mdp as md
from smdp.cli import main
from smdp.cnf import Cnf, to_dimacs
from smdp.policy import StationaryPolicy, save_policy


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_cnf(tmp_path, cnf, name="f.cnf"):
    path = tmp_path / name
    path.write_text(to_dimacs(cnf))
    return str(path)


def coin_files(tmp_path):
    b = ct.CircuitBuilder(3)
    t = b.build([b.const(1)])
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0), rb.inp(0)])
    m = md.SuccinctMdp(("x1",), (0,), ("toss",), t, r, prob_denominator=2)
    mpath = md.save_mdp(m, tmp_path, horizon=3)
    pb = ct.CircuitBuilder(1)
    ppath = save_policy(StationaryPolicy(pb.build([pb.const(0)]), 1), tmp_path)
    return str(mpath), str(ppath)


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        main(["gen-satnext"])  # missing cnf and -o
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 1


def test_missing_file_exits_1(tmp_path, capsys):
    code, _, err = run(["eval", str(tmp_path / "absent"), str(tmp_path / "p")], capsys)
    assert code == 1
    assert "error" in err


def test_gen_then_eval_pipeline(tmp_path, capsys):
    cnf = write_cnf(tmp_path, Cnf(2, ((1, 2),)))
    out = tmp_path / "inst"
    code, text, _ = run(["gen-majsat", cnf, "-o", str(out)], capsys)
    assert code == 0 and "wrote" in text
    code, text, _ = run(
        ["eval", str(out / "mdp.manifest"), str(out / "policy.manifest")], capsys
    )
    assert code == 0
    assert text.strip() == "3/4"
    assert "expected_reward 3/4" in (out / "expected.txt").read_text()


def test_gen_satnext_and_next_action_exit_codes(tmp_path, capsys):
    cnf = write_cnf(tmp_path, Cnf(1, ((1, 1, 1),)))
    out = tmp_path / "inst"
    code, _, _ = run(["gen-satnext", cnf, "-o", str(out)], capsys)
    assert code == 0
    instance = dict(
        line.split(None, 1)
        for line in (out / "instance.txt").read_text().splitlines()
        if line.strip()
    )
    state, steps = instance["state"], instance["steps_remaining"]
    args = ["next-action", str(out / "mdp.manifest"), "--state", state, "--steps", steps]
    code, text, _ = run(args + ["--action", "S"], capsys)
    assert code == 0 and text.strip() == "S"
    code, _, _ = run(args + ["--action", "U"], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as e:
        main(args + ["--action", "bogus"])
    assert e.value.code == 1


def test_emit_records_format(tmp_path, capsys):
    mpath, ppath = coin_files(tmp_path)
    code, text, _ = run(["eval", mpath, ppath, "--emit", "records"], capsys)
    assert code == 0
    records = dict(line.split("=", 1) for line in text.strip().splitlines())
    assert records["reward"] == "3/2"
    assert records["trajectories"] == "8"
    assert records["depth_0"] == "0/1"


def test_eval_mc_output(tmp_path, capsys):
    mpath, ppath = coin_files(tmp_path)
    code, text, _ = run(
        ["eval-mc", mpath, ppath, "--samples", "500", "--seed", "7"], capsys
    )
    assert code == 0 and "stderr" in text


def test_horizon_flag_overrides_manifest(tmp_path, capsys):
    mpath, ppath = coin_files(tmp_path)
    code, text, _ = run(["eval", mpath, ppath, "--horizon", "1"], capsys)
    assert code == 0 and text.strip() == "1/2"


def test_solve_reports_value_and_actions(tmp_path, capsys):
    mpath, _ = coin_files(tmp_path)
    code, text, _ = run(["solve", mpath, "--emit", "records"], capsys)
    assert code == 0
    records = dict(line.split("=", 1) for line in text.strip().splitlines())
    assert records["value"] == "3/2"
    assert records["optimal_actions"] == "toss"


def test_check_consistency_exit_codes(tmp_path, capsys):
    cnf_unsat = write_cnf(tmp_path, Cnf(1, ((1,), (-1,))), "u.cnf")
    cnf_sat = write_cnf(tmp_path, Cnf(1, ((1,),)), "s.cnf")
    good, bad = tmp_path / "good", tmp_path / "bad"
    assert run(["gen-unsatcons", cnf_unsat, "-o", str(good)], capsys)[0] == 0
    assert run(["gen-unsatcons", cnf_sat, "-o", str(bad)], capsys)[0] == 0
    code, text, _ = run(
        ["check-consistency", str(good / "mdp.manifest"), str(good / "valuefn.manifest")],
        capsys,
    )
    assert code == 0 and text.strip() == "consistent"
    code, text, _ = run(
        ["check-consistency", str(bad / "mdp.manifest"), str(bad / "valuefn.manifest")],
        capsys,
    )
    assert code == 2 and "inconsistent at state" in text


def test_canon_prints_term_counts(tmp_path, capsys):
    b = ct.CircuitBuilder(2)
    c = b.build([b.xor(b.inp(0), b.inp(1))])
    path = tmp_path / "xor.net"
    ct.write_netlist(c, path)
    code, text, _ = run(["canon", str(path), "--emit", "records"], capsys)
    assert code == 0
    records = dict(line.split("=", 1) for line in text.strip().splitlines())
    assert records["terms"] == "2"


def test_verify_suite_exit_zero(capsys):
    code, text, _ = run(["verify", "consistency", "--n", "3", "--cases", "5"], capsys)
    assert code == 0
    assert text.strip().endswith("pass")
