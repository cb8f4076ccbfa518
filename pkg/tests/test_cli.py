"""Command-line interface: subcommands, CSV formats, exit codes."""

import pytest

from dualprox.cli import RunConfig, main, read_trace_csv


def run_cli(*argv):
    return main(list(argv))


def test_run_toy_trace(tmp_path):
    out = tmp_path / "toy.csv"
    code = run_cli("run", "--problem", "tv1d-toy", "--method", "dpg",
                   "--fixed-L", "2", "--iters", "5", "--certs",
                   "--out", str(out))
    assert code == 0
    rows = read_trace_csv(out)
    assert float(rows[0]["dual_val"]) == -3.0
    assert float(rows[0]["pg_norm"]) == 0.0
    assert float(rows[0]["primal_val"]) == 3.0
    header = out.read_text().splitlines()[0]
    assert header == "k,L,t,T,dual_val,primal_val,pg_norm,step_norm,pd_gap,infeas"


def test_run_deterministic_bytes(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("run", "--problem", "boxqp-small", "--seed", "11", "--method",
            "gfdpg", "--schedule", "poly", "--a", "4", "--iters", "300",
            "--certs")
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_run_zero_iterations_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    assert run_cli("run", "--problem", "tv1d-toy", "--iters", "0",
                   "--out", str(out)) == 0
    assert out.read_text().splitlines() == [
        "k,L,t,T,dual_val,primal_val,pg_norm,step_norm,pd_gap,infeas"]


def test_unknown_method_exits_2():
    with pytest.raises(SystemExit) as exc:
        run_cli("run", "--problem", "tv1d-toy", "--method", "sgd")
    assert exc.value.code == 2


def test_unknown_problem_exits_2(tmp_path):
    assert run_cli("run", "--problem", "no-such", "--out",
                   str(tmp_path / "x.csv")) == 2


def test_run_svg_written(tmp_path):
    svg = tmp_path / "fig.svg"
    assert run_cli("run", "--problem", "tv1d-toy", "--method", "fdpg",
                   "--iters", "30", "--certs", "--svg", str(svg)) == 0
    assert svg.exists() and svg.stat().st_size > 0


def test_verify_all_pass(tmp_path):
    out = tmp_path / "certs.csv"
    code = run_cli("verify", "--problem", "boxqp-tiny", "--seed", "42",
                   "--method", "gfdpg", "--schedule", "poly", "--a", "3",
                   "--iters", "100", "--ref", "enumerate", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bound_id,k,bound,measured,margin,pass"
    assert not any(line.endswith(",0") for line in lines[1:])


def test_verify_forced_bug_exits_1(tmp_path):
    code = run_cli("verify", "--problem", "tv1d-toy", "--method", "gfdpg",
                   "--schedule", "poly", "--a", "3", "--fixed-L", "16",
                   "--iters", "50", "--ref", "enumerate",
                   "--scale-bounds", "1e-9", "--out", str(tmp_path / "c.csv"))
    assert code == 1


def test_verify_indicator_regularizer_yields_na(tmp_path):
    out = tmp_path / "na.csv"
    code = run_cli("verify", "--problem", "interproj-toy", "--method", "fdpg",
                   "--iters", "50", "--ref", "longrun", "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert ",NA,NA,NA,NA" in text


def test_compare_requires_two_configs(tmp_path):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("problem = tv1d-toy\nmethod = dpg\n")
    assert run_cli("compare", str(cfg)) == 2


def test_compare_rejects_mismatched_problems(tmp_path):
    c1 = tmp_path / "c1.cfg"
    c2 = tmp_path / "c2.cfg"
    c1.write_text("problem = tv1d-toy\nmethod = dpg\niters = 5\n")
    c2.write_text("problem = boxqp-small\nmethod = fdpg\niters = 5\n")
    assert run_cli("compare", str(c1), str(c2)) == 2


def test_compare_writes_long_csv_and_svg(tmp_path):
    cfgs = []
    for name, method, extra in (("d.cfg", "dpg", ""),
                                ("f.cfg", "fdpg", ""),
                                ("g.cfg", "gfdpg",
                                 "schedule = poly\na = 4\n")):
        path = tmp_path / name
        path.write_text(f"problem = boxqp-small\nseed = 11\nmethod = {method}\n"
                        f"iters = 60\ncerts = true\n{extra}")
        cfgs.append(str(path))
    out = tmp_path / "cmp.csv"
    svg = tmp_path / "cmp.svg"
    assert run_cli("compare", *cfgs, "--out", str(out), "--svg", str(svg)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,schedule,k,metric,value"
    methods = {line.split(",")[0] for line in lines[1:]}
    assert methods == {"dpg", "fdpg", "gfdpg"}
    assert svg.exists()
    # no figure file without the flag
    out2 = tmp_path / "cmp2.csv"
    assert run_cli("compare", *cfgs, "--out", str(out2)) == 0
    assert not (tmp_path / "cmp2.svg").exists()


def test_rates_synthetic_quadratic(tmp_path, capsys):
    trace = tmp_path / "synt.csv"
    lines = ["k,metric"]
    for k in range(1, 2001):
        lines.append(f"{k},{3.0 / k**2:.17g}")
    trace.write_text("\n".join(lines) + "\n")
    assert run_cli("rates", str(trace), "--metric", "metric",
                   "--window", "20:2000") == 0
    got = capsys.readouterr().out
    row = [l for l in got.splitlines() if str(trace) in l][0]
    slope = float(row.split(",")[2])
    assert slope == pytest.approx(-2.0, abs=0.01)


def test_rates_missing_metric(tmp_path):
    trace = tmp_path / "t.csv"
    trace.write_text("k,a\n1,1\n2,0.5\n")
    assert run_cli("rates", str(trace), "--metric", "nope",
                   "--window", "1:2") == 2


def test_rates_dual_gap_needs_qstar(tmp_path):
    trace = tmp_path / "t.csv"
    lines = ["k,dual_val"] + [f"{k},{-3 + 1.0 / k**2:.17g}" for k in range(1, 300)]
    trace.write_text("\n".join(lines) + "\n")
    assert run_cli("rates", str(trace), "--metric", "dual_gap",
                   "--window", "20:299") == 2
    assert run_cli("rates", str(trace), "--metric", "dual_gap",
                   "--window", "20:299", "--qstar", "-3") == 0


def test_config_round_trip(tmp_path):
    cfg = RunConfig(problem="boxqp-small", method="gfdpg", schedule="poly",
                    a=4.0, iters=250, step="backtrack", L0=0.125,
                    certs=True, seed=9).normalized()
    path = tmp_path / "roundtrip.cfg"
    path.write_text("\n".join(cfg.to_lines()) + "\n")
    again = RunConfig.from_file(path)
    assert again == cfg


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("problem = tv1d-toy\nwarp_factor = 9\n")
    with pytest.raises(Exception):
        RunConfig.from_file(path)


def test_y0_from_file(tmp_path):
    vec = tmp_path / "y0.txt"
    vec.write_text("-1.0\n")
    out = tmp_path / "trace.csv"
    assert run_cli("run", "--problem", "tv1d-toy", "--method", "dpg",
                   "--fixed-L", "2", "--iters", "2", "--certs", "--y0",
                   str(vec), "--out", str(out)) == 0
    rows = read_trace_csv(out)
    # started at the optimum: no movement at all
    assert float(rows[0]["step_norm"]) == 0.0


def test_seed_env_fallback(tmp_path, monkeypatch):
    out_env = tmp_path / "env.csv"
    out_flag = tmp_path / "flag.csv"
    monkeypatch.setenv("DUALPROX_SEED", "11")
    assert run_cli("run", "--problem", "boxqp-small", "--method", "dpg",
                   "--iters", "20", "--out", str(out_env)) == 0
    monkeypatch.delenv("DUALPROX_SEED")
    assert run_cli("run", "--problem", "boxqp-small", "--seed", "11",
                   "--method", "dpg", "--iters", "20",
                   "--out", str(out_flag)) == 0
    assert out_env.read_bytes() == out_flag.read_bytes()


def test_cli_entrypoint_runs(tmp_path):
    import subprocess
    import sys
    res = subprocess.run(
        [sys.executable, "-m", "dualprox.cli", "run", "--problem", "tv1d-toy",
         "--iters", "3", "--out", str(tmp_path / "t.csv")],
        capture_output=True, text=True)
    assert res.returncode == 0


def test_verify_low_precision_reference_notice(tmp_path, monkeypatch):
    import dataclasses
    import dualprox.cli as cli
    from dualprox.problems import reference_solve as real_reference_solve

    def degraded(problem, mode="enumerate", **kw):
        ref = real_reference_solve(problem, mode, **kw)
        return dataclasses.replace(ref, low_precision=True, residual=1e-7)

    monkeypatch.setattr(cli, "reference_solve", degraded)
    out = tmp_path / "lowprec.csv"
    code = run_cli("verify", "--problem", "boxqp-tiny", "--seed", "42",
                   "--method", "fdpg", "--iters", "50", "--ref", "enumerate",
                   "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].endswith(",notice")
    assert all(line.endswith("slack-widened-to-10x-residual")
               for line in lines[1:])


def test_run_abort_flushes_partial_trace(tmp_path, monkeypatch):
    import dualprox.cli as cli
    from dualprox.solvers import SolverAbort, run_solver
    from dualprox.problems import builtin_problem

    prob = builtin_problem("tv1d-toy")
    partial = run_solver(prob, "dpg", max_iters=2)

    def exploding(cfg, problem, cert_mode=None):
        raise SolverAbort("injected failure", partial)

    monkeypatch.setattr(cli, "_solve", exploding)
    out = tmp_path / "partial.csv"
    assert run_cli("run", "--problem", "tv1d-toy", "--iters", "9",
                   "--out", str(out)) == 3
    assert len(out.read_text().splitlines()) == 3  # header + 2 flushed rows
