import csv
import os

import numpy as np
import pytest

from afba import cli
from afba.dataio import to_libsvm
from afba.harness import (
    ConfigError,
    DataError,
    ExperimentConfig,
    iterations_to_accuracy,
    load_config,
    parse_number,
    parse_schedule,
    rate_report,
    run_compare,
    run_rates,
    run_table,
    schedule_id,
)
from afba.momentum import Variant, classic_nesterov, generalized_nesterov, no_momentum
from afba.problems import synthetic_classification
from afba.solver import SolveConfig, solve


def test_iterations_to_accuracy_examples():
    assert iterations_to_accuracy([0.5, 0.9, 0.95], [0.9, 0.99]) == [2, "-"]
    assert iterations_to_accuracy([1.0, 1.0, 1.0], [0.5, 0.8, 1.0]) == [1, 1, 1]
    assert iterations_to_accuracy([0.1, 0.85], [0.8], k=[10, 20]) == [20]


@pytest.mark.parametrize("text, value", [("3.01", 3.01), ("1/2.01", 1 / 2.01), ("2^-5", 2**-5)])
def test_parse_number(text, value):
    assert parse_number(text) == value


def test_parse_schedule_forms():
    assert parse_schedule("fba").variant is Variant.NO_MOMENTUM
    assert parse_schedule("fista").variant is Variant.CLASSIC_NESTEROV
    cd = parse_schedule("cd:3.01")
    assert cd.variant is Variant.CHAMBOLLE_DOSSAL and cd.alpha == 3.01
    gn = parse_schedule("gn:1,1/2.01,5")
    assert (gn.omega, gn.a, gn.b) == (1.0, 1 / 2.01, 5.0)
    for bad in ("foo", "cd:2", "gn:2,1", "gn:1"):
        with pytest.raises(ConfigError):
            parse_schedule(bad)


def test_schedule_id():
    assert schedule_id(1, "fista") == "01_fista"
    assert schedule_id(3, "cd:3.01") == "03_cd_3.01"


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(
        "[experiment]\nproblem = svm\nschedules = fba; fista; cd:3.01\n"
        "max_iters = 500\naccuracy_thresholds = 0.8, 0.85\n"
        "[svm]\ngamma = 2^-5\nlam = 2^-7\ndata_dir = somewhere\n"
    )
    cfg = load_config(p).validate()
    assert cfg.problem == "svm"
    assert cfg.schedules == ["fba", "fista", "cd:3.01"]
    assert cfg.max_iters == 500 and cfg.gamma == 2**-5
    assert cfg.accuracy_thresholds == [0.8, 0.85]


@pytest.mark.parametrize(
    "body",
    ["[x]\nbogus = 1\n", "[x]\nmax_iters = ten\n", "[x]\nschedules = nope\n",
     "[x]\naccuracy_thresholds = 1.5\n", "[x]\nproblem = svm\nf_ref = exact\n"],
)
def test_bad_configs(tmp_path, body):
    p = tmp_path / "c.ini"
    p.write_text(body)
    with pytest.raises(ConfigError):
        load_config(p).validate()


def quad_cfg(out, **kw):
    base = dict(problem="quadratic", n=8, seed=3, schedules=["fba"], max_iters=200,
                f_ref="exact", out_dir=str(out))
    base.update(kw)
    return ExperimentConfig(**base)


def test_compare_quadratic_monotone(tmp_path):
    out = run_compare(quad_cfg(tmp_path))
    with open(out["traces"]["01_fba"]) as fh:
        rows = list(csv.DictReader(fh))
    fv = np.array([float(r["fv"]) for r in rows])
    assert len(rows) == 200
    assert np.all(np.diff(fv) <= 0)
    assert rows[0]["epsilon"] != ""


def test_manifest_complete(tmp_path):
    out = run_compare(quad_cfg(tmp_path, schedules=["fba", "gn:0.5,1,1"]))
    keys = dict(line.split("=", 1) for line in open(out["manifest"]).read().splitlines())
    for key in ("lipschitz", "beta", "f_ref", "f_ref_policy", "seed", "max_iters",
                "package_version", "schedule.01_fba", "schedule.02_gn_0.5_1_1",
                "condition.02_gn_0.5_1_1"):
        assert key in keys
    assert float(keys["beta"]) == 1.0 / float(keys["lipschitz"])


def test_compare_deterministic(tmp_path):
    cfg_a = quad_cfg(tmp_path / "a", schedules=["fista", "cd:4"], f_ref="fista", f_ref_iters=500)
    cfg_b = quad_cfg(tmp_path / "b", schedules=["fista", "cd:4"], f_ref="fista", f_ref_iters=500)
    run_compare(cfg_a)
    run_compare(cfg_b)
    for name in sorted(os.listdir(tmp_path / "a")):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rate_report_lasso(lasso_ref):
    problem, x_ref, f_ref, _ = lasso_ref
    for sched in (generalized_nesterov(0.5, 1.0, 1.0), classic_nesterov()):
        _, trace = solve(problem, SolveConfig(sched, max_iters=20000), f_ref=f_ref, x_ref=x_ref)
        rep = rate_report(trace, sched)
        assert rep.fv_decay and rep.dci_decay
        assert rep.epsilon_monotone and rep.bound_holds
    _, trace = solve(problem, SolveConfig(no_momentum(), max_iters=100), f_ref=f_ref)
    rep = rate_report(trace, no_momentum())
    assert rep.scaled_fv_medians is None and rep.fv_decay is None
    assert not any("scaled" in line for line in rep.lines())


def test_run_rates_writes_reports(tmp_path):
    out = run_rates(quad_cfg(tmp_path, schedules=["gn:0.75,0.3,1"], max_iters=300))
    (path, rep), = out["reports"].values()
    text = open(path).read()
    assert "epsilon_monotone=pass" in text
    assert "condition.item_ii=holds" in text


def test_svm_missing_data(tmp_path):
    cfg = ExperimentConfig(problem="svm", data_dir=str(tmp_path), out_dir=str(tmp_path / "o"))
    with pytest.raises(DataError):
        run_compare(cfg)


def test_table_requires_thresholds(tmp_path):
    with pytest.raises(ConfigError):
        run_table(quad_cfg(tmp_path))


@pytest.fixture(scope="module")
def synthetic_splice(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    (d / "splice").write_text(to_libsvm(synthetic_classification()))
    return d


@pytest.mark.slow
def test_synthetic_splice_ordering(synthetic_splice, tmp_path):
    cfg = ExperimentConfig(
        problem="svm", data_dir=str(synthetic_splice), out_dir=str(tmp_path),
        schedules=["fba", "fista", "cd:3.01", "gn:1,1/2.01,5"], max_iters=2000,
        accuracy_thresholds=[0.8],
    )
    out = run_table(cfg)
    with open(out["summary"]) as fh:
        rows = {r["schedule_id"]: r for r in csv.DictReader(fh)}
    base = rows.pop("01_fba")
    assert base["k_at_0.8"] != "-"
    for r in rows.values():
        assert int(r["k_at_0.8"]) < int(base["k_at_0.8"])
        assert float(r["final_nofv"]) <= 1e-2 * float(base["final_nofv"])
    manifest = open(out["manifest"]).read()
    assert "sha256.splice=" in manifest and "train_size=1000" in manifest


# command line


def test_cli_check_schedule(capsys):
    assert cli.main(["check-schedule", "gn:1,0.6,1"]) == 0
    out = capsys.readouterr().out
    assert "item_ii=fails" in out
    assert cli.main(["check-schedule", "gn:0.5,1,1", "--horizon", "1000"]) == 0
    assert "item_ii=holds" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    assert cli.main(["check-schedule", "foo"]) == 1
    with pytest.raises(SystemExit) as info:
        cli.main(["compare", "--max-iters", "x"])
    assert info.value.code == 1
    assert cli.main(["compare", "--config", str(tmp_path / "missing.ini")]) == 1
    cfg = tmp_path / "svm.ini"
    cfg.write_text(f"[e]\nproblem = svm\ndata_dir = {tmp_path}\nout_dir = {tmp_path / 'o'}\n")
    assert cli.main(["compare", "--config", str(cfg)]) == 2
    (tmp_path / "splice").write_text("+1 1:1\n-1 1:x\n")
    assert cli.main(["compare", "--config", str(cfg)]) == 2


def test_cli_numeric_failure(tmp_path):
    cfg = tmp_path / "q.ini"
    # the reference run is far too short, so F_ref overshoots the runs below it
    cfg.write_text(f"[e]\nproblem = lasso\nf_ref_iters = 1\nout_dir = {tmp_path / 'o'}\n")
    assert cli.main(["compare", "--config", str(cfg), "--max-iters", "500"]) == 3


def test_cli_solve_and_compare(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["compare", "--schedule", "fba", "--schedule", "gn:1,0.4,1",
                   "--out-dir", str(out), "--max-iters", "300", "--trace-every", "50"])
    assert rc == 0
    assert sorted(os.listdir(out)) == ["manifest.txt", "summary.csv", "trace_01_fba.csv",
                                       "trace_02_gn_1_0.4_1.csv"]
    rc = cli.main(["solve", "--schedule", "fista", "--out-dir", str(tmp_path / "s"),
                   "--max-iters", "50", "--seed", "4"])
    assert rc == 0
    assert "seed=4" in (tmp_path / "s" / "manifest.txt").read_text()


def test_cli_rates(tmp_path, capsys):
    cfg = tmp_path / "q.ini"
    cfg.write_text(f"[e]\nproblem = quadratic\nf_ref = exact\nschedules = gn:0.5,1,1\n"
                   f"max_iters = 400\nout_dir = {tmp_path / 'o'}\n")
    assert cli.main(["rates", "--config", str(cfg)]) == 0
    assert "epsilon_monotone=True" in capsys.readouterr().out
