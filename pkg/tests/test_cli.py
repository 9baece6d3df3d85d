import csv
import json

import pytest

from rkhs_cert.cli import ALL_TASKS, RunConfig, config_from_dict, main, run
from rkhs_cert.errors import ConfigError
from rkhs_cert.serialize import load_json


# --- config parsing ----------------------------------------------------------


def test_config_defaults_fill_in():
    cfg = config_from_dict({})
    assert cfg.kernel == "gaussian"
    assert cfg.tasks == ("witness",)
    assert cfg.precision_bits == 256
    assert cfg.jobs == 1


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown keys"):
        config_from_dict({"kernell": "gaussian"})
    with pytest.raises(ConfigError, match="unknown keys"):
        config_from_dict({"witness": {"doubling": 3}})
    with pytest.raises(ConfigError, match="unknown tasks"):
        config_from_dict({"tasks": ["witness", "bogus"]})
    with pytest.raises(ConfigError):
        config_from_dict({"tasks": []})
    with pytest.raises(ConfigError):
        config_from_dict({"c_grid": [1.0, -0.5]})
    with pytest.raises(ConfigError):
        config_from_dict({"precision_bits": 32})
    with pytest.raises(ConfigError):
        config_from_dict({"jobs": 0})
    with pytest.raises(ConfigError):
        config_from_dict("gaussian")


def test_config_echo_omits_jobs():
    cfg = config_from_dict({"jobs": 4, "c_grid": [1.0]})
    echoed = cfg.to_dict()
    assert "jobs" not in echoed
    assert echoed["c_grid"] == [1.0]


def test_run_config_covers_all_tasks():
    assert set(ALL_TASKS) == {"psd", "decay", "witness", "analytic", "interpolant"}


# --- full runs through main() --------------------------------------------------


def _run_report(tmp_path, name, argv_extra):
    out = tmp_path / name
    code = main(["run", "--out", str(out)] + argv_extra)
    return code, (load_json(out) if out.exists() else None)


def test_run_witness_end_to_end(tmp_path, capsys):
    code, report = _run_report(
        tmp_path,
        "r.json",
        ["--function", "constant:1.0", "--c-grid", "1,0.5", "--tasks", "witness"],
    )
    assert code == 0
    assert report["schema"] == "rkhs-cert/report/v1"
    assert report["task_errors"] == {}
    witness = report["results"]["witness"]
    assert len(witness["certificates"]) == 2
    assert witness["all_verified"] is True
    assert report["verdict_summary"].startswith("non-membership witnessed")
    assert "jobs" not in report["config"]
    assert capsys.readouterr().out.strip().endswith("negativity certificate")


def test_rerun_is_byte_identical(tmp_path):
    args = ["--function", "constant:1.0", "--c-grid", "1,0.5"]
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert main(["run", "--out", str(out1)] + args) == 0
    assert main(["run", "--out", str(out2)] + args) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_jobs_do_not_change_report_bytes(tmp_path):
    args = ["--function", "constant:1.0", "--c-grid", "1,0.5,0.25"]
    serial = tmp_path / "serial.json"
    parallel = tmp_path / "parallel.json"
    assert main(["run", "--out", str(serial), "--jobs", "1"] + args) == 0
    assert main(["run", "--out", str(parallel), "--jobs", "3"] + args) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_certificates_written_and_verifiable(tmp_path, capsys):
    certs = tmp_path / "certs"
    out = tmp_path / "r.json"
    code = main(
        [
            "run",
            "--out",
            str(out),
            "--certs-dir",
            str(certs),
            "--function",
            "constant:1.0",
            "--c-grid",
            "1,0.5",
        ]
    )
    assert code == 0
    files = sorted(certs.glob("certificate_*.json"))
    assert len(files) == 2
    for path in files:
        assert main(["verify", str(path)]) == 0
    assert "certificate verified" in capsys.readouterr().out


def test_verify_detects_tampering(tmp_path, capsys):
    certs = tmp_path / "certs"
    out = tmp_path / "r.json"
    main(
        [
            "run",
            "--out",
            str(out),
            "--certs-dir",
            str(certs),
            "--function",
            "constant:1.0",
            "--c-grid",
            "1",
        ]
    )
    path = certs / "certificate_00.json"
    data = json.loads(path.read_text())
    data["n_points"] = 2
    data["points"] = data["points"][:2]
    path.write_text(json.dumps(data))
    assert main(["verify", str(path)]) == 2
    assert "FAILED" in capsys.readouterr().err


def test_verify_missing_file_is_config_error(tmp_path):
    assert main(["verify", str(tmp_path / "nope.json")]) == 1


def test_multi_task_run(tmp_path):
    code, report = _run_report(
        tmp_path,
        "multi.json",
        [
            "--function",
            "paper_example",
            "--c-grid",
            "1,0.5",
            "--tasks",
            "psd,decay,witness,analytic,interpolant",
        ],
    )
    assert code == 0
    assert set(report["results"]) == {"psd", "decay", "witness", "analytic", "interpolant"}
    assert report["task_errors"] == {}
    labels = [entry["label"] for entry in report["results"]["psd"]]
    assert labels == ["gram", "schur_control:x0=0.0"]
    assert all(entry["is_psd"] for entry in report["results"]["psd"])
    assert report["results"]["decay"]["passed"] is True
    assert report["results"]["decay"]["evidence"] == "proved"


def test_task_error_sets_exit_2_but_writes_report(tmp_path, capsys):
    code, report = _run_report(
        tmp_path,
        "err.json",
        ["--kernel", "laplace", "--tasks", "analytic"],
    )
    assert code == 2
    assert "analytic" in report["task_errors"]
    assert report["verdict_summary"] == "diagnostics only: no witness task requested"
    assert "errored" in capsys.readouterr().err


def test_unknown_kernel_exits_1(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", "--out", str(out), "--kernel", "sombrero"]) == 1
    assert "config error" in capsys.readouterr().err
    assert not out.exists()


def test_malformed_c_grid_exits_1(tmp_path):
    assert main(["run", "--out", str(tmp_path / "r.json"), "--c-grid", "1,abc"]) == 1


def test_unwritable_output_exits_1(tmp_path, capsys):
    out = tmp_path / "no_such_dir" / "r.json"
    code = main(
        ["run", "--out", str(out), "--function", "constant:1.0", "--c-grid", "1"]
    )
    assert code == 1
    assert "cannot write" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(
        json.dumps(
            {
                "kernel": "inverse_quadratic",
                "function": "constant:1.0",
                "tasks": ["witness"],
                "c_grid": [0.5],
            }
        )
    )
    out = tmp_path / "r.json"
    code = main(["run", "--config", str(config), "--out", str(out), "--c-grid", "1"])
    assert code == 0
    report = load_json(out)
    assert report["config"]["kernel"] == "inverse_quadratic"
    assert report["config"]["c_grid"] == [1.0]


def test_config_file_invalid_json(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text("{not json")
    assert main(["run", "--config", str(config), "--out", str(tmp_path / "r.json")]) == 1


# --- single-purpose subcommands --------------------------------------------------


def test_witness_subcommand_prints_certificate(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code = main(
        [
            "witness",
            "--kernel",
            "gaussian",
            "--function",
            "constant:1.0",
            "--c",
            "1.0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    captured = capsys.readouterr().out
    assert "witness found: N=3 ell=0" in captured
    assert out.exists()
    assert main(["verify", str(out)]) == 0


def test_witness_subcommand_member_control(capsys):
    code = main(
        [
            "witness",
            "--kernel",
            "gaussian",
            "--function",
            "kernel_section:0.0",
            "--alpha",
            "1.0",
            "--c",
            "1.0",
        ]
    )
    assert code == 2
    assert "no witness" in capsys.readouterr().err


def test_witness_subcommand_rejects_bad_scale():
    assert main(["witness", "--kernel", "gaussian", "--function", "constant:1.0", "--c", "-1"]) == 1


def test_decay_check_subcommand(capsys):
    assert main(["decay-check", "--kernel", "gaussian", "--threshold", "1e-8"]) == 0
    assert "decay check passed (evidence: proved)" in capsys.readouterr().out
    assert main(["decay-check", "--kernel", "exp_product"]) == 0
    assert "failed: divergent" in capsys.readouterr().out


def test_psd_check_subcommand(capsys):
    assert main(["psd-check", "--kernel", "inverse_quadratic", "--num-points", "6"]) == 0
    out = capsys.readouterr().out
    assert "gram=PSD" in out
    assert "schur_control:x0=0.0=PSD" in out


def test_derivatives_subcommand(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert main(["derivatives", "--kernel", "gaussian", "--n-max", "4", "--out", str(out)]) == 0
    assert "envelope dominates" in capsys.readouterr().out
    report = load_json(out)
    assert report["results"]["analytic"]["dnn_values"] == ["1", "2", "12", "120", "1680"]
    assert main(["derivatives", "--kernel", "laplace"]) == 2


def test_interp_norm_subcommand(capsys):
    code = main(
        [
            "interp-norm",
            "--kernel",
            "gaussian",
            "--function",
            "paper_example",
            "--points",
            "1,3,6",
            "--steps",
            "3",
        ]
    )
    assert code == 0
    assert "interpolant norms over 4 nested sets" in capsys.readouterr().out


def test_run_api_returns_report_and_code():
    cfg = RunConfig(function="constant:1.0", c_grid=(1.0,), tasks=("witness",))
    report, code = run(cfg)
    assert code == 0
    assert report["results"]["witness"]["all_verified"] is True


# --- declared domains ----------------------------------------------------------


def test_domain_config_validation():
    with pytest.raises(ConfigError, match="unknown domain kind"):
        config_from_dict({"domain": {"kind": "half_line"}})
    with pytest.raises(ConfigError, match="needs endpoints"):
        config_from_dict({"domain": {"kind": "interval"}})
    with pytest.raises(ConfigError, match="strictly increasing"):
        config_from_dict({"domain": {"kind": "interval", "endpoints": [2.0, 1.0]}})
    with pytest.raises(ConfigError, match="two finite"):
        config_from_dict({"domain": {"kind": "interval", "endpoints": [1.0]}})
    with pytest.raises(ConfigError, match="points only apply"):
        config_from_dict(
            {"domain": {"kind": "interval", "endpoints": [0.0, 1.0], "points": [2.0]}}
        )
    with pytest.raises(ConfigError, match="endpoints only apply"):
        config_from_dict({"domain": {"kind": "full_line", "endpoints": [0.0, 1.0]}})
    with pytest.raises(ConfigError, match="needs a list"):
        config_from_dict({"domain": {"kind": "finite_set"}})
    with pytest.raises(ConfigError, match="distinct"):
        config_from_dict({"domain": {"kind": "finite_set", "points": [1.0, 1.0]}})
    with pytest.raises(ConfigError, match="nonempty"):
        config_from_dict({"domain": {"kind": "finite_set", "points": []}})
    with pytest.raises(ConfigError, match="no accumulation point"):
        config_from_dict(
            {"domain": {"kind": "finite_set", "points": [1.0], "has_accumulation_point": True}}
        )
    with pytest.raises(ConfigError, match="always has accumulation points"):
        config_from_dict({"domain": {"kind": "full_line", "has_accumulation_point": False}})
    with pytest.raises(ConfigError, match="must be a boolean"):
        config_from_dict({"domain": {"kind": "full_line", "has_accumulation_point": "yes"}})


def test_domain_defaults_and_echo():
    cfg = config_from_dict({})
    assert cfg.domain_kind == "full_line"
    assert cfg.has_accumulation_point is True
    assert cfg.to_dict()["domain"] == {
        "kind": "full_line",
        "endpoints": None,
        "points": None,
        "has_accumulation_point": True,
    }
    cfg = config_from_dict({"domain": {"kind": "finite_set", "points": [1.0, 3.0]}})
    assert cfg.has_accumulation_point is False
    cfg = config_from_dict({"domain": {"kind": "interval", "endpoints": [-1, 1]}})
    assert cfg.domain_endpoints == (-1.0, 1.0)
    assert cfg.to_dict()["domain"]["endpoints"] == [-1.0, 1.0]


def test_domain_transfer_note_on_witness_results():
    base = {"function": "constant:1.0", "c_grid": [1.0]}
    report, code = run(config_from_dict(dict(base)))
    assert code == 0
    note = report["results"]["witness"]["domain_transfer"]
    assert note.startswith("certificates apply directly")

    interval = dict(base, domain={"kind": "interval", "endpoints": [0.0, 5.0]})
    report, code = run(config_from_dict(interval))
    assert code == 0
    note = report["results"]["witness"]["domain_transfer"]
    assert note.startswith("restriction remark:")
    assert "accumulation point" in note

    finite = dict(base, domain={"kind": "finite_set", "points": [1.0, 3.0, 6.0]})
    report, code = run(config_from_dict(finite))
    assert code == 0
    note = report["results"]["witness"]["domain_transfer"]
    assert note.startswith("restriction remark withheld")


# --- fixed task order ------------------------------------------------------------


def test_tasks_execute_in_fixed_order():
    cfg = config_from_dict(
        {"function": "constant:1.0", "tasks": ["analytic", "decay", "psd"]}
    )
    report, code = run(cfg)
    assert code == 0
    assert list(report["results"]) == ["psd", "decay", "analytic"]
    # the echo still reflects the order the user wrote
    assert report["config"]["tasks"] == ["analytic", "decay", "psd"]


def test_duplicate_tasks_rejected():
    with pytest.raises(ConfigError, match="must not repeat"):
        config_from_dict({"tasks": ["psd", "psd"]})


# --- verdict vocabulary -----------------------------------------------------------


def test_member_control_run_reports_positive_control(tmp_path, capsys):
    out = tmp_path / "member.json"
    code = main(
        [
            "run",
            "--function",
            "kernel_section:0.0",
            "--c-grid",
            "1",
            "--alpha",
            "1.0",
            "--out",
            str(out),
        ]
    )
    # a completed sweep with recorded failures is not a task error
    assert code == 0
    assert "positive-control passed" in capsys.readouterr().out
    report = load_json(out)
    assert report["task_errors"] == {}
    assert report["verdict_summary"].startswith("positive-control passed")
    witness = report["results"]["witness"]
    assert witness["certificates"] == []
    assert witness["failures"][0]["reason"].startswith("doubling-cap-exhausted")
    assert witness["alpha_provenance"] == "declared"


def test_starved_window_reports_inconclusive():
    # alpha declared far above the true tail keeps every window below the
    # size where the all-ones form could turn negative
    cfg = config_from_dict(
        {
            "function": "constant:1.0",
            "c_grid": [2.0 ** -8],
            "witness": {"alpha": 100.0},
        }
    )
    report, code = run(cfg)
    assert code == 0
    assert report["verdict_summary"].startswith("inconclusive")
    assert report["results"]["witness"]["failures"][0]["reason"].startswith(
        "doubling-cap-exhausted"
    )


def test_config_witness_alpha_validation():
    with pytest.raises(ConfigError, match="alpha must be positive"):
        config_from_dict({"witness": {"alpha": -2.0}})


# --- csv tables --------------------------------------------------------------------


def test_csv_tables_written_and_deterministic(tmp_path, capsys):
    args = [
        "run",
        "--function",
        "constant:1.0",
        "--c-grid",
        "1,0.5",
        "--tasks",
        "witness,decay,psd",
    ]
    csv1 = tmp_path / "tables1"
    out1 = tmp_path / "r1.json"
    assert main(args + ["--out", str(out1), "--csv-dir", str(csv1)]) == 0
    assert "wrote 3 csv table(s)" in capsys.readouterr().out
    assert sorted(p.name for p in csv1.iterdir()) == ["decay.csv", "psd.csv", "witness.csv"]

    rows = list(csv.reader((csv1 / "witness.csv").open()))
    assert rows[0] == ["c", "status", "n_points", "ell", "r_value", "verified", "detail"]
    report = load_json(out1)
    witness = report["results"]["witness"]
    assert [r[0] for r in rows[1:]] == witness["c_values"]
    for row in rows[1:]:
        assert row[1] == "certificate"
        assert row[5] == "true"
        assert row[6] == ""
    assert rows[1][2] == "3"  # N at c=1
    assert rows[1][4] == witness["certificates"][0]["r_value"]

    decay_rows = list(csv.reader((csv1 / "decay.csv").open()))
    assert decay_rows[0] == ["ell", "max_offdiag"]
    assert len(decay_rows) == len(report["results"]["decay"]["ell_values"]) + 1

    psd_rows = list(csv.reader((csv1 / "psd.csv").open()))
    assert psd_rows[0] == ["label", "is_psd", "min_pivot_or_eigenvalue", "tolerance_used"]
    assert [r[0] for r in psd_rows[1:]] == ["gram", "schur_control:x0=0.0"]
    assert all(r[1] == "true" for r in psd_rows[1:])

    csv2 = tmp_path / "tables2"
    out2 = tmp_path / "r2.json"
    assert main(args + ["--out", str(out2), "--csv-dir", str(csv2)]) == 0
    for name in ("witness.csv", "decay.csv", "psd.csv"):
        assert (csv1 / name).read_bytes() == (csv2 / name).read_bytes()


def test_csv_failure_rows_and_diagnostic_tables(tmp_path):
    tables = tmp_path / "tables"
    out = tmp_path / "r.json"
    code = main(
        [
            "run",
            "--function",
            "kernel_section:0.0",
            "--c-grid",
            "1",
            "--alpha",
            "1.0",
            "--tasks",
            "witness,analytic,interpolant",
            "--out",
            str(out),
            "--csv-dir",
            str(tables),
        ]
    )
    assert code == 0
    rows = list(csv.reader((tables / "witness.csv").open()))
    assert len(rows) == 2
    assert rows[1][1] == "failure"
    assert rows[1][2] == ""  # no window size for a failed scale
    assert rows[1][6].startswith("doubling-cap-exhausted")

    report = load_json(out)
    analytic_rows = list(csv.reader((tables / "analytic.csv").open()))
    assert analytic_rows[0] == ["order", "dnn_value", "exact_bound", "bound_curve", "fd_value"]
    assert len(analytic_rows) == len(report["results"]["analytic"]["orders"]) + 1
    assert analytic_rows[1][0] == "0" and analytic_rows[1][4] == ""  # no stencil at order 0
    assert analytic_rows[2][4] != "" and analytic_rows[3][4] != ""  # orders 1 and 2
    assert analytic_rows[4][4] == ""

    interp_rows = list(csv.reader((tables / "interpolant.csv").open()))
    assert interp_rows[0] == ["step", "num_points", "norm", "precision_bits"]
    assert len(interp_rows) == len(report["results"]["interpolant"]["norms"]) + 1
    assert [r[0] for r in interp_rows[1:]] == [str(i) for i in range(len(interp_rows) - 1)]


def test_csv_dir_unwritable(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    out = tmp_path / "r.json"
    code = main(
        [
            "run",
            "--function",
            "constant:1.0",
            "--c-grid",
            "1",
            "--out",
            str(out),
            "--csv-dir",
            str(blocker),
        ]
    )
    assert code == 1
