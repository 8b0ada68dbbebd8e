import re

import pytest

from element_fogran import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_ndt_examples(capsys):
    assert run(capsys, "ndt", "--k", "8", "--d", "2") == (
        0, "ndt=5/2 bound=3 benchmark=3/2 ratio=2\n"
    )
    assert run(capsys, "ndt", "--k", "11", "--d", "4") == (
        0, "ndt=3 bound=5 benchmark=5/2 ratio=2\n"
    )
    assert run(capsys, "ndt", "--k", "5", "--d", "1")[1] == (
        "ndt=1 bound=1 benchmark=1 ratio=-\n"
    )


def test_compare_tie(capsys):
    code, out = run(capsys, "compare", "--d", "4", "--mu", "1/8", "--r", "1/10")
    assert code == 0
    assert out == "delta_ach=10 delta_full=10 r1=1/10 r2=- best=Tie\n"


def test_compare_rejects_float(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["compare", "--d", "4", "--mu", "0.125", "--r", "1"])
    assert e.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["ndt", "--k", "3", "--d", "5"],
        ["schedule", "--k", "3", "--d", "3"],
        ["compare", "--d", "4", "--mu", "3/2", "--r", "1"],
    ],
)
def test_domain_errors_exit_2(capsys, argv):
    assert cli.main(argv) == 2
    assert capsys.readouterr().err.startswith("error: ")


def test_schedule_then_validate(capsys, tmp_path):
    path = tmp_path / "sched.txt"
    assert cli.main(["schedule", "--k", "8", "--d", "2", "--out", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 16
    code, out = run(capsys, "validate", "--k", "8", "--d", "2", "--schedule", str(path))
    assert code == 0
    assert out == "ndt=5/2 dof=16/5 slots=5 deliveries=16\n"


def test_validate_flags_incomplete_dump(capsys, tmp_path):
    path = tmp_path / "sched.txt"
    cli.main(["schedule", "--k", "8", "--d", "2", "--out", str(path)])
    lines = path.read_text().splitlines()
    path.write_text("\n".join(line for line in lines if not line.startswith("slot=5")))
    code, out = run(capsys, "validate", "--k", "8", "--d", "2", "--schedule", str(path))
    assert code == 1
    assert "missing ue=2 types=2" in out
    assert "missing ue=8 types=1" in out


def test_validate_flags_collision(capsys, tmp_path):
    path = tmp_path / "sched.txt"
    path.write_text(
        "slot=1 stage=1 phase=1 en=1 ue=1 file=1 type=1\n"
        "slot=1 stage=1 phase=1 en=8 ue=8 file=8 type=1\n"
    )
    code, out = run(capsys, "validate", "--k", "8", "--d", "2", "--schedule", str(path))
    assert code == 1
    assert "violation kind=collision slot=1 ue=1 ens=8" in out


def test_schedule_stdout(capsys):
    code, out = run(capsys, "schedule", "--k", "11", "--d", "4")
    assert code == 0
    assert len(out.splitlines()) == 44


def test_simulate(capsys):
    code, out = run(
        capsys, "simulate", "--k", "8", "--d", "2", "--seed", "7", "--random-demands", "5"
    )
    assert code == 0
    assert out == "ndt=5/2 dof=16/5 slots=5 deliveries=16\n"


def test_sweep_stdout_and_file(capsys, tmp_path):
    code, out = run(capsys, "sweep", "--d", "4", "--mu-grid", "0:1/2:1/4", "--r-grid", "1/10:1/5:1/10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "mu,r,d,delta_ach,delta_full,best"
    assert len(lines) == 7
    assert "1/4,1/5,4,5,5,Tie" in lines

    path = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--d", "4", "--mu-grid", "0:1/2:1/4", "--r-grid", "1:1:1", "--out", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "mu,r,d,delta_ach,delta_full,best"


def test_oracle(capsys):
    code, out = run(capsys, "oracle", "--k", "5", "--d", "2")
    assert code == 0
    match = re.fullmatch(r"oracle k=5 d=2 min_slots=(\d+) heuristic_slots=5\n", out)
    assert match and int(match.group(1)) <= 5


def test_oracle_budget_exceeded(capsys):
    code, out = run(capsys, "oracle", "--k", "8", "--d", "2", "--budget", "2")
    assert code == 0
    assert out == "oracle k=8 d=2 min_slots=>2 heuristic_slots=5\n"


def test_log_level_action():
    args = cli.build_parser().parse_args(["-v", "--debug", "ndt", "--k", "8", "--d", "2"])
    assert args.log_level == 10
    args = cli.build_parser().parse_args(["--debug", "-v", "ndt", "--k", "8", "--d", "2"])
    assert args.log_level == 10


def test_validate_flags_relabelled_types(capsys, tmp_path):
    path = tmp_path / "sched.txt"
    path.write_text(
        "".join(
            f"slot={3 * (tau - 1) + j} stage=1 phase=1 en={j} ue={j} file={j} type={tau}\n"
            for tau in (1, 2)
            for j in (1, 2, 3)
        )
    )
    code, out = run(capsys, "validate", "--k", "3", "--d", "2", "--schedule", str(path))
    assert code == 1
    assert "violation kind=type-mismatch slot=4 ue=1 ens=1" in out


def test_validate_reports_out_of_range_user(capsys, tmp_path):
    path = tmp_path / "sched.txt"
    path.write_text("slot=1 stage=1 phase=1 en=1 ue=9 file=1 type=1\n")
    code, out = run(capsys, "validate", "--k", "8", "--d", "2", "--schedule", str(path))
    assert code == 1
    assert out == "violation kind=out-of-range slot=1 ue=9 ens=1\n"


def test_oracle_unschedulable_network(capsys):
    code, out = run(capsys, "oracle", "--k", "2", "--d", "2")
    assert code == 0
    assert re.fullmatch(r"oracle k=2 d=2 min_slots=\d+ heuristic_slots=-\n", out)
