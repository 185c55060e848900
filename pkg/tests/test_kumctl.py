import json

import pytest

from kummer.bundle import load, load_manifest
from kummer.kumctl import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    lines = [json.loads(x) for x in out.splitlines() if x.strip()]
    return code, lines


def test_basis_families(tmp_path, capsys):
    for fam, g, count in [("pT", 3, 15), ("quadrics", 2, 10), ("lifted", 2, 5)]:
        out = tmp_path / f"{fam}.json"
        code, [obj] = run(capsys, "basis", "--genus", str(g), "--family", fam, "--out", str(out))
        assert code == 0 and obj["count"] == count
        assert load(out).content_hash == obj["content_hash"]
    assert load(tmp_path / "lifted.json").provenance["family"] == "lifted"


def test_kernel_and_lift_pipeline(tmp_path, capsys):
    k = tmp_path / "k2.json"
    code, [obj] = run(capsys, "kernel", "--genus", "2", "--degree", "4", "--out", str(k))
    assert code == 0 and obj["dimension"] == 1 and obj["verified"]
    assert load_manifest(k)["verified"]
    for kind, check in [("kummer", lambda o: o["bidegree"] == [12, 4]),
                        ("nonheis", lambda o: o["genus"] == 3 and o["nvars"] == 16),
                        ("moduli", lambda o: o["degree"] == 16),
                        ("schottky", lambda o: o["characteristics"] == 36)]:
        code, [o] = run(capsys, "lift", "--in", str(k), "--kind", kind, "--out", str(tmp_path / f"{kind}.json"))
        assert code == 0 and check(o), (kind, o)


def test_lift_refuses_unverified_kernel(tmp_path, capsys):
    k = tmp_path / "mod.json"
    code, [obj] = run(capsys, "kernel", "--genus", "2", "--degree", "4", "--strategy", "modular_only",
                      "--out", str(k))
    assert code == 0 and not obj["verified"]
    code, [err] = run(capsys, "lift", "--in", str(k), "--kind", "kummer", "--out", str(tmp_path / "f.json"))
    assert code == 2 and err["error"] == "UsageError"


def test_thread_count_does_not_change_bytes(tmp_path, capsys):
    paths = []
    for t in (1, 3):
        p = tmp_path / f"k3_{t}.json"
        assert run(capsys, "kernel", "--genus", "3", "--degree", "4", "--strategy", "modular_only",
                   "--threads", str(t), "--out", str(p))[0] == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_budget_exceeded_exit_code(tmp_path, capsys):
    code, [err] = run(capsys, "kernel", "--genus", "3", "--degree", "6", "--out", str(tmp_path / "x.json"))
    assert code == 3 and err["error"] == "BudgetExceeded" and err["estimate"]["columns"] > 0
    code, _ = run(capsys, "kernel", "--genus", "4", "--degree", "4", "--strategy", "modular_reconstruct",
                  "--out", str(tmp_path / "y.json"))
    assert code == 3
    assert not (tmp_path / "x.json").exists()


def test_data_errors_exit_two(tmp_path, capsys):
    code, _ = run(capsys, "basis", "--genus", "7", "--family", "pT", "--out", str(tmp_path / "b.json"))
    assert code == 2
    code, _ = run(capsys, "basis", "--genus", "2", "--family", "pT", "--out", str(tmp_path / "no" / "b.json"))
    assert code == 2


def test_immutable_output(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert run(capsys, "basis", "--genus", "2", "--family", "pT", "--out", str(out))[0] == 0
    assert run(capsys, "basis", "--genus", "2", "--family", "pT", "--out", str(out))[0] == 0
    assert run(capsys, "basis", "--genus", "3", "--family", "pT", "--out", str(out))[0] == 2


def test_usage_error_from_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["kernel", "--genus", "2"])
    assert exc.value.code == 2


def test_verify_symbolic_and_numeric(tmp_path, capsys):
    out = tmp_path / "report.jsonl"
    code, lines = run(capsys, "verify", "--suite", "symbolic", "--genus", "2", "--out", str(out))
    assert code == 0 and lines and all(x["pass"] for x in lines)
    assert out.read_text().count("\n") == len(lines)
    code, lines = run(capsys, "verify", "--suite", "numeric", "--genus", "2", "--trials", "2")
    assert code == 0 and all(x["pass"] for x in lines)
    assert {x["check"] for x in lines} >= {"degree-2 identity", "F_R vanishing", "lift identity"}


def test_verify_fails_with_impossible_tolerance(capsys):
    code, lines = run(capsys, "verify", "--suite", "numeric", "--genus", "1", "--trials", "1", "--tol", "1e-300")
    assert code == 1 and not all(x["pass"] for x in lines)


def test_bench_tasks(capsys):
    code, [o] = run(capsys, "bench", "--task", "matrix_build", "--genus", "4")
    assert code == 0 and o["columns"] == 316251 and o["blocks"] == 1024
    code, [o] = run(capsys, "bench", "--task", "kernel", "--genus", "2")
    assert code == 0 and o["dimension"] == 1
    code, [o] = run(capsys, "bench", "--task", "theta", "--genus", "2", "--precision", "106")
    assert code == 0 and o["constants"] == 16
