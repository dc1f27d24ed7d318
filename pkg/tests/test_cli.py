import csv
import io
import json

from pcsm.brute import brute_optimum
from pcsm.cli import (
    EXIT_BAD_INPUT,
    EXIT_BUDGET,
    EXIT_INFEASIBLE,
    EXIT_OK,
    bench,
    generate_instance,
    instance_digest,
    main,
    write_reports_csv,
)
from pcsm.core import instance_to_json_obj


def test_gen_deterministic():
    a = generate_instance(n=7, p=2, c=1, family="coverage", seed=5)
    b = generate_instance(n=7, p=2, c=1, family="coverage", seed=5)
    assert (json.dumps(instance_to_json_obj(a), sort_keys=True)
            == json.dumps(instance_to_json_obj(b), sort_keys=True))
    c = generate_instance(n=7, p=2, c=1, family="coverage", seed=6)
    assert instance_digest(a) != instance_digest(c)


def test_gen_planted_feasible():
    for seed in range(10):
        inst = generate_instance(n=9, p=1, c=2, family="linear", seed=seed)
        assert brute_optimum(inst).feasible_count >= 1


def test_gen_empty_instance():
    inst = generate_instance(n=0, p=1, c=1, seed=0)
    assert inst.n == 0
    assert brute_optimum(inst).feasible_count in (0, 1)


def test_gen_rational_mode():
    inst = generate_instance(n=5, p=1, c=1, seed=3, integer=False)
    assert not inst.is_integer()
    assert brute_optimum(inst).feasible_count >= 1


def test_cli_round_trip(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert main(["gen", "--n", "6", "--p", "1", "--c", "1", "--seed", "3",
                 "--out", str(path), "--quiet"]) == EXIT_OK
    assert main(["brute", "--instance", str(path), "--quiet"]) == EXIT_OK
    assert main(["dp", "--instance", str(path), "--quiet"]) == EXIT_OK
    assert main(["forbidden", "--instance", str(path), "--epsilon", "1/4",
                 "--quiet"]) == EXIT_OK
    assert main(["forbidden", "--instance", str(path), "--poly",
                 "--epsilon", "1/2", "--quiet"]) == EXIT_OK
    capsys.readouterr()


def test_cli_gen_outputs_identical_bytes(tmp_path, capsys):
    args = ["gen", "--n", "5", "--p", "1", "--c", "1", "--seed", "11", "--json"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second


def test_cli_infeasible_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "n": 2, "packing": [[1, 1]], "covering": [[1, 1]],
        "pack_bound": [2], "cover_bound": [99],
        "objective": {"kind": "linear", "weights": [1, 1]},
    }))
    assert main(["brute", "--instance", str(path), "--quiet"]) == EXIT_INFEASIBLE
    assert main(["dp", "--instance", str(path), "--quiet"]) == EXIT_INFEASIBLE
    capsys.readouterr()


def test_cli_budget_exit_code(tmp_path, capsys):
    n = 24
    path = tmp_path / "huge.json"
    path.write_text(json.dumps({
        "n": n,
        "packing": [[10000] * n, [10000] * n],
        "covering": [[10000] * n, [10000] * n],
        "pack_bound": [100000, 100000], "cover_bound": [100000, 100000],
        "objective": {"kind": "linear", "weights": [1] * n},
    }))
    assert main(["dp", "--instance", str(path), "--exact-keys",
                 "--quiet"]) == EXIT_BUDGET
    capsys.readouterr()


def test_cli_bad_input_exit_code(capsys):
    assert main(["brute", "--instance", "/nonexistent/x.json",
                 "--quiet"]) == EXIT_BAD_INPUT
    capsys.readouterr()


def test_cli_lp_csv(tmp_path, capsys):
    out = tmp_path / "lp.csv"
    assert main(["lp", "--variant", "lpf", "--m", "2", "5",
                 "--csv", str(out), "--quiet"]) == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["m", "optimum"]
    assert abs(float(rows[1][1]) - 0.25) < 1e-6
    assert abs(float(rows[2][1]) - 0.31727598) < 1e-6
    capsys.readouterr()


def test_cli_lp_verify_analytic(capsys):
    assert main(["lp", "--variant", "lp", "--m", "3", "--verify-analytic",
                 "--json"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["analytic"][0]["primal_feasible"]
    assert out["analytic"][0]["dual_value_matches"]


def test_cli_kmedian(tmp_path, capsys):
    path = tmp_path / "km.json"
    path.write_text(json.dumps({
        "facilities": [{"cap": 2}, {"cap": 2}], "clients": 3,
        "dist_a_pairs": [[0, 0], [1, 0], [2, 1]], "a": 1, "b": 3, "k": 2,
    }))
    assert main(["kmedian", "--instance", str(path), "--json"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["found"] and out["matched"] == 3


def test_cli_continuous(tmp_path, capsys):
    path = tmp_path / "inst.json"
    main(["gen", "--n", "5", "--p", "1", "--c", "1", "--seed", "4",
          "--out", str(path), "--quiet"])
    code = main(["continuous", "--instance", str(path), "--epsilon", "1/10",
                 "--relaxed", "--delta", "1/5", "--trials", "3", "--steps", "4",
                 "--budget", "600", "--samples", "5", "--json"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["found"]
    assert float(out["pack_ratio"]) <= 1.0


def test_bench_empty_suite():
    stream = io.StringIO()
    write_reports_csv(bench([], ["dp"]), stream)
    rows = list(csv.reader(io.StringIO(stream.getvalue())))
    assert len(rows) == 1
    assert rows[0][0] == "instance_digest"


def test_bench_dp_vs_forbidden_ratios():
    suite = [{"gen": {"n": 7, "p": 1, "c": 1, "seed": s}} for s in range(6)]
    reports = bench(suite, ["dp", "forbidden"])
    assert len(reports) == 12
    for r in reports:
        assert not r.error
        if r.ratio is not None:
            assert float(r.ratio) >= 0.25


def test_bench_lp_rows_match_table():
    suite = [{"lp": {"variant": "lpf", "m": m}} for m in (2, 5, 10, 50)]
    reports = bench(suite, [])
    want = {2: 0.25, 5: 0.31727598, 10: 0.33592079, 50: 0.34990649}
    for r in reports:
        m = int(r.instance_digest.split("=")[1])
        assert abs(r.value - want[m]) < 1e-6


def test_bench_records_failures():
    # covering bound no subset reaches: solver reports, bench keeps going
    suite = [{"gen": {"n": 4, "p": 1, "c": 1, "seed": 1}}]
    reports = bench(suite, ["brute", "nonsense"])
    assert reports[0].error == ""
    assert reports[1].error != ""


def test_cli_bench_end_to_end(tmp_path, capsys):
    suite_path = tmp_path / "suite.json"
    out_path = tmp_path / "report.csv"
    suite_path.write_text(json.dumps(
        [{"gen": {"n": 6, "p": 1, "c": 1, "seed": 2}},
         {"lp": {"variant": "lpf", "m": 2}}]))
    assert main(["bench", "--suite", str(suite_path),
                 "--solvers", "dp,forbidden", "--out", str(out_path),
                 "--quiet"]) == EXIT_OK
    rows = list(csv.reader(out_path.open()))
    assert rows[0][0] == "instance_digest"
    assert len(rows) == 4          # 2 solvers on the instance + 1 lp row
    capsys.readouterr()


def test_csv_float_formatting():
    suite = [{"lp": {"variant": "lp", "m": 2}}]
    stream = io.StringIO()
    write_reports_csv(bench(suite, []), stream)
    rows = list(csv.reader(io.StringIO(stream.getvalue())))
    assert rows[1][2] == "0.25"
