import csv
import io
import json

import pytest

from permsum.cli import main
from permsum.dist import ExactDistribution
from permsum.scan import CSV_COLUMNS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def js(values):
    return json.dumps({"values": [str(v) for v in values]})


def test_profile(capsys):
    code, out, _ = run(capsys, "profile", "--input-a", js([1, 0, 0, 0, 0, 0, 0]))
    obj = json.loads(out)
    assert code == 0 and obj["parts"] == [6, 1] and obj["M"] == "1"
    assert json.loads(run(capsys, "profile", "--input-a", js([5, 5]))[1])["M"] == "0"
    assert json.loads(run(capsys, "profile", "--input-a", js([1, 2, 3, 4]))[1])["M"] == "14"


def test_input_from_file(tmp_path, capsys):
    path = tmp_path / "a.json"
    path.write_text(js([3, "1/2", 0, 0]))
    code, out, _ = run(capsys, "profile", "--input-a", str(path))
    assert code == 0 and json.loads(out)["parts"] == [2, 1, 1]


@pytest.mark.parametrize("argv", [
    ["profile", "--input-a", '{"values": [1.5]}'],
    ["profile", "--input-a", '{"values": ["a"]}'],
    ["profile", "--input-a", "{broken"],
    ["profile", "--input-a", "/nonexistent/file.json"],
    ["profile"],
    ["q", "--input-a", js([1, 2]), "--input-b", js([1, 2, 3])],
    ["decompose", "--input-a", js([2, 2, 2])],
    ["energy", "--input-a", js([0, 1]), "--input-b", js([0, 1]), "--c", "1,x"],
    ["scan", "--n-range", "a..b"],
    ["nosuchcommand"],
])
def test_parse_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_parse_error_names_field(capsys):
    _, _, err = run(capsys, "profile", "--input-a", '{"values": ["1", "2", "x"]}')
    assert "--input-a" in err and "values[2]" in err


def test_q_exact_and_dp(capsys):
    for method in ("exact", "dp"):
        code, out, _ = run(capsys, "q", "--input-a", js([1, 2, 3]), "--input-b", js([1, 2, 3]),
                           "--method", method)
        obj = json.loads(out)
        assert code == 0 and obj["q"] == "1/3" and obj["argmax"] == "11"


def test_q_counterexample(capsys):
    _, out, _ = run(capsys, "q", "--input-a", js([1, 2, 3, 0, 0, 0]), "--input-b", js([1, 0, 0, 0, 0, 0]))
    assert json.loads(out)["q"] == "1/2"


def test_q_mc_reproducible(capsys):
    argv = ["q", "--input-a", js([1, 2, 3]), "--input-b", js([1, 2, 3]), "--method", "mc",
            "--seed", "42", "--samples", "10000"]
    first = json.loads(run(capsys, *argv)[1])
    second = json.loads(run(capsys, *argv, "--workers", "4")[1])
    assert first == second
    assert first["seed"] == 42 and first["N"] == 10000 and len(first["ci"]) == 2


def test_q_cap_exit_3_and_fallback(capsys):
    big = js(range(1, 18))
    code, _, err = run(capsys, "q", "--input-a", big, "--input-b", big)
    assert code == 3 and "cap" in err
    code, out, _ = run(capsys, "q", "--input-a", big, "--input-b", big, "--mc-fallback",
                       "--samples", "2000")
    assert code == 0 and json.loads(out)["method"] == "mc"
    code, _, _ = run(capsys, "q", "--input-a", js(range(9)), "--input-b", js(range(9)),
                     "--method", "dp", "--dp-cap", "8")
    assert code == 3


def test_dist_roundtrip(capsys):
    code, out, _ = run(capsys, "dist", "--input-a", js([1, 2, 3]), "--input-b", js([1, 2, 3]))
    obj = json.loads(out)
    assert code == 0 and obj["total"] == "6"
    assert obj["atoms"] == [["10", "1"], ["11", "2"], ["13", "2"], ["14", "1"]]
    ExactDistribution.from_obj(obj)
    code, out, _ = run(capsys, "dist", "--input-a", js([1, 2, 3]), "--input-b", js([1, 2, 3]),
                       "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["value", "count"] and rows[1] == ["10", "1"]


def test_var(capsys):
    _, out, _ = run(capsys, "var", "--input-a", js([1, 2, 3]), "--input-b", js([1, 2, 3]))
    obj = json.loads(out)
    assert obj["variance"] == "2" and obj["var_n_over_MAMB"] == "6/25"


def test_energy(capsys):
    base = ["energy", "--input-a", js([0, 1]), "--input-b", js([0, 1])]
    obj = json.loads(run(capsys, *base, "--c", "1,-1")[1])
    assert obj == {**obj, "method": "convolution", "s": 2, "c": [1, -1], "kappa": "19/32", "K": "152"}
    flipped = json.loads(run(capsys, *base, "--c", "1,1")[1])
    assert flipped["kappa"] == obj["kappa"]
    brute = json.loads(run(capsys, *base, "--method", "brute", "--distinct")[1])
    assert brute["K"] == "0" and brute["method"] == "brute_distinct"
    code, _, _ = run(capsys, *base, "--distinct")
    assert code == 2
    big = ["energy", "--input-a", js(range(6)), "--input-b", js(range(6)), "--method", "brute",
           "--c", "1,1,-1", "--budget", "1000"]
    assert run(capsys, *big)[0] == 3
    rnr = json.loads(run(capsys, *base, "--rnr")[1])["rnr"]
    assert rnr["ratio"].startswith("1.7132")


def test_decompose(capsys):
    obj = json.loads(run(capsys, "decompose", "--input-a", js(range(1, 9)))[1])
    assert (obj["m"], obj["r"]) == (1, 5) and obj["witness"] == ["1", "2", "3", "4", "5"]


def test_verify_json_and_csv(capsys):
    argv = ["verify", "--input-a", js([1, 2, 3]), "--input-b", js([0, 0, 1])]
    obj = json.loads(run(capsys, *argv)[1])
    status = {v["bound_kind"]: v["status"] for v in obj["verdicts"]}
    assert status["pawlowski"] == "violated" and status["pawlowski_count"] == "satisfied"
    out = run(capsys, *argv, "--format", "csv")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert len(rows) == 6


def test_scan_uniform_grid(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "--family", "uniform_grid", "--n-range", "3..10",
                     "--bounds", "conjecture_ap", "--out", str(path))
    text = path.read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 8
    assert [int(r["n"]) for r in rows] == list(range(3, 11))
    assert rows[0]["Q_exact"] == "1/3" and rows[0]["ratio"].startswith("1.0854")
    # rationals are always quoted
    assert '"1/3"' in text.splitlines()[1]


def test_scan_counterexample_constant_q(capsys):
    _, out, _ = run(capsys, "scan", "--family", "counterexample", "--n-range", "4..10:2",
                    "--bounds", "mamb")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["Q_exact"] for r in rows] == ["1/2"] * 4
    assert {r["status"] for r in rows} == {"not-applicable"}


def test_scan_empty_range(capsys):
    code, out, _ = run(capsys, "scan", "--n-range", "")
    assert code == 0
    assert out.strip().splitlines() == [",".join(f'"{c}"' for c in CSV_COLUMNS)]


def test_scan_partial_failure_exit_4(capsys, tmp_path):
    path = tmp_path / "partial.csv"
    code, _, err = run(capsys, "scan", "--n-range", "7..9", "--dp-cap", "8", "--enum-cap", "7",
                       "--bounds", "main", "--out", str(path))
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert code == 4 and "aborted" in err
    assert [r["n"] for r in rows] == ["7", "8"]


def test_scan_custom_list(capsys, tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps([{"A": {"values": ["1", "2", "3"]}, "B": {"values": ["0", "0", "1"]}},
                                {"A": {"values": ["0", "1"]}, "B": {"values": ["1", "1"]}}]))
    code, out, _ = run(capsys, "scan", "--family", "custom-list", "--instances", str(path),
                       "--bounds", "pawlowski,pawlowski_count")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["status"] for r in rows] == ["violated", "satisfied",
                                                         "not-applicable", "not-applicable"]


def test_scan_json_roundtrip(capsys):
    _, out, _ = run(capsys, "scan", "--n-range", "3..4", "--bounds", "main", "--format", "json")
    rows = json.loads(out)
    assert [r["n"] for r in rows] == [3, 4] and set(rows[0]) == set(CSV_COLUMNS)


def test_staircase_block_family(capsys):
    _, out, _ = run(capsys, "scan", "--family", "staircase", "--n-range", "6", "--block", "2",
                    "--bounds", "tightness_lower")
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["M_A"] == "10"  # profile (2, 2, 2): 0 + 2 + 8
