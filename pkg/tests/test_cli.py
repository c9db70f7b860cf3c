import json

import pytest

from cyclo_extremal.cli import run


def test_coeffs_json():
    code, out, _ = run(["coeffs", "105"])
    data = json.loads(out)
    assert code == 0
    assert data == {"n": "105", "A": "2", "S": "35", "degree": 48, "M": "3", "ratio": 2 / 3}


def test_coeffs_emit_palindrome():
    code, out, _ = run(["coeffs", "15", "--emit-coeffs"])
    c = [int(v) for v in json.loads(out)["coeffs"]]
    assert code == 0 and len(c) == 9 and c == c[::-1]


def test_coeffs_csv_and_reduce():
    code, out, _ = run(["coeffs", "15", "--format", "csv"])
    assert code == 0 and out.splitlines()[:2] == ["n,A,S,degree,M,ratio", "15,1,7,8,1,1.0"]
    code, out, _ = run(["coeffs", "12", "--reduce", "--emit-coeffs"])
    assert json.loads(out)["coeffs"] == ["1", "0", "-1", "0", "1"]


@pytest.mark.parametrize("argv,code,error", [
    (["coeffs", "9"], 2, "NotSquarefree"),
    (["coeffs", "30"], 2, "NotOdd"),
    (["coeffs", "105", "--degree-cap", "10"], 3, "DegreeCapExceeded"),
    (["circle", "105", "--scan-budget", "3"], 3, "ScanBudgetExceeded"),
])
def test_domain_and_budget_errors(argv, code, error):
    got, _, err = run(argv)
    assert got == code
    assert json.loads(err)["error"] == error


@pytest.mark.parametrize("argv", [
    ["construct", "--omega", "3", "--epsilon", "1.5"],
    ["construct", "--omega", "2", "--epsilon", "0.5"],
    ["construct", "--omega", "3", "--epsilon", "0.5", "--h", "sqrt:2"],
    ["frobnicate"],
    ["coeffs"],
    ["verify", "--suite", "nope"],
])
def test_usage_errors(argv):
    assert run(argv)[0] == 1


def test_circle_and_cache(isolated_cache):
    code, out, _ = run(["circle", "15"])
    first = json.loads(out)
    assert code == 0 and first["L"] >= 4 * 1 * 5 / 3.14159**2 * 0.99
    assert (isolated_cache / "circle_profiles.json").exists()
    assert run(["circle", "15"])[1] == out
    assert run(["circle", "15", "--no-cache"])[1] == out
    assert run(["circle", "15", "--threads", "2", "--no-cache"])[1] == out
    fine = json.loads(run(["circle", "15", "--grid-mult", "32"])[1])
    assert abs(fine["L"] - first["L"]) <= 1e-9


def test_circle_prime():
    data = json.loads(run(["circle", "5"])[1])
    assert data["L"] == 5.0 and data["x_M"] == 0.0


def test_cache_ignores_other_versions(isolated_cache):
    from cyclo_extremal.cache import ProfileCache
    from cyclo_extremal.circle import DEFAULT_TOL, circle_profile
    from cyclo_extremal.numtheory import parse_squarefree_odd

    n = parse_squarefree_odd(21)
    old = ProfileCache(version="0.0.1")
    old.put(circle_profile(n), DEFAULT_TOL)
    assert old.get(n, 16, DEFAULT_TOL) is not None
    assert ProfileCache().get(n, 16, DEFAULT_TOL) is None


def test_construct_writes_out(tmp_path):
    target = tmp_path / "tower.json"
    code, out, _ = run(["construct", "--omega", "3", "--epsilon", "0.5", "--h", "const:1", "--out", str(target)])
    assert code == 0
    data = json.loads(out)
    assert target.read_text() == out
    assert data["verdict"] and data["primes"] == [5, 7, 59]
    assert isinstance(data["n"], str) and isinstance(data["M_n"], str)
    assert isinstance(data["levels"][2]["class_modulus"], str)


def test_construct_search_exhausted_emits_partial_tower():
    code, out, _ = run(["construct", "--omega", "3", "--epsilon", "0.5", "--h", "exp:2"])
    # h(5) = 32 fits, but h(5 * p2) overflows the prime range at level 3
    data = json.loads(out)
    assert code == 4
    assert len(data["levels"]) == 2 and not data["verdict"]


def test_scan_csv():
    code, out, _ = run(["scan", "--omega", "3", "--max-n", "1000", "--top", "5"])
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,A,M,ratio" and len(lines) == 6
    assert float(lines[1].split(",")[3]) >= 2 / 3
    assert run(["scan", "--omega", "3", "--max-n", "104"])[1] == "n,A,M,ratio\n"
    out = run(["scan", "--omega", "4", "--max-n", "2000"])[1]
    assert "1155,3,135," in out


def test_verify_suites(tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(["verify", "--suite", "lemmas", "--report", str(report)])
    assert code == 0 and "FAIL" not in out
    assert all(c["passed"] for c in json.loads(report.read_text())["checks"])
    code, out, _ = run(["verify", "--suite", "binary"])
    assert code == 0 and out.startswith("PASS")


def test_verify_all_detects_corrupted_cache(isolated_cache):
    assert run(["circle", "35"])[0] == 0
    path = isolated_cache / "circle_profiles.json"
    data = json.loads(path.read_text())
    for entry in data.values():
        entry["profile"]["L"] *= 1.5
    path.write_text(json.dumps(data))
    code, out, _ = run(["verify", "--suite", "all"])
    assert code == 5
    assert "FAIL  cache entries reproduce" in out
    assert "counterexample: n=35" in out
