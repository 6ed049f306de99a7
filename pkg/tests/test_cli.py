import json
import subprocess
import sys

import pytest

from presqe.cli import main
from presqe.parser import parse
from presqe.semantics import check_equiv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    report = dict(line.split("=", 1) for line in out.splitlines())
    return code, report


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p

    return _write


class TestEliminate:
    def test_dnf(self, capsys, write):
        src = write("f.pa", "(exists (x) (= (* 2 x) y))\n")
        code, rep = run(capsys, "eliminate", "--input", src)
        assert code == 0 and rep["command"] == "eliminate" and rep["exit_code"] == "0"
        assert len(rep["input_sha256"]) == 64
        assert check_equiv(parse(rep["output"]), parse(src.read_text())).passed

    def test_bepa_then_expand(self, capsys, write, tmp_path):
        src = write("f.pa", "(exists (x) (and (<= y x) (<= x 1)))\n")
        mid = tmp_path / "g.bpa"
        code, rep = run(capsys, "eliminate", "--input", src, "--mode", "bepa", "--out", mid)
        assert code == 0 and mid.read_text().startswith("(bexists")
        code, rep = run(capsys, "eliminate", "--input", mid, "--mode", "bepa-expand")
        assert code == 0
        assert check_equiv(parse(rep["output"]), parse(src.read_text())).passed

    def test_cap_exit_code(self, capsys, write):
        src = write("f.pa", "(exists (x) (and (or (<= x y) (<= y x)) (or (<= x 1) (<= 2 x))))\n")
        code, rep = run(capsys, "eliminate", "--input", src, "--max-conjuncts", 1)
        assert code == 3 and rep["error"].startswith("ResourceLimitError")

    def test_parse_error(self, capsys, write):
        code, rep = run(capsys, "eliminate", "--input", write("bad.pa", "(<= x"))
        assert code == 2 and "ParseError" in rep["error"]

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, "eliminate", "--input", tmp_path / "nope.pa")
        assert code == 2


class TestCheckEquiv:
    def test_counterexample(self, capsys, write):
        code, rep = run(capsys, "check-equiv", write("a.pa", "(<= y 0)"), write("b.pa", "(<= y 1)"))
        assert code == 1 and rep["counterexample"] == "y=1" and rep["verdict"] == "differ"

    def test_equivalent(self, capsys, write):
        a = write("a.pa", "(exists (x) (= (* 2 x) y))")
        b = write("b.pa", "(modeq y 0 2)")
        code, rep = run(capsys, "check-equiv", a, b, "--box", 6)
        assert code == 0 and rep["verdict"] == "equivalent" and rep["exhaustive"] == "true"


class TestPeriod:
    @pytest.mark.parametrize("n,p", [(2, 6), (3, 210)])
    def test_sn(self, capsys, n, p):
        code, rep = run(capsys, "period", "--sn", n)
        assert code == 0 and rep["period"] == str(p) and rep["verdict"] == "match"

    def test_input(self, capsys, write):
        code, rep = run(capsys, "period", "--input", write("m.pa", "(modeq x 2 5)"))
        assert code == 0 and rep["period"] == "5" and rep["period_le_2_pow_size"] == "true"

    def test_quantified_input(self, capsys, write):
        code, rep = run(capsys, "period", "--input", write("q.pa", "(exists (z) (= x (* 3 z)))"))
        assert code == 0 and rep["eliminated"] == "true" and rep["period"] == "3"

    def test_two_variables_rejected(self, capsys, write):
        code, _ = run(capsys, "period", "--input", write("t.pa", "(<= x y)"))
        assert code == 2


class TestWitness:
    def test_interval(self, capsys, write):
        A = write("A.csv", "1\n-1\n")
        b = write("b.csv", "3,-1\n")
        code, rep = run(capsys, "witness", "--matrix", A, "--rhs", b)
        assert code == 0
        assert rep["D"] == "1,0" and rep["d"] == "0" and rep["x"] == "3"
        assert rep["validates"] == rep["bound_D_holds"] == rep["bound_d_holds"] == "true"

    def test_no_solution(self, capsys, write):
        code, rep = run(capsys, "witness", "--matrix", write("A.csv", "2\n-2\n"), "--rhs", write("b.csv", "3,-3\n"))
        assert code == 1 and rep["verdict"] == "no-integral-solution"

    def test_zero_matrix(self, capsys, write):
        code, rep = run(capsys, "witness", "--matrix", write("A.csv", "0\n"), "--rhs", write("b.csv", "0\n"))
        assert code == 0 and rep["x"] == "0"

    def test_enumerate(self, capsys, write, tmp_path):
        out = tmp_path / "cands.csv"
        code, rep = run(capsys, "witness", "--matrix", write("A.csv", "2\n-1\n"), "--enumerate", "--family", "box", "--out", out)
        assert code == 0 and int(rep["candidates"]) > 0
        assert out.read_text().count("# candidate") == int(rep["candidates"])

    def test_shape_mismatch(self, capsys, write):
        code, _ = run(capsys, "witness", "--matrix", write("A.csv", "1\n-1\n"), "--rhs", write("b.csv", "3\n"))
        assert code == 2


class TestEncode:
    def test_wqo(self, capsys, write):
        code, rep = run(capsys, "encode", "--wqo", write("g.pa", "(forall (y) (exists (x) (= x y)))"))
        assert code == 0 and rep["encoding"] == "wqo" and rep["free_vars"] == "u0,v0,v1"

    def test_mondec(self, capsys, write):
        code, rep = run(capsys, "encode", "--mondec", write("g.pa", "(forall (x) (exists (y) (= y x)))"))
        assert code == 0 and rep["free_vars"] == "x,z1,z2"

    def test_open_formula_rejected(self, capsys, write):
        code, _ = run(capsys, "encode", "--mondec", write("g.pa", "(<= x y)"))
        assert code == 2


class TestReporting:
    def test_json_and_timings(self, capsys, write, tmp_path):
        js = tmp_path / "r.json"
        code, rep = run(capsys, "period", "--sn", 2, "--report-json", js, "--timings")
        data = json.loads(js.read_text())
        assert code == 0 and "seconds" in rep and data["period"] == 6 and data["exit_code"] == 0
        assert list(rep)[-1] == "exit_code"

    def test_deterministic_without_timings(self, capsys, write):
        src = write("f.pa", "(exists (x z) (and (<= (+ x z) y) (modeq (+ x (* 2 z)) 1 3)))")
        first = run(capsys, "eliminate", "--input", src)
        second = run(capsys, "eliminate", "--input", src)
        assert first == second and "seconds" not in first[1]

    def test_console_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "presqe.cli", "--version"], capture_output=True, text=True)
        assert out.returncode == 0 and "presqe" in out.stdout
