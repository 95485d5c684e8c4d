import csv
import io
import json
from fractions import Fraction

import pytest

from ideoarith import symmetric
from ideoarith.cli import emit_report, run_command
from ideoarith.interval import Interval
from ideoarith.symmetric import TRACE_COLUMNS


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_cf_table():
    code, out, _ = run("cf", "--src", "surd:(0+1√2)/1", "--count", "5")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == "ideoarith/1"
    assert rep["rows"][-1][2:] == ["41", "29"]


def test_respoly_prod():
    code, out, _ = run("respoly", "prod", "x^2-2", "x^2-3")
    assert code == 0 and "x^4-12x^2+36" in out


def test_littlewood_csv():
    code, out, _ = run("littlewood", "--x", "surd:(1+1√5)/2", "--y", "surd:(0+1√2)/1", "--limit", "1000",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert out.splitlines()[0] == ",".join(TRACE_COLUMNS)
    mins = [Fraction(r[-1]) for r in rows[1:]]
    assert mins and all(b < a for a, b in zip(mins, mins[1:]))


def test_deterministic_bytes():
    argv = ("sym", "--src", "surd:(1+1√5)/2", "--count", "40", "--depth", "40", "--bound", "10")
    first, second = run(*argv), run(*argv)
    assert first == second and first[0] == 0
    assert json.loads(first[1])["verdicts"][0]["value"] == "EQUIVALENT"


def test_no_bare_floats():
    code, out, _ = run("attach", "--src", "surd:(0+1√2)/1", "--count", "8")
    assert code == 0

    def walk(v):
        if isinstance(v, dict):
            for x in v.values():
                walk(x)
        elif isinstance(v, list):
            for x in v:
                walk(x)
        else:
            assert not isinstance(v, float)

    walk(json.loads(out))


def test_usage_errors():
    assert run("nosuch")[0] == 2
    assert run("cf", "--src", "surd:(0+1√2)/1", "--depth", "4")[0] == 2
    assert run("cf", "--src", "garbage:1")[0] == 2
    assert run("cf", "--src", "surd:(0+1√2)/1", "--prec", "5000")[0] == 2


def test_operational_failure_exit_1():
    code, _, err = run("field", "pv", "--field", "qfield:5", "--theta", "1+0w", "--count", "5")
    assert code == 1 and "NotPV" in err


def test_violation_exit_3(monkeypatch):
    real = symmetric.golden_error_test

    def broken(N, n):
        ok, cert = real(N, n)
        return ok, type(cert)(not cert.criterion, cert.direct, cert.zeck)

    monkeypatch.setattr(symmetric, "golden_error_test", broken)
    code, out, _ = run("zeck", "--N", "35", "--n", "2")
    assert code == 3
    assert json.loads(out)["witness"] == {"N": "35", "n": "2"}


def test_undecided_exits_zero():
    code, out, _ = run("sym", "--seq", "1,2,3,5,8", "--depth", "8")
    assert code == 0
    assert json.loads(out)["verdicts"][0]["value"] == "UNDECIDED"


def test_rational_input_is_operational_failure():
    assert run("flat", "--x", "rational:1/3", "--y", "surd:(0+1√2)/1")[0] == 1


def test_selftest():
    code, out, _ = run("selftest", "--seed", "3")
    assert code == 0 and all(json.loads(out)["checks"].values())


def test_empty_verdicts():
    assert emit_report({"verdicts": []}) == '{"schema":"ideoarith/1","verdicts":[]}\n'
    assert emit_report({"verdicts": []}, header=False) == '{"verdicts":[]}\n'


@pytest.mark.parametrize("lo,hi", [(Fraction(1, 3), Fraction(1, 2)), (Fraction(-7, 10 ** 30), Fraction(0)),
                                   (Fraction(5), Fraction(5))])
def test_interval_round_trip(lo, hi):
    iv = Interval(lo, hi)
    back = Interval.from_strings(json.loads(emit_report({"v": iv}))["v"])
    assert back.lo == lo and back.hi == hi


def test_csv_key_value_fallback():
    text = emit_report({"command": "zeck", "N": 100}, "csv")
    assert text.splitlines()[0] == "key,value"
