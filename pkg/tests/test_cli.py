import numpy as np
import pytest

from ctxprep.cli import main
from ctxprep.formats import parse_catalog, parse_certificate, parse_tuple, serialize_measurement, serialize_state
from ctxprep.inequality import chsh
from ctxprep.operators import QuantumState, check_feasible, random_state
from ctxprep.preparation import ProjectiveMeasurement


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(report):
    lines = report.splitlines()
    assert lines[0].startswith("# ctxprep ")
    return lines[1:]


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_validate_shipped(capsys):
    for name in ("chsh", "kcbs"):
        code, out, _ = run(capsys, "validate", name)
        assert code == 0
        assert "max 1 at (" in out and "\nnormalized" in out
    code, out, _ = run(capsys, "validate", "chsh")
    assert "max 1 at (+,+,+,+)" in out


def test_validate_not_normalized(capsys, files):
    path = files("bad.ineq", "ineq v1\nobservables 1\nterm 2 : 1\n")
    code, out, _ = run(capsys, "validate", path)
    assert code == 1
    assert "max 2" in out and "NOT normalized" in out


def test_validate_parse_error(capsys, files):
    path = files("dup.ineq", "ineq v1\nobservables 2\nterm 1 : 1 1\n")
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "validate", "no/such/file.ineq")
    assert code == 2


def test_cd_pure_state_and_outputs(capsys, files, tmp_path):
    state = files("psi.state", serialize_state(random_state(4, 1, seed=0)))
    tup_path = tmp_path / "out" / "w.tuple"
    cat_path = tmp_path / "cat.txt"
    argv = ["cd", "--ineq", "chsh", "--state", state, "--restarts", "4", "--seed", "0",
            "--out", str(tup_path), "--save-catalog", str(cat_path)]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    last = body(out)[-1]
    assert last.startswith("C_4 >= ")
    assert float(last.split()[-1]) == pytest.approx(np.sqrt(2), abs=1e-6)
    tup = parse_tuple(tup_path.read_text(), chsh())
    assert check_feasible(chsh(), tup, 1e-7).passed
    cat = parse_catalog(cat_path.read_text())
    assert any(e.label.startswith("seesaw-d4") for e in cat)


def test_cd_spectrum_only(capsys, files):
    state = files("mix.state", serialize_state(QuantumState.from_spectrum([0.25] * 4)))
    code, out, _ = run(capsys, "cd", "--ineq", "chsh", "--state", state)
    assert code == 0
    assert "catalog lower bound 1 (entry" in out
    assert "see-saw skipped" in out
    assert body(out)[-1] == "C_4 >= 1"


def test_cd_reports_are_reproducible(capsys):
    argv = ["cd", "--ineq", "kcbs", "--dim", "3", "--rank", "2", "--restarts", "2", "--seed", "5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert body(a) == body(b)


def test_cd_usage_errors(capsys):
    assert run(capsys, "cd", "--ineq", "chsh")[0] == 2
    assert run(capsys, "cd", "--dim", "4")[0] == 2
    assert run(capsys, "cd", "--ineq", "chsh", "--state", "missing.state")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["cd", "--ineq", "chsh", "--dim", "0"])
    assert info.value.code == 2


def test_prepare_all_guaranteed(capsys, files):
    meas = files("m.meas", serialize_measurement(ProjectiveMeasurement.random(5, (2, 2, 1), seed=0)))
    state = files("r.state", serialize_state(random_state(5, seed=0)))
    code, out, _ = run(capsys, "prepare", "--ineq", "chsh", "--state", state, "--meas", meas,
                       "--restarts", "0")
    assert code == 0
    rows = [l.split() for l in body(out) if l.split() and l.split()[0].isdigit()]
    assert len(rows) == 3
    for row in rows:
        assert row[3] == "guaranteed" and float(row[4]) > 1
    assert "verdict: some-outcome-violates" in out


def test_prepare_half_rank_maximally_mixed(capsys, files):
    meas = files("m.meas", serialize_measurement(ProjectiveMeasurement.random(6, (3, 3), seed=1)))
    code, out, _ = run(capsys, "prepare", "--ineq", "chsh", "--dim", "6", "--rank", "6",
                       "--meas", meas, "--restarts", "0")
    assert code == 0
    rows = [l.split() for l in body(out) if l.split() and l.split()[0].isdigit()]
    assert [r[4] for r in rows] == ["1.138071", "1.138071"]


def test_prepare_single_projector(capsys, files):
    meas = files("id.meas", serialize_measurement(ProjectiveMeasurement.identity(5)))
    code, out, _ = run(capsys, "prepare", "--ineq", "chsh", "--dim", "5", "--meas", meas,
                       "--restarts", "1")
    assert code == 0
    assert "single projector" in out and "single outcome: yes" in out


def test_prepare_requires_dprime_for_custom_inequality(capsys, files):
    ineq = files("one.ineq", "ineq v1\nobservables 1\nterm 1 : 1\n")
    meas = files("id.meas", serialize_measurement(ProjectiveMeasurement.identity(2)))
    assert run(capsys, "prepare", "--ineq", ineq, "--dim", "2", "--meas", meas)[0] == 2


def test_witness_writes_certificate(capsys, files, tmp_path):
    meas = files("m.meas", serialize_measurement(ProjectiveMeasurement.random(5, (2, 3), seed=2)))
    state = files("r.state", serialize_state(random_state(5, seed=2)))
    cert_path, tup_path = tmp_path / "w.cert", tmp_path / "w.tuple"
    code, out, _ = run(capsys, "witness", "--ineq", "chsh", "--meas", meas, "--state", state,
                       "--out", str(cert_path), "--tuple", str(tup_path))
    assert code == 0
    assert "t1 1.414214 from tsirelson" in out
    assert "outcome 1 (rank 2)" in out
    cert = parse_certificate(cert_path.read_text(), chsh())
    assert cert.outcome == 0
    assert check_feasible(chsh(), parse_tuple(tup_path.read_text(), chsh())).passed


def test_witness_tie_break(capsys, files):
    meas = files("m.meas", serialize_measurement(ProjectiveMeasurement.random(6, (3, 3), seed=3)))
    code, out, _ = run(capsys, "witness", "--ineq", "chsh", "--meas", meas)
    assert code == 0 and "outcome 1 (rank 3)" in out


def test_witness_identity_fails(capsys, files):
    meas = files("id.meas", serialize_measurement(ProjectiveMeasurement.identity(5)))
    code, out, _ = run(capsys, "witness", "--ineq", "chsh", "--meas", meas)
    assert code == 1 and "no witness" in out


def test_witness_bad_measurement_file(capsys, files):
    meas = files("bad.meas", "meas v1\ndim 2\nprojector 1\n1 0\n")
    assert run(capsys, "witness", "--ineq", "chsh", "--meas", meas)[0] == 2


def test_check_suite(capsys):
    code, out, _ = run(capsys, "check", "hlp", "--seed", "1")
    assert code == 0
    assert "200/200 pass" in out and body(out)[-1] == "PASS"
    _, again, _ = run(capsys, "check", "hlp", "--seed", "1")
    assert body(out) == body(again)


def test_check_unknown_suite():
    with pytest.raises(SystemExit) as info:
        main(["check", "nosuch"])
    assert info.value.code == 2
