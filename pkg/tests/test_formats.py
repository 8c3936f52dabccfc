import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import tsirelson_matrices
from ctxprep.formats import (
    FormatError,
    format_complex,
    parse_catalog,
    parse_certificate,
    parse_complex,
    parse_measurement,
    parse_state,
    parse_tuple,
    serialize_catalog,
    serialize_certificate,
    serialize_measurement,
    serialize_state,
    serialize_tuple,
)
from ctxprep.inequality import chsh, kcbs
from ctxprep.measure import shipped_catalog
from ctxprep.operators import ObservableTuple, QuantumState, random_state
from ctxprep.preparation import ProjectiveMeasurement, prop4_witness


@pytest.mark.parametrize("tok, z", [
    ("1", 1), ("-2.5", -2.5), ("0.5+0.25i", 0.5 + 0.25j), ("1e-3-2E2i", 1e-3 - 200j),
    ("3i", 3j), ("-.5i", -0.5j), (".5", 0.5),
])
def test_parse_complex(tok, z):
    assert parse_complex(tok) == z


@pytest.mark.parametrize("tok", ["i", "1+i", "1j", "nan", "inf", "1+2", "abc", "1..2"])
def test_parse_complex_rejects(tok):
    with pytest.raises(FormatError):
        parse_complex(tok, 7)


def test_format_error_carries_line():
    with pytest.raises(FormatError) as info:
        parse_complex("x", 7)
    assert info.value.line == 7 and "line 7" in str(info.value)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite, finite)
def test_complex_round_trip(a, b):
    z = complex(a, b)
    assert parse_complex(format_complex(z)) == z


def test_state_round_trip():
    s = random_state(3, 2, seed=0)
    again = parse_state(serialize_state(s))
    assert np.array_equal(again.matrix, s.matrix)
    spec = QuantumState.from_spectrum([0.5, 0.3, 0.2])
    again = parse_state(serialize_state(spec))
    assert not again.has_matrix
    assert np.array_equal(again.eigenvalues, spec.eigenvalues)


def test_state_parse_comments_and_errors():
    text = "# a qubit\nstate v1\ndim 2  # dimension\n\n0.5 0.5i\n-0.5i 0.5\n"
    s = parse_state(text)
    assert np.allclose(s.matrix, [[0.5, 0.5j], [-0.5j, 0.5]])
    with pytest.raises(FormatError, match="header"):
        parse_state("tuple v1\ndim 1\n1\n")
    with pytest.raises(FormatError) as info:
        parse_state("state v1\ndim 2\n1 0\n0\n")
    assert info.value.line == 4
    with pytest.raises(FormatError):
        parse_state("state v1\ndim 2\n1 0\n0 1\n")  # trace 2
    with pytest.raises(FormatError):
        parse_state("state v1\ndim 2\nspectrum 0.5 0.5i\n")
    with pytest.raises(FormatError):
        parse_state("state v1\ndim 1\n1\n1\n")
    with pytest.raises(FormatError):
        parse_state("state v1\ndim 0\n")


def test_tuple_round_trip():
    tup = ObservableTuple.from_matrices(tsirelson_matrices(), chsh())
    again = parse_tuple(serialize_tuple(tup), chsh())
    for a, b in zip(tup.observables, again.observables):
        assert np.array_equal(a, b)


def test_tuple_errors():
    with pytest.raises(FormatError):
        parse_tuple("tuple v1\ndim 1\n")
    with pytest.raises(FormatError):
        parse_tuple("tuple v1\ndim 1\nobservable 2\n1\n")
    with pytest.raises(FormatError):
        parse_tuple("tuple v1\ndim 1\nobservable 1\n1\n", chsh())  # wrong count


def test_measurement_round_trip():
    m = ProjectiveMeasurement.random(5, (2, 3), seed=1)
    again = parse_measurement(serialize_measurement(m))
    assert again.ranks == (2, 3)
    for a, b in zip(m.projectors, again.projectors):
        assert np.allclose(a, b, atol=1e-14)


def test_measurement_errors():
    with pytest.raises(FormatError):
        parse_measurement("meas v1\ndim 2\nprojector 1\n1 0\nprojector 1\n1 0\n")
    with pytest.raises(FormatError):
        parse_measurement("meas v1\ndim 2\nprojector 3\n1 0\n")
    with pytest.raises(FormatError):
        parse_measurement("meas v1\ndim 2\nprojector 1\n1 0\n")


def test_certificate_round_trip():
    meas = ProjectiveMeasurement.random(5, (2, 3), seed=2)
    cert = prop4_witness(meas, chsh(), 4, shipped_catalog(chsh()))
    text = serialize_certificate(cert, chsh())
    again = parse_certificate(text, chsh())
    assert again.outcome == cert.outcome and again.t1 == cert.t1 and again.source == cert.source
    assert np.array_equal(again.phi, cert.phi)
    for a, b in zip(cert.tuple.observables, again.tuple.observables):
        assert np.array_equal(a, b)
    with pytest.raises(FormatError):
        parse_certificate(text, kcbs())


def test_catalog_round_trip():
    cat = shipped_catalog(kcbs()).merged(shipped_catalog(chsh()))
    again = parse_catalog(serialize_catalog(cat))
    assert [e.label for e in again] == [e.label for e in cat]
    for a, b in zip(again, cat):
        assert np.array_equal(a.spectrum, b.spectrum) and a.ineq_key == b.ineq_key


def test_catalog_errors():
    with pytest.raises(FormatError):
        parse_catalog("catalog v1\nentry a key 2 : 1\n")
    with pytest.raises(FormatError):
        parse_catalog("catalog v1\nentry a key 2 1 1\n")
    with pytest.raises(FormatError):
        parse_catalog("catalog v1\nentry a key two : 1 1\n")
