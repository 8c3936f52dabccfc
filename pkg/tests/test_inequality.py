import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxprep import shipped_inequality_text
from ctxprep.inequality import (
    Inequality,
    InequalityError,
    InequalityParseError,
    NotNormalizedError,
    chsh,
    classical_value,
    compatibility_neighbors,
    kcbs,
    parse_inequality,
    require_normalized,
    serialize_inequality,
    validate_normalization,
)


def brute_force_max(ineq):
    """Independent oracle: reverse-order enumeration with plain Fractions."""
    best = None
    for signs in reversed(list(itertools.product((1, -1), repeat=ineq.n_observables))):
        total = Fraction(0)
        for coeff, ctx in ineq.terms:
            prod = 1
            for k in ctx:
                prod *= signs[k - 1]
            total += coeff * prod
        if best is None or total > best:
            best = total
    return best


@st.composite
def inequalities(draw):
    n = draw(st.integers(1, 7))
    subsets = [c for r in range(1, min(n, 3) + 1) for c in itertools.combinations(range(1, n + 1), r)]
    chosen = draw(st.lists(st.sampled_from(subsets), min_size=1, max_size=6, unique=True))
    coeffs = draw(st.lists(
        st.fractions(min_value=-3, max_value=3, max_denominator=7).filter(lambda q: q != 0),
        min_size=len(chosen), max_size=len(chosen)))
    return Inequality.from_terms(n, list(zip(coeffs, chosen)))


def test_chsh_text_parses():
    ineq = parse_inequality(shipped_inequality_text("chsh"))
    assert ineq.n_observables == 4
    assert ineq.terms == (
        (Fraction(1, 2), (1, 3)), (Fraction(1, 2), (1, 4)),
        (Fraction(1, 2), (2, 3)), (Fraction(-1, 2), (2, 4)),
    )
    assert ineq == chsh()


def test_kcbs_text_parses():
    ineq = parse_inequality(shipped_inequality_text("kcbs"))
    assert ineq.n_observables == 5
    assert len(ineq.terms) == 5
    assert all(c == Fraction(-1, 3) for c in ineq.coefficients)
    assert ineq == kcbs()


@pytest.mark.parametrize("text, line", [
    ("ineq v1\nobservables 2\nterm 1 : 1 1\n", 3),
    ("ineq v1\nobservables 2\nterm 1 : 1 3\n", 3),
    ("ineq v1\nobservables 2\nterm 1 : 1 2\nterm 2 : 2 1\n", 4),
    ("ineq v1\nobservables 0\n", 2),
    ("ineq v2\n", 1),
    ("ineq v1\nobservables 2\nterm x : 1\n", 3),
    ("ineq v1\nobservables 2\nterm 0 : 1\n", 3),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(InequalityParseError) as exc:
        parse_inequality(text)
    assert exc.value.line == line


def test_parse_decimal_and_comments():
    ineq = parse_inequality("# header comment\nineq v1\n\nobservables 2  # two\nterm 0.25 : 2 1\nterm -3 : 1\n")
    assert ineq.terms == ((Fraction(1, 4), (1, 2)), (Fraction(-3), (1,)))


def test_no_terms_is_error():
    with pytest.raises(InequalityParseError):
        parse_inequality("ineq v1\nobservables 2\n")


@pytest.mark.parametrize("ineq, a, expected", [
    (chsh(), (1, 1, 1, 1), 1),
    (chsh(), (1, 1, -1, -1), -1),
    (kcbs(), (1, -1, 1, -1, 1), 1),
])
def test_classical_value_examples(ineq, a, expected):
    assert classical_value(ineq, a) == expected


def test_classical_value_length_mismatch():
    with pytest.raises(InequalityError):
        classical_value(chsh(), (1, 1, 1))


def test_validate_chsh():
    rep = validate_normalization(chsh())
    assert rep.max_value == 1 and rep.is_normalized
    assert rep.argmax == (1, 1, 1, 1)
    assert rep.n_assignments_checked == 16


def test_validate_kcbs():
    rep = validate_normalization(kcbs())
    assert rep.max_value == 1 and rep.is_normalized
    assert classical_value(kcbs(), rep.argmax) == 1
    # lexicographically first maximizer with +1 before -1
    firsts = [a for a in itertools.product((1, -1), repeat=5) if classical_value(kcbs(), a) == 1]
    assert rep.argmax == firsts[0]


def test_validate_not_normalized():
    ineq = Inequality.from_terms(1, [(2, (1,))])
    rep = validate_normalization(ineq)
    assert rep.max_value == 2 and not rep.is_normalized
    with pytest.raises(NotNormalizedError):
        require_normalized(ineq)


def test_enumeration_guard():
    ineq = Inequality.from_terms(5, [(1, (1,))])
    with pytest.raises(InequalityError):
        validate_normalization(ineq, guard=4)


def test_enumeration_chunks_agree():
    ineq = Inequality.from_terms(9, [(Fraction(1, 3), (1, 2)), (Fraction(-2, 5), (3, 9)), (1, (4, 5, 6))])
    a = validate_normalization(ineq)
    b = validate_normalization(ineq, chunk=7)
    assert a == b


@pytest.mark.parametrize("ineq, k, expected", [
    (chsh(), 1, {3, 4}),
    (kcbs(), 3, {2, 4}),
    (Inequality.from_terms(3, [(1, (1,)), (1, (2,)), (1, (3,))]), 2, set()),
])
def test_compatibility_neighbors(ineq, k, expected):
    assert compatibility_neighbors(ineq, k) == expected


def test_neighbors_index_range():
    with pytest.raises(InequalityError):
        compatibility_neighbors(chsh(), 5)


def test_key_is_content_hash():
    assert chsh().key == parse_inequality(shipped_inequality_text("chsh")).key
    assert chsh().key != kcbs().key


@given(inequalities())
def test_round_trip(ineq):
    assert parse_inequality(serialize_inequality(ineq)) == ineq


@given(inequalities(), st.data())
def test_classical_value_bounded(ineq, data):
    a = data.draw(st.lists(st.sampled_from([1, -1]), min_size=ineq.n_observables,
                           max_size=ineq.n_observables))
    assert abs(classical_value(ineq, a)) <= ineq.abs_coefficient_sum


@given(inequalities())
def test_max_matches_reverse_enumeration(ineq):
    rep = validate_normalization(ineq)
    assert rep.max_value == brute_force_max(ineq)
    assert classical_value(ineq, rep.argmax) == rep.max_value
