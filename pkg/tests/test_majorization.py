import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxprep.majorization import lemma_bound, majorizes, random_doubly_stochastic, state_majorizes
from ctxprep.operators import QuantumState, projector_state, random_state, random_unitary


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0), (0.5, 0.5), True),
    ((0.5, 0.5, 0), (0.4, 0.3, 0.3), True),
    ((0.6, 0.4), (0.7, 0.3), False),
])
def test_majorizes_examples(a, b, expected):
    assert majorizes(a, b) is expected


def test_majorizes_needs_equal_totals():
    assert not majorizes((1, 0), (0.6, 0.6))


def test_zero_padding_across_lengths():
    assert majorizes((0.5, 0.5), (0.25, 0.25, 0.25, 0.25))
    assert not majorizes((0.25, 0.25, 0.25, 0.25), (0.5, 0.5))


def test_state_majorizes_examples():
    pure = QuantumState.pure([1, 0, 0, 0])
    mixed = QuantumState.maximally_mixed(4)
    for seed in range(5):
        assert state_majorizes(pure, random_state(4, seed=seed))
        assert not state_majorizes(mixed, random_state(4, seed=seed))
    assert state_majorizes(mixed, QuantumState.from_spectrum([0.25] * 4))
    assert state_majorizes(projector_state(4, 2), mixed)


@pytest.mark.parametrize("a, b, c, expected", [
    ((1, 0), (1, 0), (1, 0), (1, 1)),
    ((1, 0), (0.5, 0.5), (2, 1), (1.5, 2)),
    ((0.7, 0.3), (0.6, 0.4), (-1, 1), (-0.2, 0.4)),
])
def test_lemma_bound_examples(a, b, c, expected):
    assert lemma_bound(a, b, c) == pytest.approx(expected)


def test_lemma_bound_length_mismatch():
    with pytest.raises(ValueError):
        lemma_bound((1, 0), (1, 0), (1,))


vectors = st.integers(1, 8).flatmap(
    lambda n: st.lists(st.floats(-10, 10, allow_nan=False), min_size=n, max_size=n))


@given(vectors, st.integers(0, 2**32 - 1))
def test_lemma_on_doubly_stochastic_images(a, seed):
    rng = np.random.default_rng(seed)
    a = np.array(a)
    b = random_doubly_stochastic(a.size, rng) @ a
    c = rng.standard_normal(a.size)
    lhs, rhs = lemma_bound(a, b, c)
    assert majorizes(a, b)
    assert lhs <= rhs + 1e-9


@given(vectors)
def test_reflexive(a):
    assert majorizes(a, a)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_transitive_and_antisymmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n)
    b = random_doubly_stochastic(n, rng) @ a
    c = random_doubly_stochastic(n, rng) @ b
    assert majorizes(a, b) and majorizes(b, c) and majorizes(a, c)
    if majorizes(b, a):
        assert np.allclose(np.sort(a), np.sort(b), atol=1e-8)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_schur_horn_diagonal(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(d, int(rng.integers(1, d + 1)), seed=seed)
    u = random_unitary(d, rng)
    diag = np.real(np.diag(u.conj().T @ rho.matrix @ u))
    assert majorizes(rho.eigenvalues, diag)
