import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pltwirl.pauli import (
    NonTracePreservingWarning,
    PauliParseError,
    PauliWord,
    all_words,
    multiply,
    pauli_basis,
    pauli_from_label,
    pauli_matrix,
    symplectic_matrix,
    symplectic_product,
    walsh_hadamard_f_to_p,
    walsh_hadamard_naive,
    walsh_hadamard_p_to_f,
)

from oracles import commutes, f_from_p, labels, pauli

label_st = st.integers(1, 3).flatmap(lambda n: st.text(alphabet="IXYZ", min_size=n, max_size=n))


def test_single_qubit_order():
    assert [w.label for w in all_words(1)] == ["I", "X", "Y", "Z"]
    assert [w.label for w in all_words(2)][:5] == ["II", "IX", "IY", "IZ", "XI"]


@given(label_st)
def test_label_index_roundtrip(lab):
    w = pauli_from_label(lab)
    assert w.label == lab
    assert PauliWord.from_index(w.index, w.n) == w
    assert w.weight == sum(c != "I" for c in lab)


def test_parse_error_names_position():
    with pytest.raises(PauliParseError, match="position 2"):
        pauli_from_label("XZQ")
    with pytest.raises(PauliParseError):
        pauli_from_label("")


def test_matrices_match_oracle():
    for lab in labels(2):
        np.testing.assert_array_equal(pauli_matrix(lab), pauli(lab))
    np.testing.assert_allclose(pauli_matrix("Y"), 1j * pauli("X") @ pauli("Z"))


@given(label_st, st.data())
def test_symplectic_product_is_commutation(a, data):
    b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
    expect = 0 if commutes(a, b) else 1
    assert symplectic_product(pauli_from_label(a), pauli_from_label(b)) == expect


@given(label_st, st.data())
def test_multiply_phase(a, data):
    b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
    phase, c = multiply(pauli_from_label(a), pauli_from_label(b))
    np.testing.assert_allclose(pauli(a) @ pauli(b), phase * pauli(c.label), atol=1e-15)


def test_basis_and_symplectic_matrix_cached_and_readonly():
    b = pauli_basis(2)
    assert b is pauli_basis(2)
    assert not b.flags.writeable
    m = symplectic_matrix(2)
    ls = labels(2)
    for i, a in enumerate(ls):
        for j, c in enumerate(ls):
            assert m[i, j] == (0 if commutes(a, c) else 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fast_wht_matches_naive_and_oracle(n, rng):
    p = rng.dirichlet(np.ones(4**n))
    f = walsh_hadamard_p_to_f(p)
    np.testing.assert_allclose(f, walsh_hadamard_naive(p), atol=1e-14)
    if n <= 2:
        np.testing.assert_allclose(f, f_from_p(p, n), atol=1e-14)
    np.testing.assert_allclose(walsh_hadamard_f_to_p(f), p, atol=1e-14)


def test_non_trace_preserving_flagged():
    with pytest.warns(NonTracePreservingWarning):
        walsh_hadamard_f_to_p([0.9, 0.5, 0.5, 0.5])


def test_bad_length_rejected():
    with pytest.raises(ValueError):
        walsh_hadamard_p_to_f(np.ones(5))


@settings(max_examples=25)
@given(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
def test_wht_involution(v):
    v = np.array(v)
    np.testing.assert_allclose(walsh_hadamard_p_to_f(walsh_hadamard_p_to_f(v)) / 16, v, atol=1e-12)
